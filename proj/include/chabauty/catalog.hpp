#pragma once

// The closed subgroups of SL(2,R) x| R^2 that occur as conjugacy limits of
// L, K, A, B and N+, each decorated with an outer conjugator.

#include "chabauty/group.hpp"

#include <json.hpp>

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chabauty {

enum class Family {
  Levi,           // SL(2,R)
  MaxCompact,     // K = SO(2)
  Diagonal,       // A = {diag(a, 1/a), a > 0}
  BorelSL2,       // B = upper triangular, positive diagonal
  BorelFull,      // B x| R^2
  NPlus,          // upper unipotent
  NMinus,         // lower unipotent
  TildeNPlus,     // {+-u_s}
  NPlusC,         // {(u_x, (c x, 0))}
  VLine,          // {(I, (t, c t))}, c = inf gives {(I, (0, t))}
  HeisLine,       // {(u_{at}, (c t + a b t^2 / 2, b t))}
  NPlusSemiR2,    // N+ x| R^2
  NPlusSemiV0,    // N+ x| {(t, 0)}
  WSlant,         // {(u_s, (t, -c s))}, c != 0
  Translations2,  // R^2
};

inline constexpr std::array<Family, 15> kAllFamilies = {
    Family::Levi,     Family::MaxCompact, Family::Diagonal,    Family::BorelSL2,
    Family::BorelFull, Family::NPlus,     Family::NMinus,      Family::TildeNPlus,
    Family::NPlusC,   Family::VLine,      Family::HeisLine,    Family::NPlusSemiR2,
    Family::NPlusSemiV0, Family::WSlant,  Family::Translations2};

std::string_view family_name(Family f);
std::optional<Family> family_from_name(std::string_view name);

/// Dimension of the identity component.
int identity_dimension(Family f);
/// Number of connected components (2 for TildeNPlus, 1 otherwise).
int component_count(Family f);
/// Number of real parameters the family carries (0..3).
int parameter_count(Family f);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A family, its parameters and an outer conjugator h; the subgroup denoted is
/// h F h^-1.  Build through the named constructors, which validate and store
/// HeisLine in projective form (first nonzero coordinate scaled to +1).
struct SubgroupDescriptor {
  Family family = Family::Translations2;
  std::array<double, 3> params{};
  Element conjugator;

  static SubgroupDescriptor make(Family f, std::array<double, 3> params = {},
                                 const Element& conjugator = Element::identity());

  static SubgroupDescriptor levi() { return make(Family::Levi); }
  static SubgroupDescriptor max_compact() { return make(Family::MaxCompact); }
  static SubgroupDescriptor diagonal() { return make(Family::Diagonal); }
  static SubgroupDescriptor borel_sl2() { return make(Family::BorelSL2); }
  static SubgroupDescriptor borel_full() { return make(Family::BorelFull); }
  static SubgroupDescriptor n_plus() { return make(Family::NPlus); }
  static SubgroupDescriptor n_minus() { return make(Family::NMinus); }
  static SubgroupDescriptor tilde_n_plus() { return make(Family::TildeNPlus); }
  static SubgroupDescriptor n_plus_c(double c) { return make(Family::NPlusC, {c, 0, 0}); }
  static SubgroupDescriptor v_line(double c) { return make(Family::VLine, {c, 0, 0}); }
  static SubgroupDescriptor heis_line(double a, double b, double c) {
    return make(Family::HeisLine, {a, b, c});
  }
  static SubgroupDescriptor n_plus_semi_r2() { return make(Family::NPlusSemiR2); }
  static SubgroupDescriptor n_plus_semi_v0() { return make(Family::NPlusSemiV0); }
  static SubgroupDescriptor w_slant(double c) { return make(Family::WSlant, {c, 0, 0}); }
  static SubgroupDescriptor translations2() { return make(Family::Translations2); }

  [[nodiscard]] std::string to_string() const;
};

/// True iff conjugator^-1 x conjugator lies within tol of the family.
bool membership(const SubgroupDescriptor& d, const Element& x, double tol);

/// A point of the family in base coordinates (before conjugation) closest to x.
Element nearest_base_point(const SubgroupDescriptor& d, const Element& x);

/// Finite eps-net of H n B_R, stored column-wise in embedded coordinates.
struct PointCloud {
  Eigen::Matrix<double, 6, Eigen::Dynamic> coords;
  double radius = 0;
  double mesh = 0;
  SubgroupDescriptor source;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(coords.cols()); }
  [[nodiscard]] bool empty() const { return coords.cols() == 0; }
  [[nodiscard]] Element point(std::size_t i) const {
    return unembed<double>(coords.col(static_cast<Eigen::Index>(i)));
  }
  [[nodiscard]] std::vector<Element> points() const;
};

/// Hard cap on emitted net points; sample_ball throws beyond it.
inline constexpr std::size_t kMaxNetPoints = 6'000'000;

/// eps-net of d n B_R: every element h with dist(h, id) <= R - eps has a
/// sampled point within 2 eps, every sample lies in the subgroup and within
/// R + eps of the identity.  Curves are covered at radius eps / 4, surfaces at
/// eps / 2 and higher-dimensional families at 1.5 eps.  Requires R in [1, 20],
/// eps in [0.01, 0.5].
PointCloud sample_ball(const SubgroupDescriptor& d, double R, double eps);

/// Orthonormal basis of the Lie algebra of the identity component.
std::vector<Lie> lie_algebra(const SubgroupDescriptor& d);

/// Rewrites HeisLine into NPlusC / VLine where they coincide as sets and
/// drops conjugator factors that normalize the family.  Writing the SL2 part
/// as k b with k a rotation and b upper triangular, b is dropped for the
/// B-normalized families (B, B x| R^2, N+ x| R^2, N+ x| {(t,0)}, N+, NPlusC,
/// TildeNPlus), NPlusC absorbs b and the translation into its parameter
/// (NPlusC(0) is N+), Levi keeps only the translation, R^2 drops everything
/// and VLine absorbs its conjugator into the slope.  Signed zeros are
/// normalized.  Idempotent up to rounding.
SubgroupDescriptor canonicalize(const SubgroupDescriptor& d);

/// The closure constraint "r1 = 1 or r3 = 1 or r1 = 0 and r2 = 1" on
/// V_(r1,r2,r3), read with `and` binding tighter or strictly left to right,
/// each checked on some representative of the projective class of (a,b,c)
/// with coordinates compared at tolerance tol.
struct HeisConstraint {
  bool and_first = false;     // r1 = 1 or r3 = 1 or (r1 = 0 and r2 = 1)
  bool left_to_right = false; // (r1 = 1 or r3 = 1 or r1 = 0) and r2 = 1
};
HeisConstraint heis_constraint(double a, double b, double c, double tol = 1e-3);

/// Same family, conjugator replaced by h * conjugator.
SubgroupDescriptor conjugate_descriptor(const SubgroupDescriptor& d, const Element& h);

nlohmann::json to_json(const SubgroupDescriptor& d);
SubgroupDescriptor descriptor_from_json(const nlohmann::json& j);

nlohmann::json element_to_json(const Element& a);
Element element_from_json(const nlohmann::json& j);

}  // namespace chabauty
