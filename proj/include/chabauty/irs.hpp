#pragma once

// Monte-Carlo invariant random subgroups: empirical measures on Sub_G, an
// energy-distance test of conjugation invariance, and the escape of Levi
// conjugates towards N+ x| R^2.
//
// Two ambient groups appear.  Measures on Sub(SL(2,R) x| R^2) use catalog
// descriptors.  Measures on Sub(SO(3) x| R^3) support only R^3 and the axial
// subgroups SO(2)_u x| R^3 (rotations about the line u, all translations).

#include "chabauty/metric.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace chabauty {

using Mat3d = Eigen::Matrix3d;
using Vec3d = Eigen::Vector3d;

/// Closed subgroup of SO(3) x| R^3 containing R^3: R^3 itself or
/// SO(2)_axis x| R^3.  The axis is a unit vector, defined up to sign.
struct Subgroup3 {
  enum class Kind { Translations, Axial };
  Kind kind = Kind::Translations;
  Vec3d axis = Vec3d::UnitZ();

  static Subgroup3 translations() { return {}; }
  static Subgroup3 axial(const Vec3d& u);
};

/// g H g^-1 for g = (A, w) with A in O(3): the axial line moves to A u and
/// translations normalize both kinds.
Subgroup3 conjugate(const Subgroup3& h, const AffineElement& g);

using Atom = std::variant<SubgroupDescriptor, Subgroup3>;

struct EmpiricalMeasure {
  std::vector<Atom> atoms;
  std::vector<double> weights;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless weights are nonnegative, sum to 1
  /// within 1e-12 and match the atoms in number, and all atoms live in the
  /// same ambient group.
  void validate() const;
};

enum class HaarGroup { SO2, O2, SO3 };

/// count independent Haar elements of SO(3) x| R^3 with zero translation,
/// orthonormalizing Gaussian matrices.  SO2
/// and O2 are the rotations about the z-axis and their normalizer
/// {diag(A, det A) : A in O(2)} in SO(3).  Stream 0 of seed.
std::vector<AffineElement> haar_sample(HaarGroup g, int count, std::uint64_t seed);

/// Rotation angle in [0, 2 pi) of an element of SO2 as sampled above.
double planar_angle(const AffineElement& g);

/// Uniform measure on the atoms g_i H g_i^-1.
EmpiricalMeasure orbit_pushforward(const SubgroupDescriptor& base, const std::vector<Element>& samples,
                                   std::uint64_t seed = 0);
EmpiricalMeasure orbit_pushforward(const Subgroup3& base, const std::vector<AffineElement>& samples,
                                   std::uint64_t seed = 0);

/// Chabauty distance between two d = 3 atoms.  Both contain R^3, so the
/// padded Hausdorff distance of their B_R-clouds in R^12 equals the one of
/// their rotation parts in R^9, which depends only on the angle between the
/// axes; it is tabulated once per configuration and interpolated.
double chabauty_dist(const Subgroup3& a, const Subgroup3& b, const MetricConfig& cfg);

/// Energy distance between the atoms {H_i} and {g_i H_i g_i^-1} under
/// chabauty_dist.  The conjugators are used cyclically.
double invariance_statistic(const EmpiricalMeasure& m, const std::vector<Element>& conjugators,
                            const MetricConfig& cfg);
double invariance_statistic(const EmpiricalMeasure& m, const std::vector<AffineElement>& conjugators,
                            const MetricConfig& cfg);

struct InvarianceReport {
  double statistic = 0;
  double threshold = 0;  // 95% quantile of the statistic under label permutation
  bool pass = false;     // statistic <= threshold
  std::uint64_t seed = 0;
  int permutations = 0;
  MetricConfig config;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// invariance_statistic plus its permutation quantile.  Permutations are
/// drawn from stream 1 of the measure seed.
InvarianceReport invariance_test(const EmpiricalMeasure& m, const std::vector<Element>& conjugators,
                                 const MetricConfig& cfg, int permutations = 999);
InvarianceReport invariance_test(const EmpiricalMeasure& m, const std::vector<AffineElement>& conjugators,
                                 const MetricConfig& cfg, int permutations = 999);

/// Metric used for the Monte-Carlo suite: R = 2, eps = 0.25, pad 64.
MetricConfig irs_metric();

/// Haar pushforward of SO(2) x| R^3 with Haar SO(3) conjugators.
InvarianceReport so3_example(int atoms, std::uint64_t seed, const MetricConfig& cfg = irs_metric());

/// Uniform measure on (I,(k,0)) L (I,(k,0))^-1, k = 1..atoms, against
/// translation conjugators (I,t), t uniform in [-window, window]^2.
InvarianceReport levi_orbit(int atoms, double window, std::uint64_t seed, const MetricConfig& cfg = irs_metric());

/// Dirac mass at R^2 in SL(2,R) x| R^2 tested against random conjugators.
InvarianceReport dirac_plane(int atoms, std::uint64_t seed, const MetricConfig& cfg = irs_metric());
/// Dirac mass at R^3 in SO(3) x| R^3 tested against Haar conjugators.
InvarianceReport dirac_space(int atoms, std::uint64_t seed, const MetricConfig& cfg = irs_metric());

/// Distance from (I,v) L (I,v)^-1 to the nearest conjugate k(theta) (N+ x| R^2) k(theta)^-1.
/// For v = 0 the reference is L itself.
double levi_escape_distance(const Vec2<double>& v, const MetricConfig& cfg);

/// Median of levi_escape_distance over `draws` points v uniform in [-T, T]^2.
/// T = 0 returns the distance of L to itself.
double levi_escape_demo(double T, const MetricConfig& cfg = irs_metric(), int draws = 15,
                        std::uint64_t seed = 1);

}  // namespace chabauty
