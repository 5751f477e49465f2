#include "chabauty/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace chabauty {

namespace {

constexpr double kPi = std::numbers::pi;

struct FamilyInfo {
  Family family;
  std::string_view name;
  int dim;
  int components;
  int params;
};

constexpr std::array<FamilyInfo, 15> kInfo = {{
    {Family::Levi, "Levi", 3, 1, 0},
    {Family::MaxCompact, "MaxCompact", 1, 1, 0},
    {Family::Diagonal, "Diagonal", 1, 1, 0},
    {Family::BorelSL2, "BorelSL2", 2, 1, 0},
    {Family::BorelFull, "BorelFull", 4, 1, 0},
    {Family::NPlus, "NPlus", 1, 1, 0},
    {Family::NMinus, "NMinus", 1, 1, 0},
    {Family::TildeNPlus, "TildeNPlus", 1, 2, 0},
    {Family::NPlusC, "NPlusC", 1, 1, 1},
    {Family::VLine, "VLine", 1, 1, 1},
    {Family::HeisLine, "HeisLine", 1, 1, 3},
    {Family::NPlusSemiR2, "NPlusSemiR2", 3, 1, 0},
    {Family::NPlusSemiV0, "NPlusSemiV0", 2, 1, 0},
    {Family::WSlant, "WSlant", 2, 1, 1},
    {Family::Translations2, "Translations2", 2, 1, 0},
}};

const FamilyInfo& info(Family f) {
  for (const auto& i : kInfo)
    if (i.family == f) return i;
  throw std::logic_error("unknown family");
}

double clean_zero(double x) { return x == 0.0 ? 0.0 : x; }

Vec2<double> vline_direction(double c) {
  if (std::isinf(c)) return {0.0, 1.0};
  return Vec2<double>(1.0, c).normalized();
}

/// Least-squares a > 0 with diag(a, 1/a) closest to diag(p, q).
double fit_diagonal(double p, double q) {
  double a = (p > 0 && q > 0) ? std::sqrt(p / q) : std::max(p, 1e-6);
  if (!(a > 0)) a = 1.0;
  for (int it = 0; it < 30; ++it) {
    // f(a) = (a-p)^2 + (1/a-q)^2
    const double g = 2 * (a - p) - 2 * (1 / a - q) / (a * a);
    const double h = 2 + 2 * (3 / (a * a * a * a) - 2 * q / (a * a * a));
    const double step = h > 0 ? g / h : g * 0.1;
    double next = a - step;
    if (next <= 0) next = a / 2;
    if (std::abs(next - a) < 1e-15 * a) break;
    a = next;
  }
  return a;
}

}  // namespace

std::string_view family_name(Family f) { return info(f).name; }

std::optional<Family> family_from_name(std::string_view name) {
  for (const auto& i : kInfo)
    if (i.name == name) return i.family;
  return std::nullopt;
}

int identity_dimension(Family f) { return info(f).dim; }
int component_count(Family f) { return info(f).components; }
int parameter_count(Family f) { return info(f).params; }

SubgroupDescriptor SubgroupDescriptor::make(Family f, std::array<double, 3> params,
                                            const Element& conjugator) {
  if (!is_valid(conjugator, 1e-6)) throw std::invalid_argument("conjugator is not in G");
  SubgroupDescriptor d;
  d.family = f;
  d.conjugator = conjugator;
  const int np = parameter_count(f);
  for (int i = np; i < 3; ++i) params[static_cast<std::size_t>(i)] = 0.0;
  for (int i = 0; i < np; ++i) {
    const double p = params[static_cast<std::size_t>(i)];
    const bool inf_ok = f == Family::VLine;
    if (std::isnan(p) || (std::isinf(p) && !inf_ok))
      throw std::invalid_argument("descriptor parameter is not finite");
  }
  if (f == Family::VLine && std::isinf(params[0])) params[0] = kInfinity;
  if (f == Family::WSlant && params[0] == 0.0)
    throw std::invalid_argument("WSlant requires c != 0 (c = 0 is NPlusSemiV0)");
  if (f == Family::HeisLine) {
    auto it = std::find_if(params.begin(), params.end(), [](double x) { return x != 0.0; });
    if (it == params.end()) throw std::invalid_argument("HeisLine requires (a,b,c) != 0");
    const double lead = *it;
    for (auto& p : params) p = clean_zero(p / lead);
  }
  for (auto& p : params) p = clean_zero(p);
  d.params = params;
  return d;
}

std::string SubgroupDescriptor::to_string() const {
  std::ostringstream os;
  os << family_name(family);
  const int np = parameter_count(family);
  if (np > 0) {
    os << '(';
    for (int i = 0; i < np; ++i) os << (i ? "," : "") << params[static_cast<std::size_t>(i)];
    os << ')';
  }
  const auto& c = conjugator;
  if (!c.sl2.isIdentity(1e-12) || !c.trans.isZero(1e-12)) {
    os << " conj [[" << c.sl2(0, 0) << ',' << c.sl2(0, 1) << "],[" << c.sl2(1, 0) << ','
       << c.sl2(1, 1) << "]] + (" << c.trans(0) << ',' << c.trans(1) << ')';
  }
  return os.str();
}

Element nearest_base_point(const SubgroupDescriptor& d, const Element& x) {
  const Mat2<double>& g = x.sl2;
  const Vec2<double>& v = x.trans;
  const double c = d.params[0];
  switch (d.family) {
    case Family::Levi: {
      const double det = g.determinant();
      if (det <= 0) return Element::identity();
      return Element::linear(g / std::sqrt(det));
    }
    case Family::MaxCompact:
      return Element::linear(rotation(std::atan2(g(0, 1) - g(1, 0), g(0, 0) + g(1, 1))));
    case Family::Diagonal:
      return Element::linear(diagonal(fit_diagonal(g(0, 0), g(1, 1))));
    case Family::BorelSL2:
    case Family::BorelFull: {
      Mat2<double> b = diagonal(fit_diagonal(g(0, 0), g(1, 1)));
      b(0, 1) = g(0, 1);
      return {b, d.family == Family::BorelFull ? v : Vec2<double>::Zero()};
    }
    case Family::NPlus:
      return Element::linear(upper_unipotent(g(0, 1)));
    case Family::NMinus:
      return Element::linear(lower_unipotent(g(1, 0)));
    case Family::TildeNPlus: {
      const double sign = (g(0, 0) + g(1, 1)) >= 0 ? 1.0 : -1.0;
      return Element::linear(sign * upper_unipotent(sign * g(0, 1)));
    }
    case Family::NPlusC: {
      const double s = (g(0, 1) + c * v(0)) / (1 + c * c);
      return {upper_unipotent(s), Vec2<double>(c * s, 0)};
    }
    case Family::VLine: {
      const Vec2<double> u = vline_direction(c);
      return {Mat2<double>::Identity(), u * u.dot(v)};
    }
    case Family::HeisLine: {
      const double a = d.params[0], b = d.params[1], cc = d.params[2];
      auto at = [&](double t) {
        return Element{upper_unipotent(a * t), Vec2<double>(cc * t + a * b * t * t / 2, b * t)};
      };
      const double den = a * a + b * b;
      double t = den > 0 ? (a * g(0, 1) + b * v(1)) / den : v(0) / cc;
      // Gauss-Newton on the full embedded residual.
      for (int it = 0; it < 20; ++it) {
        const Embedded<double> r = embed(at(t)) - embed(x);
        Embedded<double> dr;
        dr << 0, a, 0, 0, cc + a * b * t, b;
        const double nrm = dr.squaredNorm();
        if (nrm == 0) break;
        const double step = dr.dot(r) / nrm;
        t -= step;
        if (std::abs(step) < 1e-14 * (1 + std::abs(t))) break;
      }
      return at(t);
    }
    case Family::NPlusSemiR2:
      return {upper_unipotent(g(0, 1)), v};
    case Family::NPlusSemiV0:
      return {upper_unipotent(g(0, 1)), Vec2<double>(v(0), 0)};
    case Family::WSlant: {
      const double s = (g(0, 1) - c * v(1)) / (1 + c * c);
      return {upper_unipotent(s), Vec2<double>(v(0), -c * s)};
    }
    case Family::Translations2:
      return {Mat2<double>::Identity(), v};
  }
  throw std::logic_error("unhandled family");
}

bool membership(const SubgroupDescriptor& d, const Element& x, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("membership: tol must be positive");
  const Element base = conj(inv(d.conjugator), x);
  return dist(base, nearest_base_point(d, base)) <= tol;
}

std::vector<Element> PointCloud::points() const {
  std::vector<Element> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(point(i));
  return out;
}

// ---------------------------------------------------------------------------
// eps-net sampler
//
// Each family is a union of charts p -> x(p) over a parameter box.  The
// conjugated chart p -> h x(p) h^-1 is affine in the embedded coordinates of
// x(p), so it is a 6x6 linear map plus offset.  The parameter box is
// re-coordinatized by the QR factor of the chart Jacobian at p = 0 (which
// aligns thin directions created by large conjugators with the axes), then
// recursively split along the axis of largest image extent until each box
// image has radius <= eps.  Boxes whose image provably misses B_{R+eps} are
// dropped.

namespace {

constexpr int kMaxChartDim = 4;

struct Chart {
  int k = 0;
  bool whiten = true;
  bool linear = false;  // base is affine in the parameters
  std::array<double, kMaxChartDim> lo{}, hi{};
  std::function<Embedded<double>(const double*)> base;
  // Optional: true when no point of the parameter box [plo, phi] can be emitted.
  std::function<bool(const double* plo, const double* phi)> reject;
  // Optional: parameter axis that must be split first, or -1.
  std::function<int(const double* plo, const double* phi)> forced_axis;
  // Optional: whether a base point belongs to this chart of an atlas, allowing
  // the given slack in base coordinates.
  std::function<bool(const Embedded<double>& x, double slack)> owns;
};

Embedded<double> embed_parts(const Mat2<double>& g, double x, double y) {
  Embedded<double> p;
  p << g(0, 0), g(0, 1), g(1, 0), g(1, 1), x, y;
  return p;
}

/// h = k b with k a rotation and b upper triangular with positive diagonal.
std::pair<Mat2<double>, Mat2<double>> rotation_factor(const Mat2<double>& h) {
  const Vec2<double> e = h.col(0).normalized();
  Mat2<double> k;
  k << e(0), -e(1), e(1), e(0);
  Mat2<double> b = k.transpose() * h;
  b(1, 0) = 0;
  return {k, b};
}

/// Conjugator with the same conjugate set but smaller distortion, for a
/// canonical descriptor.
Element effective_conjugator(const SubgroupDescriptor& d) {
  const Element& h = d.conjugator;
  switch (d.family) {
    case Family::Levi: {
      // (g, w) L (g, w)^-1 = (Q, w) L (Q, w)^-1 for any rotation Q; pick Q
      // sending e1 to w so the thin directions are Iwasawa axes.
      const double phi = h.trans.norm() > 0 ? std::atan2(h.trans(1), h.trans(0)) : 0.0;
      return {rotation(-phi), h.trans};
    }
    default:
      return h;
  }
}

std::vector<Chart> charts_for(const SubgroupDescriptor& d, const Element& h, double R, double eps) {
  const double reach = R + eps;
  const double sigma1 = Eigen::JacobiSVD<Mat2<double>>(h.sl2).singularValues()(0);
  const double cond = sigma1 * sigma1;  // det = 1
  const double m = cond * reach + std::sqrt(2.0);
  const double tau = sigma1 * reach * (1 + h.trans.norm());
  const double lnm = std::log(m);
  const double c = d.params[0];

  std::vector<Chart> out;
  auto add = [&](int k, std::array<double, kMaxChartDim> lo, std::array<double, kMaxChartDim> hi,
                 std::function<Embedded<double>(const double*)> f) {
    out.push_back(Chart{k, true, false, lo, hi, std::move(f), {}, {}, {}});
  };

  switch (d.family) {
    case Family::Levi: {
      if (h.trans.norm() >= 3) {
        // Far translations squeeze L into a thin slab that whitened Iwasawa
        // coordinates follow well.
        add(3, {-kPi, -lnm, -m * m}, {kPi, lnm, m * m},
            [](const double* p) { return embed_parts(iwasawa(p[0], p[1], p[2]), 0, 0); });
        break;
      }
      // Atlas of graph charts of det = 1 over three of the four entries of g;
      // chart j solves for entry j and owns the points where the cofactor of
      // entry j is largest in modulus.
      const double rho = cond * reach;
      static constexpr std::array<int, 4> partner = {3, 2, 1, 0};
      for (int j = 0; j < 4; ++j) {
        std::array<int, 3> free{};
        for (int i = 0, n = 0; i < 4; ++i)
          if (i != j) free[static_cast<std::size_t>(n++)] = i;
        std::array<double, kMaxChartDim> lo{}, hi{};
        for (int n = 0; n < 3; ++n) {
          const double id = (free[static_cast<std::size_t>(n)] % 3 == 0) ? 1.0 : 0.0;
          lo[static_cast<std::size_t>(n)] = id - rho;
          hi[static_cast<std::size_t>(n)] = id + rho;
        }
        const int cof = partner[static_cast<std::size_t>(j)];
        const int cof_slot = static_cast<int>(std::find(free.begin(), free.end(), cof) - free.begin());
        add(3, lo, hi, [j, free](const double* p) {
          std::array<double, 4> g{};
          for (int n = 0; n < 3; ++n) g[static_cast<std::size_t>(free[static_cast<std::size_t>(n)])] = p[n];
          // g00 g11 - g01 g10 = 1 is affine in each entry.
          switch (j) {
            case 0: g[0] = (1 + g[1] * g[2]) / g[3]; break;
            case 3: g[3] = (1 + g[1] * g[2]) / g[0]; break;
            case 1: g[1] = (g[0] * g[3] - 1) / g[2]; break;
            default: g[2] = (g[0] * g[3] - 1) / g[1]; break;
          }
          Embedded<double> e;
          e << g[0], g[1], g[2], g[3], 0, 0;
          return e;
        });
        Chart& ch = out.back();
        ch.whiten = false;
        // Owned points satisfy |cofactor| >= |g|_F / 2 >= 1 / sqrt(2).
        const double slack = 4 * eps;  // twice the leaf radius
        ch.reject = [cof_slot, slack](const double* plo, const double* phi) {
          if (plo[cof_slot] > -0.3 && phi[cof_slot] < 0.3) return true;
          auto lower = [&](int i) { return plo[i] > 0 ? plo[i] : (phi[i] < 0 ? -phi[i] : 0.0); };
          const double mine = std::max(std::abs(plo[cof_slot]), std::abs(phi[cof_slot]));
          for (int i = 0; i < 3; ++i)
            if (i != cof_slot && lower(i) > mine + slack) return true;
          return false;
        };
        // Split the cofactor axis first while the box touches the singular set.
        ch.forced_axis = [cof_slot](const double* plo, const double* phi) {
          return (plo[cof_slot] < 0.3 && phi[cof_slot] > -0.3) ? cof_slot : -1;
        };
        ch.owns = [j](const Embedded<double>& x, double slack) {
          const double mine = std::abs(x(partner[static_cast<std::size_t>(j)]));
          const double top = x.head<4>().cwiseAbs().maxCoeff();
          return mine + slack >= top;
        };
      }
      break;
    }
    case Family::MaxCompact:
      add(1, {-kPi}, {kPi}, [](const double* p) { return embed_parts(rotation(p[0]), 0, 0); });
      break;
    case Family::Diagonal:
      add(1, {-lnm}, {lnm},
          [](const double* p) { return embed_parts(diagonal(std::exp(p[0])), 0, 0); });
      break;
    case Family::BorelSL2:
      add(2, {-lnm, -m}, {lnm, m}, [](const double* p) {
        Mat2<double> b = diagonal(std::exp(p[0]));
        b(0, 1) = p[1];
        return embed_parts(b, 0, 0);
      });
      break;
    case Family::BorelFull:
      add(4, {-lnm, -m, -tau, -tau}, {lnm, m, tau, tau}, [](const double* p) {
        Mat2<double> b = diagonal(std::exp(p[0]));
        b(0, 1) = p[1];
        return embed_parts(b, p[2], p[3]);
      });
      break;
    case Family::NPlus:
      add(1, {-m}, {m}, [](const double* p) { return embed_parts(upper_unipotent(p[0]), 0, 0); });
      break;
    case Family::NMinus:
      add(1, {-m}, {m}, [](const double* p) { return embed_parts(lower_unipotent(p[0]), 0, 0); });
      break;
    case Family::TildeNPlus:
      for (double sign : {1.0, -1.0})
        add(1, {-m}, {m}, [sign](const double* p) {
          return embed_parts(Mat2<double>(sign * upper_unipotent(p[0])), 0, 0);
        });
      break;
    case Family::NPlusC:
      add(1, {-m}, {m},
          [c](const double* p) { return embed_parts(upper_unipotent(p[0]), c * p[0], 0); });
      break;
    case Family::VLine: {
      const Vec2<double> u = vline_direction(c);
      add(1, {-tau}, {tau}, [u](const double* p) {
        return embed_parts(Mat2<double>::Identity(), u(0) * p[0], u(1) * p[0]);
      });
      break;
    }
    case Family::HeisLine: {
      const double a = d.params[0], b = d.params[1], cc = d.params[2];
      double tmax = kInfinity;
      if (a != 0) tmax = std::min(tmax, m / std::abs(a));
      if (b != 0) tmax = std::min(tmax, tau / std::abs(b));
      if (a == 0 || b == 0) tmax = std::min(tmax, tau / std::max(std::abs(cc), 1e-300));
      add(1, {-tmax}, {tmax}, [a, b, cc](const double* p) {
        const double t = p[0];
        return embed_parts(upper_unipotent(a * t), cc * t + a * b * t * t / 2, b * t);
      });
      break;
    }
    case Family::NPlusSemiR2:
      add(3, {-m, -tau, -tau}, {m, tau, tau},
          [](const double* p) { return embed_parts(upper_unipotent(p[0]), p[1], p[2]); });
      break;
    case Family::NPlusSemiV0:
      add(2, {-m, -tau}, {m, tau},
          [](const double* p) { return embed_parts(upper_unipotent(p[0]), p[1], 0); });
      break;
    case Family::WSlant: {
      const double smax = std::min(m, tau / std::abs(c));
      add(2, {-smax, -tau}, {smax, tau},
          [c](const double* p) { return embed_parts(upper_unipotent(p[0]), p[1], -c * p[0]); });
      break;
    }
    case Family::Translations2:
      add(2, {-tau, -tau}, {tau, tau},
          [](const double* p) { return embed_parts(Mat2<double>::Identity(), p[0], p[1]); });
      break;
  }
  switch (d.family) {
    case Family::NPlus:
    case Family::NMinus:
    case Family::TildeNPlus:
    case Family::NPlusC:
    case Family::VLine:
    case Family::NPlusSemiR2:
    case Family::NPlusSemiV0:
    case Family::WSlant:
    case Family::Translations2:
      for (auto& ch : out) ch.linear = true;
      break;
    case Family::HeisLine:
      for (auto& ch : out) ch.linear = d.params[0] == 0;
      break;
    default: break;
  }
  return out;
}

/// The affine map x -> embed(h x h^-1) on embedded coordinates.
struct ConjugationMap {
  Eigen::Matrix<double, 6, 6> L;
  Embedded<double> b;

  explicit ConjugationMap(const Element& h) {
    auto f = [&](const Embedded<double>& e) {
      const Element x = unembed<double>(e);
      const Mat2<double> hi = h.sl2.inverse();
      const Mat2<double> g = h.sl2 * x.sl2 * hi;
      return embed<double>(Element{g, h.trans + h.sl2 * x.trans - g * h.trans});
    };
    b = f(Embedded<double>::Zero());
    for (int i = 0; i < 6; ++i) L.col(i) = f(Embedded<double>::Unit(i)) - b;
  }

  Embedded<double> operator()(const Embedded<double>& e) const { return L * e + b; }
};

class NetBuilder {
 public:
  NetBuilder(const Chart& chart, const ConjugationMap& map, double R, double eps,
             std::vector<Embedded<double>>& out)
      : chart_(chart), map_(map), reach_(R + eps), leaf_(chart.k >= 3 ? 1.5 * eps : (chart.k == 2 ? 0.5 * eps : 0.25 * eps)), out_(out) {
    k_ = chart.k;
    identity_ << 1, 0, 0, 1, 0, 0;
    whiten();
  }

  void run() {
    constexpr int kInitialSplits = 8;
    Box root;
    for (int i = 0; i < k_; ++i) {
      double lo = 0, hi = 0;
      for (int j = 0; j < k_; ++j) {
        const double a = T_(i, j) * chart_.lo[j], b = T_(i, j) * chart_.hi[j];
        lo += std::min(a, b);
        hi += std::max(a, b);
      }
      if (isometric_) {
        // The image of y is base(0) + Q y with Q orthonormal, so only |y| <= reach + |base(0) - id|
        // can land in the ball.  Without this cut a huge range loses the resolution of the seeds.
        const double cut = 1.01 * (reach_ + (map_(chart_.base(std::array<double, kMaxChartDim>{}.data())) - identity_).norm()) + leaf_;
        lo = std::max(lo, -cut);
        hi = std::min(hi, cut);
        if (!(lo < hi)) return;
      }
      root.center[i] = 0.5 * (lo + hi);
      root.half[i] = 0.5 * (hi - lo) / kInitialSplits;
    }
    // Seed grid of kInitialSplits^k boxes, cut by repeated halving so that
    // neighbouring seeds share their faces exactly.
    std::vector<Box> seeds{root};
    for (int i = 0; i < k_; ++i) {
      for (auto& s : seeds) s.half[i] = root.half[i] * kInitialSplits;
      for (int level = 1; level < kInitialSplits; level *= 2) {
        std::vector<Box> next;
        next.reserve(2 * seeds.size());
        for (const Box& s : seeds) {
          Box lo = s, hi = s;
          lo.half[i] = hi.half[i] = s.half[i] / 2;
          lo.center[i] = s.center[i] - s.half[i] / 2;
          hi.center[i] = s.center[i] + s.half[i] / 2;
          next.push_back(lo);
          next.push_back(hi);
        }
        seeds = std::move(next);
      }
    }
    stack_ = std::move(seeds);
    while (!stack_.empty()) {
      Box b = stack_.back();
      stack_.pop_back();
      process(b);
    }
  }

 private:
  struct Box {
    std::array<double, kMaxChartDim> center{}, half{};
    int depth = 0;
  };

  void whiten() {
    // Jacobian of the conjugated chart at p = 0.
    Eigen::MatrixXd J(6, k_);
    std::array<double, kMaxChartDim> p{};
    for (int j = 0; j < k_; ++j) {
      const double h = 1e-6;
      p.fill(0);
      p[j] = h;
      const Embedded<double> plus = map_(chart_.base(p.data()));
      p[j] = -h;
      const Embedded<double> minus = map_(chart_.base(p.data()));
      J.col(j) = (plus - minus) / (2 * h);
    }
    if (!chart_.whiten) {
      T_ = Eigen::MatrixXd::Identity(k_, k_);
      Tinv_ = T_;
      return;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(J);
    Eigen::MatrixXd Rm = qr.matrixQR().topRows(k_).triangularView<Eigen::Upper>();
    for (int i = 0; i < k_; ++i)
      if (Rm(i, i) < 0) Rm.row(i) *= -1;
    const double dmax = Rm.diagonal().cwiseAbs().maxCoeff();
    const double dmin = Rm.diagonal().cwiseAbs().minCoeff();
    const bool qr_ok = dmin > 1e-10 * dmax && dmax > 0;
    if (!qr_ok) {
      Rm = Eigen::MatrixXd::Zero(k_, k_);
      for (int i = 0; i < k_; ++i) Rm(i, i) = std::max(J.col(i).norm(), 1e-6);
    }
    T_ = Rm;
    Tinv_ = Rm.inverse();
    isometric_ = chart_.linear && qr_ok;
  }

  Embedded<double> base_at(const std::array<double, kMaxChartDim>& u) const {
    std::array<double, kMaxChartDim> p{};
    for (int j = 0; j < k_; ++j) {
      double s = 0;
      for (int i = 0; i < k_; ++i) s += Tinv_(j, i) * u[i];
      p[j] = s;
    }
    return chart_.base(p.data());
  }

  /// Parameter interval test: false when the box lies outside the chart range.
  [[nodiscard]] bool intersects_range(const Box& b, bool center_only) const {
    for (int j = 0; j < k_; ++j) {
      double c = 0, r = 0;
      for (int i = 0; i < k_; ++i) {
        c += Tinv_(j, i) * b.center[i];
        r += std::abs(Tinv_(j, i)) * b.half[i];
      }
      if (center_only) r = 0;
      if (c + r < chart_.lo[j] || c - r > chart_.hi[j]) return false;
    }
    return true;
  }

  void process(const Box& b) {
    if (!intersects_range(b, false)) return;
    std::array<double, kMaxChartDim> plo{}, phi{};
    if (chart_.reject || chart_.forced_axis) {
      for (int j = 0; j < k_; ++j) {
        double c = 0, r = 0;
        for (int i = 0; i < k_; ++i) {
          c += Tinv_(j, i) * b.center[i];
          r += std::abs(Tinv_(j, i)) * b.half[i];
        }
        plo[j] = c - r;
        phi[j] = c + r;
      }
      if (chart_.reject && chart_.reject(plo.data(), phi.data())) return;
    }
    const Embedded<double> mid_base = base_at(b.center);
    const Embedded<double> mid = map_(mid_base);
    const int ncorner = 1 << k_;
    std::array<Embedded<double>, 1 << kMaxChartDim> corner;
    double rad = 0, base_rad = 0;
    for (int c = 0; c < ncorner; ++c) {
      std::array<double, kMaxChartDim> u = b.center;
      for (int i = 0; i < k_; ++i) u[i] += ((c >> i) & 1) ? b.half[i] : -b.half[i];
      const Embedded<double> cb = base_at(u);
      base_rad = std::max(base_rad, (cb - mid_base).norm());
      corner[c] = map_(cb);
      rad = std::max(rad, (corner[c] - mid).norm());
    }
    if (!std::isfinite(rad)) rad = std::numeric_limits<double>::infinity();
    const double dmid = (mid - identity_).norm();
    if (dmid - 1.5 * rad > reach_) return;
    if (rad <= leaf_ || b.depth > 200) {
      if (dmid <= reach_ && intersects_range(b, true) &&
          (!chart_.owns || chart_.owns(mid_base, 2 * base_rad))) {
        out_.push_back(mid);
        if (out_.size() > kMaxNetPoints)
          throw std::runtime_error("sample_ball: net exceeds point budget; use a coarser mesh");
      }
      return;
    }
    const int forced = chart_.forced_axis ? chart_.forced_axis(plo.data(), phi.data()) : -1;
    int axis = 0;
    double best = -1;
    for (int i = 0; i < k_ && forced < 0; ++i) {
      double ext = 0;
      for (int c = 0; c < ncorner; ++c)
        if (!((c >> i) & 1)) ext = std::max(ext, (corner[c | (1 << i)] - corner[c]).norm());
      if (ext > best || std::isnan(ext)) {
        best = ext;
        axis = i;
      }
    }
    if (forced >= 0) axis = forced;
    Box lo = b, hi = b;
    lo.half[axis] = hi.half[axis] = b.half[axis] / 2;
    lo.center[axis] = b.center[axis] - b.half[axis] / 2;
    hi.center[axis] = b.center[axis] + b.half[axis] / 2;
    lo.depth = hi.depth = b.depth + 1;
    stack_.push_back(lo);
    stack_.push_back(hi);
  }

  const Chart& chart_;
  const ConjugationMap& map_;
  double reach_;
  double leaf_;
  std::vector<Embedded<double>>& out_;
  int k_ = 0;
  Embedded<double> identity_;
  Eigen::MatrixXd T_, Tinv_;
  bool isometric_ = false;
  std::vector<Box> stack_;
};

}  // namespace

PointCloud sample_ball(const SubgroupDescriptor& d, double R, double eps) {
  if (!(R >= 1 && R <= 20)) throw std::invalid_argument("sample_ball: R must lie in [1, 20]");
  if (!(eps >= 0.01 && eps <= 0.5))
    throw std::invalid_argument("sample_ball: eps must lie in [0.01, 0.5]");
  const SubgroupDescriptor canon = canonicalize(d);
  const Element h = effective_conjugator(canon);
  const ConjugationMap map(h);
  std::vector<Embedded<double>> pts;
  for (const Chart& chart : charts_for(canon, h, R, eps)) {
    NetBuilder builder(chart, map, R, eps, pts);
    builder.run();
  }
  PointCloud cloud;
  cloud.radius = R;
  cloud.mesh = eps;
  cloud.source = d;
  cloud.coords.resize(6, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) cloud.coords.col(static_cast<Eigen::Index>(i)) = pts[i];
  return cloud;
}

// ---------------------------------------------------------------------------

std::vector<Lie> lie_algebra(const SubgroupDescriptor& d) {
  auto v = [](double xe, double xf, double xh, double t1, double t2) {
    Lie X;
    X << xe, xf, xh, t1, t2;
    return X;
  };
  const Lie e = v(1, 0, 0, 0, 0), f = v(0, 1, 0, 0, 0), h = v(0, 0, 1, 0, 0);
  const Lie e1 = v(0, 0, 0, 1, 0), e2 = v(0, 0, 0, 0, 1);
  const double c = d.params[0];
  std::vector<Lie> basis;
  switch (d.family) {
    case Family::Levi: basis = {e, f, h}; break;
    case Family::MaxCompact: basis = {v(1, -1, 0, 0, 0)}; break;
    case Family::Diagonal: basis = {h}; break;
    case Family::BorelSL2: basis = {h, e}; break;
    case Family::BorelFull: basis = {h, e, e1, e2}; break;
    case Family::NPlus:
    case Family::TildeNPlus: basis = {e}; break;
    case Family::NMinus: basis = {f}; break;
    case Family::NPlusC: basis = {v(1, 0, 0, c, 0)}; break;
    case Family::VLine: {
      const Vec2<double> u = vline_direction(c);
      basis = {v(0, 0, 0, u(0), u(1))};
      break;
    }
    case Family::HeisLine: basis = {v(d.params[0], 0, 0, d.params[2], d.params[1])}; break;
    case Family::NPlusSemiR2: basis = {e, e1, e2}; break;
    case Family::NPlusSemiV0: basis = {e, e1}; break;
    case Family::WSlant: basis = {v(1, 0, 0, 0, -c), e1}; break;
    case Family::Translations2: basis = {e1, e2}; break;
  }
  Eigen::MatrixXd M(5, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i)
    M.col(static_cast<Eigen::Index>(i)) = adjoint(d.conjugator, basis[i]);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(5, M.cols());
  std::vector<Lie> out;
  for (Eigen::Index i = 0; i < Q.cols(); ++i) out.emplace_back(Q.col(i));
  return out;
}

SubgroupDescriptor canonicalize(const SubgroupDescriptor& d) {
  SubgroupDescriptor out = SubgroupDescriptor::make(d.family, d.params, d.conjugator);
  if (out.family == Family::HeisLine) {
    const double a = out.params[0], b = out.params[1], c = out.params[2];
    if (a != 0 && b == 0) out = SubgroupDescriptor::make(Family::NPlusC, {c, 0, 0}, d.conjugator);
    if (a == 0) {
      // {(I, (c t, b t))}: the translation line with direction (c, b).
      const double slope = c != 0 ? b / c : kInfinity;
      out = SubgroupDescriptor::make(Family::VLine, {slope, 0, 0}, d.conjugator);
    }
  }
  // Drop the part of the conjugator that normalizes the family.  With
  // h = k b as in rotation_factor, b normalizes every family below.
  const Element h = out.conjugator;
  const auto [k, b] = rotation_factor(h.sl2);
  switch (out.family) {
    case Family::Levi: out.conjugator = Element::translation(h.trans(0), h.trans(1)); break;
    case Family::BorelFull:
    case Family::NPlusSemiR2:
    case Family::NPlusSemiV0: out.conjugator = Element::linear(k); break;
    case Family::BorelSL2:
    case Family::TildeNPlus: out.conjugator = Element{k, h.trans}; break;
    case Family::NPlus:
    case Family::NPlusC: {
      // b sends NPlusC(c) to NPlusC(c / b11); (I, u) sends it to NPlusC(c - u2).
      const double c = out.family == Family::NPlusC ? out.params[0] : 0.0;
      const Vec2<double> u = k.transpose() * h.trans;
      const double c2 = clean_zero(c / b(0, 0) - u(1));
      out = c2 == 0 ? SubgroupDescriptor::make(Family::NPlus, {}, Element::linear(k))
                    : SubgroupDescriptor::make(Family::NPlusC, {c2, 0, 0}, Element::linear(k));
      break;
    }
    case Family::Translations2: out.conjugator = Element::identity(); break;
    case Family::VLine: {
      const Vec2<double> u = h.sl2 * vline_direction(out.params[0]);
      const double slope = std::abs(u(0)) <= 1e-15 * std::abs(u(1)) ? kInfinity : u(1) / u(0);
      return SubgroupDescriptor::make(Family::VLine, {slope, 0, 0});
    }
    default: break;
  }
  for (int i = 0; i < 2; ++i) {
    out.conjugator.trans(i) = clean_zero(out.conjugator.trans(i));
    for (int j = 0; j < 2; ++j) out.conjugator.sl2(i, j) = clean_zero(out.conjugator.sl2(i, j));
  }
  return out;
}

HeisConstraint heis_constraint(double a, double b, double c, double tol) {
  auto zero = [&](double x) { return std::abs(x) <= tol; };
  HeisConstraint out;
  // Scaling a nonzero coordinate to 1 is always possible.
  out.and_first = !zero(a) || !zero(c) || !zero(b);
  // One scale must give r2 = 1 and one of r1 = 1, r3 = 1, r1 = 0.
  out.left_to_right = !zero(b) && (zero(a - b) || zero(c - b) || zero(a));
  return out;
}

SubgroupDescriptor conjugate_descriptor(const SubgroupDescriptor& d, const Element& h) {
  SubgroupDescriptor out = d;
  out.conjugator = mul(h, d.conjugator);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json number_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    throw std::invalid_argument("bad numeric string: " + s);
  }
  if (!j.is_number()) throw std::invalid_argument("expected a number");
  return j.get<double>();
}

}  // namespace

nlohmann::json element_to_json(const Element& a) {
  const Mat3<double> m = affine_matrix(a);
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return rows;
}

Element element_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("conjugator must be a 3x3 array");
  Mat3<double> m;
  for (int i = 0; i < 3; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || row.size() != 3) throw std::invalid_argument("conjugator row must have 3 entries");
    for (int k = 0; k < 3; ++k) m(i, k) = number_from_json(row[static_cast<std::size_t>(k)]);
  }
  if (std::abs(m(2, 0)) > 1e-12 || std::abs(m(2, 1)) > 1e-12 || std::abs(m(2, 2) - 1) > 1e-12)
    throw std::invalid_argument("conjugator bottom row must be (0, 0, 1)");
  Element a = from_affine_matrix<double>(m);
  if (!is_valid(a, 1e-6)) throw std::invalid_argument("conjugator SL2 part must have det 1");
  return repair_det(a);
}

nlohmann::json to_json(const SubgroupDescriptor& d) {
  nlohmann::json params = nlohmann::json::array();
  for (int i = 0; i < parameter_count(d.family); ++i)
    params.push_back(number_to_json(d.params[static_cast<std::size_t>(i)]));
  return {{"family", std::string(family_name(d.family))},
          {"params", params},
          {"conjugator", element_to_json(d.conjugator)}};
}

SubgroupDescriptor descriptor_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family")) throw std::invalid_argument("descriptor needs a family");
  const auto name = j.at("family").get<std::string>();
  const auto fam = family_from_name(name);
  if (!fam) throw std::invalid_argument("unknown family: " + name);
  std::array<double, 3> params{};
  if (j.contains("params")) {
    const auto& p = j.at("params");
    if (!p.is_array() || p.size() != static_cast<std::size_t>(parameter_count(*fam)))
      throw std::invalid_argument("wrong parameter count for " + name);
    for (std::size_t i = 0; i < p.size(); ++i) params[i] = number_from_json(p[i]);
  } else if (parameter_count(*fam) > 0) {
    throw std::invalid_argument("missing params for " + name);
  }
  const Element h = j.contains("conjugator") ? element_from_json(j.at("conjugator")) : Element{};
  return SubgroupDescriptor::make(*fam, params, h);
}

}  // namespace chabauty
