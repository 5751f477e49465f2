#include "chabauty/irs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>

namespace chabauty {

namespace {

constexpr double kPi = std::numbers::pi;

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

template <int N>
Eigen::Matrix<double, N, N> haar_orthogonal(std::mt19937_64& rng, bool special) {
  std::normal_distribution<double> normal;
  Eigen::Matrix<double, N, N> g;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::Matrix<double, N, N>> qr(g);
  Eigen::Matrix<double, N, N> q = qr.householderQ();
  for (int i = 0; i < N; ++i)
    if (qr.matrixQR()(i, i) < 0) q.col(i) *= -1;
  if (special && q.determinant() < 0) q.col(0) *= -1;
  return q;
}

std::vector<AffineElement> haar_stream(HaarGroup grp, int count, std::uint64_t seed, std::uint32_t stream) {
  if (count < 1) throw std::invalid_argument("haar_sample: count must be >= 1");
  auto rng = stream_rng(seed, stream);
  std::vector<AffineElement> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Mat3d rot = Mat3d::Zero();
    if (grp == HaarGroup::SO3) {
      rot = haar_orthogonal<3>(rng, true);
    } else {
      const Eigen::Matrix2d a = haar_orthogonal<2>(rng, grp == HaarGroup::SO2);
      rot.topLeftCorner<2, 2>() = a;
      rot(2, 2) = a.determinant() > 0 ? 1.0 : -1.0;
    }
    out.emplace_back(rot, Vec3d::Zero());
  }
  return out;
}

Vec3d canonical_axis(const Vec3d& u) {
  Vec3d a = u.normalized();
  for (int i = 0; i < 3; ++i) {
    if (a(i) != 0) {
      if (a(i) < 0) a = -a;
      break;
    }
  }
  return a;
}

// ---------------------------------------------------------------------------
// d = 3 distances.  An axial subgroup meets B_R in {(R_u(theta), v)}; its
// rotation part is a circle in R^9.

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Points9 = Eigen::Matrix<double, 9, Eigen::Dynamic>;

Vec9 flat(const Mat3d& m) { return Eigen::Map<const Vec9>(m.data()); }

Points9 circle_net(const Vec3d& axis, double eps) {
  // |d/dtheta R_u(theta)| = sqrt(2); spacing eps / 4 as for curves.
  const int n = static_cast<int>(std::ceil(2 * kPi * std::sqrt(2.0) / (eps / 4)));
  Points9 out(9, n);
  for (int i = 0; i < n; ++i) {
    const double t = -kPi + 2 * kPi * i / n;
    out.col(i) = flat(Eigen::AngleAxisd(t, axis).toRotationMatrix());
  }
  return out;
}

Points9 sphere9(double R, int count) {
  std::mt19937_64 rng(0x5068657265ULL);
  std::normal_distribution<double> normal;
  const Vec9 id = flat(Mat3d::Identity());
  Points9 out(9, count);
  for (int i = 0; i < count; ++i) {
    Vec9 g;
    do {
      for (int k = 0; k < 9; ++k) g(k) = normal(rng);
    } while (g.norm() < 1e-8);
    out.col(i) = id + R * g.normalized();
  }
  return out;
}

struct Padded9 {
  KdTree<9> tree;
  Points9 inner;
};

Padded9 padded9(const Points9& net, const MetricConfig& cfg) {
  const Points9 pad = sphere9(cfg.radius, cfg.sphere_pad);
  Points9 all(9, net.cols() + pad.cols());
  all << net, pad;
  const Vec9 id = flat(Mat3d::Identity());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < net.cols(); ++i)
    if ((net.col(i) - id).norm() <= cfg.radius) keep.push_back(i);
  Points9 inner(9, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) inner.col(static_cast<Eigen::Index>(i)) = net.col(keep[i]);
  return {KdTree<9>(std::move(all)), std::move(inner)};
}

double dist9(const Padded9& a, const Padded9& b) {
  const double ab = a.inner.cols() > 0 ? directed_hausdorff<9>(a.inner, b.tree) : 0.0;
  const double ba = b.inner.cols() > 0 ? directed_hausdorff<9>(b.inner, a.tree) : 0.0;
  return std::max(ab, ba);
}

constexpr int kAngleSteps = 180;

// Distance between axial subgroups as a function of the angle between the
// axes, on [0, pi/2] in kAngleSteps steps, followed by the axial-to-R^3 distance.
std::vector<double> axial_table(const MetricConfig& cfg) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, int>, std::vector<double>> cache;
  const auto key = std::make_tuple(cfg.radius, cfg.mesh, cfg.sphere_pad);
  std::lock_guard lock(mu);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const Padded9 base = padded9(circle_net(Vec3d::UnitZ(), cfg.mesh), cfg);
  std::vector<double> t(kAngleSteps + 2);
  for (int j = 0; j <= kAngleSteps; ++j) {
    const double phi = kPi / 2 * j / kAngleSteps;
    const Vec3d u(std::sin(phi), 0, std::cos(phi));
    t[static_cast<std::size_t>(j)] = j == 0 ? 0.0 : dist9(base, padded9(circle_net(u, cfg.mesh), cfg));
  }
  Points9 id(9, 1);
  id.col(0) = flat(Mat3d::Identity());
  t[kAngleSteps + 1] = dist9(base, padded9(id, cfg));
  cache.emplace(key, t);
  return t;
}

// ---------------------------------------------------------------------------
// Pooled distance matrices.

class DescriptorCache {
 public:
  explicit DescriptorCache(const MetricConfig& cfg) : cfg_(cfg) {}

  int index(const SubgroupDescriptor& d) {
    const std::string key = to_json(d).dump();
    if (auto it = ids_.find(key); it != ids_.end()) return it->second;
    const int id = static_cast<int>(descs_.size());
    ids_.emplace(key, id);
    descs_.push_back(d);
    return id;
  }

  /// Fills dist(i, j) for every pair of registered descriptors.
  Eigen::MatrixXd distances() {
    const auto n = static_cast<int>(descs_.size());
    std::vector<std::unique_ptr<PaddedCloud>> clouds(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      clouds[static_cast<std::size_t>(i)] = std::make_unique<PaddedCloud>(descs_[static_cast<std::size_t>(i)], cfg_);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    const auto threads = static_cast<std::size_t>(std::max(1, thread_count()));
    auto work = [&](std::size_t t) {
      for (std::size_t p = t; p < pairs.size(); p += threads) {
        const auto [i, j] = pairs[p];
        D(i, j) = D(j, i) =
            chabauty_dist(*clouds[static_cast<std::size_t>(i)], *clouds[static_cast<std::size_t>(j)]);
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
    return D;
  }

 private:
  MetricConfig cfg_;
  std::unordered_map<std::string, int> ids_;
  std::vector<SubgroupDescriptor> descs_;
};

// Pooled sample: rows 0..n-1 are the atoms, n..2n-1 their conjugates.
Eigen::MatrixXd pooled_distances(const EmpiricalMeasure& m, const std::vector<Element>& conj,
                                 const MetricConfig& cfg) {
  DescriptorCache cache(cfg);
  const std::size_t n = m.atoms.size();
  std::vector<int> idx(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* d = std::get_if<SubgroupDescriptor>(&m.atoms[i]);
    if (!d) throw std::invalid_argument("invariance_statistic: atom is not a subgroup of SL(2,R) x| R^2");
    idx[i] = cache.index(canonicalize(*d));
    idx[n + i] = cache.index(canonicalize(conjugate_descriptor(*d, conj[i % conj.size()])));
  }
  const Eigen::MatrixXd U = cache.distances();
  Eigen::MatrixXd D(2 * n, 2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i)
    for (std::size_t j = 0; j < 2 * n; ++j)
      D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = U(idx[i], idx[j]);
  return D;
}

Eigen::MatrixXd pooled_distances(const EmpiricalMeasure& m, const std::vector<AffineElement>& conj,
                                 const MetricConfig& cfg) {
  const std::size_t n = m.atoms.size();
  std::vector<Subgroup3> all(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* h = std::get_if<Subgroup3>(&m.atoms[i]);
    if (!h) throw std::invalid_argument("invariance_statistic: atom is not a subgroup of SO(3) x| R^3");
    all[i] = *h;
    all[n + i] = conjugate(*h, conj[i % conj.size()]);
  }
  Eigen::MatrixXd D(2 * n, 2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i)
    for (std::size_t j = 0; j < 2 * n; ++j)
      D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = chabauty_dist(all[i], all[j], cfg);
  return D;
}

// Weighted energy distance between the first and second halves; label[i]
// says which half pooled item i belongs to.
double energy(const Eigen::MatrixXd& D, const std::vector<double>& w, const std::vector<int>& label) {
  double xy = 0, xx = 0, yy = 0;
  const auto N = static_cast<std::size_t>(D.rows());
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      const double d = w[i] * w[j] * D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (label[i] != label[j]) xy += d;
      else if (label[i] == 0) xx += d;
      else yy += d;
    }
  }
  // Negative values can occur because chabauty_dist need not be of negative type.
  return std::max(0.0, xy - xx - yy);
}

template <typename C>
void check_inputs(const EmpiricalMeasure& m, const std::vector<C>& conj) {
  m.validate();
  if (m.atoms.empty()) throw std::invalid_argument("invariance_statistic: empty measure");
  if (conj.empty()) throw std::invalid_argument("invariance_statistic: conjugators must be nonempty");
}

template <typename C>
double statistic_impl(const EmpiricalMeasure& m, const std::vector<C>& conj, const MetricConfig& cfg) {
  check_inputs(m, conj);
  cfg.validate();
  const Eigen::MatrixXd D = pooled_distances(m, conj, cfg);
  const std::size_t n = m.atoms.size();
  std::vector<double> w(2 * n);
  std::vector<int> label(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = w[n + i] = m.weights[i];
    label[i] = 0;
    label[n + i] = 1;
  }
  return energy(D, w, label);
}

template <typename C>
InvarianceReport test_impl(const EmpiricalMeasure& m, const std::vector<C>& conj, const MetricConfig& cfg,
                           int permutations) {
  check_inputs(m, conj);
  cfg.validate();
  if (permutations < 19) throw std::invalid_argument("invariance_test: need at least 19 permutations");
  const std::size_t n = m.atoms.size();
  for (double x : m.weights)
    if (std::abs(x - 1.0 / static_cast<double>(n)) > 1e-12)
      throw std::invalid_argument("invariance_test: permutation quantile needs uniform weights");
  const Eigen::MatrixXd D = pooled_distances(m, conj, cfg);
  const std::vector<double> w(2 * n, 1.0 / static_cast<double>(n));
  std::vector<int> label(2 * n);
  for (std::size_t i = 0; i < 2 * n; ++i) label[i] = i < n ? 0 : 1;

  InvarianceReport r;
  r.statistic = energy(D, w, label);
  r.seed = m.seed;
  r.permutations = permutations;
  r.config = cfg;
  auto rng = stream_rng(m.seed, 1);
  std::vector<double> null(static_cast<std::size_t>(permutations));
  for (auto& x : null) {
    std::shuffle(label.begin(), label.end(), rng);
    x = energy(D, w, label);
  }
  std::sort(null.begin(), null.end());
  r.threshold = null[static_cast<std::size_t>(std::ceil(0.95 * permutations)) - 1];
  r.pass = r.statistic <= r.threshold;
  return r;
}

SubgroupDescriptor levi_at(const Vec2<double>& v) {
  return SubgroupDescriptor::make(Family::Levi, {}, Element::translation(v(0), v(1)));
}

}  // namespace

// ---------------------------------------------------------------------------

Subgroup3 Subgroup3::axial(const Vec3d& u) {
  if (!(u.norm() > 0) || !u.allFinite()) throw std::invalid_argument("Subgroup3::axial: axis must be nonzero");
  return {Kind::Axial, canonical_axis(u)};
}

Subgroup3 conjugate(const Subgroup3& h, const AffineElement& g) {
  if (h.kind == Subgroup3::Kind::Translations) return h;
  if (g.dim() != 3) throw std::invalid_argument("conjugate: conjugator must act on R^3");
  return Subgroup3::axial(g.linear * h.axis);
}

void EmpiricalMeasure::validate() const {
  if (weights.size() != atoms.size()) throw std::invalid_argument("EmpiricalMeasure: one weight per atom");
  double sum = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw std::invalid_argument("EmpiricalMeasure: weights must be nonnegative");
    sum += w;
  }
  if (!atoms.empty() && std::abs(sum - 1) > 1e-12)
    throw std::invalid_argument("EmpiricalMeasure: weights must sum to 1");
  for (const auto& a : atoms)
    if (a.index() != atoms.front().index())
      throw std::invalid_argument("EmpiricalMeasure: atoms from different ambient groups");
}

std::vector<AffineElement> haar_sample(HaarGroup g, int count, std::uint64_t seed) {
  return haar_stream(g, count, seed, 0);
}

double planar_angle(const AffineElement& g) {
  const double t = std::atan2(g.linear(1, 0), g.linear(0, 0));
  return t < 0 ? t + 2 * kPi : t;
}

EmpiricalMeasure orbit_pushforward(const SubgroupDescriptor& base, const std::vector<Element>& samples,
                                   std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("orbit_pushforward: samples must be nonempty");
  EmpiricalMeasure m;
  m.seed = seed;
  for (const auto& g : samples) m.atoms.emplace_back(canonicalize(conjugate_descriptor(base, g)));
  m.weights.assign(samples.size(), 1.0 / static_cast<double>(samples.size()));
  return m;
}

EmpiricalMeasure orbit_pushforward(const Subgroup3& base, const std::vector<AffineElement>& samples,
                                   std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("orbit_pushforward: samples must be nonempty");
  EmpiricalMeasure m;
  m.seed = seed;
  for (const auto& g : samples) m.atoms.emplace_back(conjugate(base, g));
  m.weights.assign(samples.size(), 1.0 / static_cast<double>(samples.size()));
  return m;
}

double chabauty_dist(const Subgroup3& a, const Subgroup3& b, const MetricConfig& cfg) {
  using K = Subgroup3::Kind;
  if (a.kind == K::Translations && b.kind == K::Translations) return 0;
  cfg.validate();
  const auto t = axial_table(cfg);
  if (a.kind != b.kind) return t[kAngleSteps + 1];
  const double c = std::clamp(std::abs(a.axis.dot(b.axis)), 0.0, 1.0);
  const double x = std::acos(c) / (kPi / 2) * kAngleSteps;
  const auto j = std::min(static_cast<int>(x), kAngleSteps - 1);
  const double f = x - j;
  return (1 - f) * t[static_cast<std::size_t>(j)] + f * t[static_cast<std::size_t>(j + 1)];
}

double invariance_statistic(const EmpiricalMeasure& m, const std::vector<Element>& conjugators,
                            const MetricConfig& cfg) {
  return statistic_impl(m, conjugators, cfg);
}

double invariance_statistic(const EmpiricalMeasure& m, const std::vector<AffineElement>& conjugators,
                            const MetricConfig& cfg) {
  return statistic_impl(m, conjugators, cfg);
}

InvarianceReport invariance_test(const EmpiricalMeasure& m, const std::vector<Element>& conjugators,
                                 const MetricConfig& cfg, int permutations) {
  return test_impl(m, conjugators, cfg, permutations);
}

InvarianceReport invariance_test(const EmpiricalMeasure& m, const std::vector<AffineElement>& conjugators,
                                 const MetricConfig& cfg, int permutations) {
  return test_impl(m, conjugators, cfg, permutations);
}

nlohmann::json InvarianceReport::to_json() const {
  return {{"statistic", statistic},
          {"threshold", threshold},
          {"pass", pass},
          {"seed", seed},
          {"permutations", permutations},
          {"criterion", "energy distance below its 95% label-permutation quantile (artifact-defined)"},
          {"config", {{"radius", config.radius}, {"mesh", config.mesh}, {"sphere_pad", config.sphere_pad}}}};
}

MetricConfig irs_metric() {
  MetricConfig c;
  c.radius = 2;
  c.mesh = 0.25;
  c.sphere_pad = 64;
  return c;
}

InvarianceReport so3_example(int atoms, std::uint64_t seed, const MetricConfig& cfg) {
  const auto samples = haar_stream(HaarGroup::SO3, atoms, seed, 0);
  const auto conj = haar_stream(HaarGroup::SO3, atoms, seed, 2);
  return invariance_test(orbit_pushforward(Subgroup3::axial(Vec3d::UnitZ()), samples, seed), conj, cfg);
}

InvarianceReport levi_orbit(int atoms, double window, std::uint64_t seed, const MetricConfig& cfg) {
  if (atoms < 1 || !(window >= 0)) throw std::invalid_argument("levi_orbit: need atoms >= 1 and window >= 0");
  EmpiricalMeasure m;
  m.seed = seed;
  for (int k = 1; k <= atoms; ++k) m.atoms.emplace_back(levi_at(Vec2<double>(k, 0)));
  m.weights.assign(static_cast<std::size_t>(atoms), 1.0 / atoms);
  auto rng = stream_rng(seed, 3);
  std::uniform_real_distribution<double> shift(-window, window);
  std::vector<Element> conj;
  for (int k = 0; k < atoms; ++k) {
    const double x = shift(rng);
    conj.push_back(Element::translation(x, shift(rng)));
  }
  return invariance_test(m, conj, cfg);
}

InvarianceReport dirac_plane(int atoms, std::uint64_t seed, const MetricConfig& cfg) {
  if (atoms < 1) throw std::invalid_argument("dirac_plane: atoms must be >= 1");
  EmpiricalMeasure m;
  m.seed = seed;
  m.atoms.assign(static_cast<std::size_t>(atoms), SubgroupDescriptor::make(Family::Translations2));
  m.weights.assign(static_cast<std::size_t>(atoms), 1.0 / atoms);
  auto rng = stream_rng(seed, 2);
  std::uniform_real_distribution<double> u(-3, 3);
  std::vector<Element> conj;
  for (int k = 0; k < atoms; ++k)
    conj.push_back(Element{iwasawa(u(rng), u(rng), u(rng)), Vec2<double>(u(rng), u(rng))});
  return invariance_test(m, conj, cfg);
}

InvarianceReport dirac_space(int atoms, std::uint64_t seed, const MetricConfig& cfg) {
  if (atoms < 1) throw std::invalid_argument("dirac_space: atoms must be >= 1");
  EmpiricalMeasure m;
  m.seed = seed;
  m.atoms.assign(static_cast<std::size_t>(atoms), Subgroup3::translations());
  m.weights.assign(static_cast<std::size_t>(atoms), 1.0 / atoms);
  auto conj = haar_stream(HaarGroup::SO3, atoms, seed, 2);
  auto rng = stream_rng(seed, 4);
  std::normal_distribution<double> normal;
  for (auto& g : conj) g.trans = Vec3d(normal(rng), normal(rng), normal(rng));
  return invariance_test(m, conj, cfg);
}

double levi_escape_distance(const Vec2<double>& v, const MetricConfig& cfg) {
  cfg.validate();
  const PaddedCloud conj(levi_at(v), cfg);
  if (v.norm() == 0) return chabauty_dist(conj, PaddedCloud(levi_at(v), cfg));
  // Conjugates of N+ x| R^2 are k(theta) (N+ x| R^2) k(theta)^-1, theta mod pi;
  // the Levi limit along v sits at theta = -angle(v).
  auto dist = [&](double theta) {
    const auto d = SubgroupDescriptor::make(Family::NPlusSemiR2, {}, Element::linear(rotation(theta)));
    return chabauty_dist(conj, PaddedCloud(d, cfg));
  };
  const double theta0 = -std::atan2(v(1), v(0));
  double best_t = theta0, best = dist(theta0);
  double step = 0.1;
  for (int it = 0; it < 12; ++it) {
    bool moved = false;
    for (double t : {best_t - step, best_t + step}) {
      const double d = dist(t);
      if (d < best) {
        best = d;
        best_t = t;
        moved = true;
      }
    }
    if (!moved) step /= 2;
  }
  return best;
}

double levi_escape_demo(double T, const MetricConfig& cfg, int draws, std::uint64_t seed) {
  if (!(T >= 0)) throw std::invalid_argument("levi_escape_demo: T must be >= 0");
  if (draws < 1) throw std::invalid_argument("levi_escape_demo: draws must be >= 1");
  if (T == 0) return levi_escape_distance(Vec2<double>::Zero(), cfg);
  auto rng = stream_rng(seed, 5);
  std::uniform_real_distribution<double> u(-T, T);
  std::vector<double> d;
  for (int i = 0; i < draws; ++i) d.push_back(levi_escape_distance(Vec2<double>(u(rng), u(rng)), cfg));
  std::nth_element(d.begin(), d.begin() + draws / 2, d.end());
  return d[static_cast<std::size_t>(draws / 2)];
}

}  // namespace chabauty
