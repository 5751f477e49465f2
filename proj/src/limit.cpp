#include "chabauty/limit.hpp"

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace chabauty {

namespace {

Vec2<double> finite_v(const AsymptoticProfile& p) { return {p.alpha.value, p.beta.value}; }

SubgroupDescriptor shifted(SubgroupDescriptor d, const Vec2<double>& v) {
  return conjugate_descriptor(d, Element::translation(v(0), v(1)));
}

[[noreturn]] void indeterminate(const std::string& why) { throw IndeterminateProfile(why); }

bool v_bounded(const AsymptoticProfile& p) { return p.alpha.is_finite() && p.beta.is_finite(); }

// Leading exponent of a power sum, or nullopt for the zero sum.
std::optional<Rational> order(const PowerSum& x) {
  if (x.is_zero()) return std::nullopt;
  return x.leading().first;
}

}  // namespace

OracleResult oracle_levi(const AsymptoticProfile& p) {
  if (v_bounded(p)) return {shifted(SubgroupDescriptor::levi(), finite_v(p)), "levi: v bounded"};
  const double phi = p.v_angle.value_or(0.0);
  return {SubgroupDescriptor::make(Family::NPlusSemiR2, {}, Element::linear(rotation(-phi))),
          "levi: v divergent, stabilizer of the limiting direction"};
}

OracleResult oracle_unipotent(const AsymptoticProfile& p) {
  if (p.beta.is_infinite()) return {SubgroupDescriptor::v_line(0), "n+: beta divergent"};
  if (!p.beta.is_finite()) indeterminate("n+: beta has no limit");
  return {shifted(SubgroupDescriptor::n_plus(), {0, p.beta.value}), "n+: beta bounded"};
}

OracleResult oracle_borel(const AsymptoticProfile& p) {
  if (v_bounded(p)) return {shifted(SubgroupDescriptor::borel_sl2(), finite_v(p)), "borel: v bounded"};
  if (p.alpha_over_beta.is_zero()) return {SubgroupDescriptor::translations2(), "borel: alpha/beta -> 0"};
  if (p.beta_over_alpha.is_zero()) {
    if (p.beta.is_finite()) return {SubgroupDescriptor::n_plus_semi_v0(), "borel: beta bounded"};
    const Limit& r = p.beta2_over_alpha;
    if (r.is_zero()) return {SubgroupDescriptor::n_plus_semi_v0(), "borel: beta^2/alpha -> 0"};
    if (r.is_finite()) return {SubgroupDescriptor::w_slant(r.value), "borel: beta^2/alpha -> c"};
    if (r.is_infinite()) return {SubgroupDescriptor::translations2(), "borel: beta^2/alpha -> inf"};
    indeterminate("borel: beta^2/alpha has no limit");
  }
  if (p.alpha_over_beta.is_finite()) return {SubgroupDescriptor::translations2(), "borel: alpha/beta -> c"};
  indeterminate("borel: alpha/beta has no limit");
}

OracleResult oracle_diagonal(const AsymptoticProfile& p) {
  if (p.v_is_zero) {
    if (p.s.is_infinite()) return {SubgroupDescriptor::n_plus(), "a: v = 0, s divergent"};
    if (p.s.is_finite())
      return {SubgroupDescriptor::make(Family::Diagonal, {}, Element::linear(upper_unipotent(p.s.value))),
              "a: v = 0, s bounded"};
    indeterminate("a: s has no limit");
  }
  if (p.s_is_constant) {
    const double s = p.s.value;
    if (v_bounded(p))
      return {SubgroupDescriptor::make(Family::Diagonal, {},
                                       Element{upper_unipotent(s), finite_v(p)}),
              "a: s constant, v bounded"};
    // Translation part -t (alpha - 2 s beta, -beta) of the rescaled generator.
    const double slope = p.slope.kind == LimitKind::None ? kInfinity : p.slope.extended();
    return {SubgroupDescriptor::v_line(std::isinf(slope) ? kInfinity : slope), "a: s constant, v divergent"};
  }
  if (p.s.is_finite()) indeterminate("a: s convergent but not constant");
  if (!p.s.is_infinite()) indeterminate("a: s has no limit");
  if (v_bounded(p)) return {shifted(SubgroupDescriptor::n_plus(), finite_v(p)), "a: s divergent, v bounded"};
  if (p.s_over_beta.is_finite()) {
    if (!p.d.is_finite()) return {SubgroupDescriptor::v_line(0), "a: s/beta -> r, d infinite"};
    return {canonicalize(SubgroupDescriptor::heis_line(-2 * p.s_over_beta.value, 1, p.d.value)),
            "a: s/beta -> r"};
  }
  if (p.beta_over_s.is_finite()) {
    if (!p.d_prime.is_finite()) return {SubgroupDescriptor::v_line(0), "a: beta/s -> p, d' infinite"};
    return {canonicalize(SubgroupDescriptor::heis_line(1, -p.beta_over_s.value / 2, p.d_prime.value / 2)),
            "a: beta/s -> p"};
  }
  indeterminate("a: s and beta not comparable");
}

// K needs the power sums themselves, not only the profile: the direction of
// the limit line is that of w_n = m_n J m_n^-1 v_n with m_n = u(s_n) diag(a_n)
// and J the rotation generator.
namespace {

OracleResult oracle_compact_full(const SequenceSpec& sp, const AsymptoticProfile& p) {
  if (p.a.is_zero() || p.a.kind == LimitKind::None) indeterminate("k: a -> 0 or has no limit");
  if (!p.s.is_finite() && !p.s.is_infinite()) indeterminate("k: s has no limit");
  const bool m_bounded = p.a.is_finite() && p.s.is_finite();
  if (v_bounded(p)) {
    if (m_bounded) {
      const Element h{upper_unipotent(p.s.value) * diagonal(p.a.value), finite_v(p)};
      return {SubgroupDescriptor::make(Family::MaxCompact, {}, h), "k: everything bounded"};
    }
    return {shifted(SubgroupDescriptor::tilde_n_plus(), finite_v(p)), "k: a or s divergent, v bounded"};
  }
  const auto q = PowerSum::divide(PowerSum::constant(1), sp.a * sp.a);
  if (!q) indeterminate("k: a vanishes");
  const PowerSum& s = sp.s;
  const PowerSum p2 = sp.a * sp.a;
  // m J m^-1 = (-s q, s^2 q + p2; -q, s q)
  const PowerSum m00 = -1.0 * (s * *q), m01 = s * s * *q + p2, m10 = -1.0 * *q, m11 = s * *q;
  const PowerSum w0 = m00 * sp.alpha + m01 * sp.beta;
  const PowerSum w1 = m10 * sp.alpha + m11 * sp.beta;
  std::optional<Rational> ew;
  for (const auto& x : {w0, w1})
    if (auto e = order(x)) ew = ew ? std::max(*ew, *e) : *e;
  std::optional<Rational> em;
  for (const auto& x : {m00, m01, m10, m11})
    if (auto e = order(x)) em = em ? std::max(*em, *e) : *e;
  if (!ew || !em || !(*em < *ew)) indeterminate("k: rotation part does not collapse");
  const double x = order(w0) == ew ? w0.leading().second : 0.0;
  const double y = order(w1) == ew ? w1.leading().second : 0.0;
  const double slope = x == 0 ? kInfinity : y / x;
  return {SubgroupDescriptor::v_line(slope), "k: v divergent, line along m J m^-1 v"};
}

}  // namespace

OracleResult oracle_compact(const AsymptoticProfile& p) {
  // Profile-only form for a = 1, s = 0, where w_n = (beta_n, -alpha_n).
  if (!p.a_is_one || !p.s_is_zero) indeterminate("k: profile-only oracle needs a = 1, s = 0");
  if (v_bounded(p))
    return {shifted(SubgroupDescriptor::max_compact(), finite_v(p)), "k: everything bounded"};
  if (p.alpha_over_beta.kind == LimitKind::None) return {SubgroupDescriptor::v_line(kInfinity), "k: beta = 0"};
  return {SubgroupDescriptor::v_line(-p.alpha_over_beta.extended()), "k: v divergent, line along J v"};
}

OracleResult oracle_for(const SequenceSpec& s) {
  const SubgroupDescriptor& b = s.base;
  if (!b.conjugator.sl2.isIdentity(1e-12) || !b.conjugator.trans.isZero(1e-12))
    indeterminate("base subgroup carries a conjugator");
  const AsymptoticProfile p = extract_profile(s);
  OracleResult r;
  switch (b.family) {
    case Family::Levi: r = oracle_levi(p); break;
    case Family::MaxCompact: r = oracle_compact_full(s, p); break;
    case Family::Diagonal: r = oracle_diagonal(p); break;
    case Family::BorelSL2: r = oracle_borel(p); break;
    case Family::NPlus: r = oracle_unipotent(p); break;
    default: indeterminate("no oracle for base " + std::string(family_name(b.family)));
  }
  r.limit = canonicalize(conjugate_descriptor(r.limit, s.outer));
  return r;
}

// ---------------------------------------------------------------------------
// Classification

namespace {

constexpr double kBoxR = 2, kBoxSigma = 5, kBoxW = 10;
constexpr double kSnapAngle = 1e-3;

// Family parameters in fit coordinates followed by (theta, r, sigma, w1, w2).
int fit_param_count(Family f) {
  switch (f) {
    case Family::VLine:
    case Family::WSlant: return 1;
    case Family::HeisLine: return 3;
    default: return 0;
  }
}

std::optional<SubgroupDescriptor> candidate_from(Family f, const Eigen::VectorXd& x) {
  const int k = fit_param_count(f);
  const Element h{iwasawa(x(k), x(k + 1), x(k + 2)), Vec2<double>(x(k + 3), x(k + 4))};
  std::array<double, 3> params{};
  if (f == Family::VLine) {
    const double c = std::cos(x(0));
    params[0] = std::abs(c) < 1e-15 ? kInfinity : std::sin(x(0)) / c;
  } else if (f == Family::WSlant) {
    if (x(0) == 0) return std::nullopt;
    params[0] = x(0);
  } else if (f == Family::HeisLine) {
    if (x.head<3>().norm() < 1e-9) return std::nullopt;
    params = {x(0), x(1), x(2)};
  }
  try {
    return SubgroupDescriptor::make(f, params, h);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

struct AlignResidual {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  Family family;
  Projector target;
  int n_in;

  [[nodiscard]] int inputs() const { return n_in; }
  [[nodiscard]] int values() const { return 25 + 5 + (family == Family::HeisLine ? 1 : 0); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    f.setZero(values());
    const int k = fit_param_count(family);
    const auto d = candidate_from(family, x);
    if (!d) {
      f.head<25>().setConstant(1.0);
    } else {
      const Projector D = target - proj_matrix(lie_subspace(*d));
      f.head<25>() = Eigen::Map<const Eigen::Matrix<double, 25, 1>>(D.data());
    }
    auto box = [](double v, double b) { return 10.0 * std::max(0.0, std::abs(v) - b); };
    const double r = x(k + 1), sigma = x(k + 2), w1 = x(k + 3), w2 = x(k + 4);
    f(25) = box(r, kBoxR) + 1e-3 * r;
    f(26) = box(sigma, kBoxSigma) + 1e-3 * sigma;
    f(27) = box(w1, kBoxW) + 1e-3 * w1;
    f(28) = box(w2, kBoxW) + 1e-3 * w2;
    f(29) = 0;
    if (family == Family::HeisLine) f(30) = 0.1 * (x.head<3>().norm() - 1.0);
    return 0;
  }
};

Eigen::VectorXd random_start(Family f, std::mt19937_64& rng) {
  const int k = fit_param_count(f);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd x(k + 5);
  if (f == Family::VLine) x(0) = std::numbers::pi / 2 * u(rng);
  if (f == Family::WSlant) x(0) = 3 * u(rng);
  if (f == Family::HeisLine) {
    for (int i = 0; i < 3; ++i) x(i) = u(rng);
  }
  x(k) = std::numbers::pi / 2 * u(rng);
  x(k + 1) = kBoxR * u(rng);
  x(k + 2) = kBoxSigma * u(rng);
  x(k + 3) = kBoxW * u(rng);
  x(k + 4) = kBoxW * u(rng);
  return x;
}

void clamp_to_box(Family f, Eigen::VectorXd& x) {
  const int k = fit_param_count(f);
  // Conjugation by -I is absorbed by the family parameters.
  x(k) = std::remainder(x(k), std::numbers::pi);
  x(k + 1) = std::clamp(x(k + 1), -kBoxR, kBoxR);
  x(k + 2) = std::clamp(x(k + 2), -kBoxSigma, kBoxSigma);
  x(k + 3) = std::clamp(x(k + 3), -kBoxW, kBoxW);
  x(k + 4) = std::clamp(x(k + 4), -kBoxW, kBoxW);
}

std::vector<Family> families_of_dimension(int dim) {
  switch (dim) {
    case 1:
      return {Family::MaxCompact, Family::Diagonal, Family::NPlus,
              Family::TildeNPlus, Family::HeisLine, Family::VLine};
    case 2: return {Family::BorelSL2, Family::NPlusSemiV0, Family::WSlant, Family::Translations2};
    case 3: return {Family::Levi, Family::NPlusSemiR2};
    case 4: return {Family::BorelFull};
    default: return {};
  }
}

// Compass search over the translation of the conjugator, which fixes where
// the -I coset sits.
Match refine_tilde(const Match& start, const PaddedCloud& cloud, const MetricConfig& cfg) {
  Match best = start;
  double step = 0.5;
  for (int it = 0; it < 20; ++it) {
    bool moved = false;
    for (const auto& dv : {Vec2<double>(1, 0), Vec2<double>(-1, 0), Vec2<double>(0, 1), Vec2<double>(0, -1)}) {
      SubgroupDescriptor d = best.descriptor;
      d.conjugator.trans += step * dv;
      const double dist = chabauty_dist(PaddedCloud(d, cfg), cloud);
      if (dist < best.distance) {
        best.descriptor = d;
        best.distance = dist;
        moved = true;
        break;
      }
    }
    if (!moved) step /= 2;
  }
  return best;
}

}  // namespace

Match fit_family(Family f, const Subspace& target) {
  const int n_in = fit_param_count(f) + 5;
  AlignResidual res{f, proj_matrix(target), n_in};
  std::mt19937_64 rng(0xc1a55 + static_cast<unsigned>(f));

  struct Start {
    double cost;
    Eigen::VectorXd x;
  };
  std::vector<Start> starts;
  Eigen::VectorXd fv;
  for (int i = 0; i < 512; ++i) {
    Eigen::VectorXd x = random_start(f, rng);
    res(x, fv);
    starts.push_back({fv.squaredNorm(), std::move(x)});
  }
  std::partial_sort(starts.begin(), starts.begin() + 8, starts.end(),
                    [](const Start& a, const Start& b) { return a.cost < b.cost; });

  Eigen::VectorXd best_x;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 8; ++i) {
    Eigen::VectorXd x = starts[static_cast<std::size_t>(i)].x;
    Eigen::NumericalDiff<AlignResidual> nd(res);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<AlignResidual>> lm(nd);
    lm.parameters.maxfev = 2000;
    lm.minimize(x);
    clamp_to_box(f, x);
    res(x, fv);
    if (fv.squaredNorm() < best_cost) {
      best_cost = fv.squaredNorm();
      best_x = x;
    }
  }
  // Snap round-off so canonicalize() sees exact zeros.
  if (f == Family::HeisLine) best_x.head<3>().normalize();
  for (Eigen::Index i = 0; i < best_x.size(); ++i)
    if (std::abs(best_x(i)) < 1e-7) best_x(i) = 0;
  // Angles this small are below the net resolution; dropping them lets
  // canonicalize() recognise normalizing conjugators and degenerate lines.
  const Eigen::Index k = fit_param_count(f);
  if (std::abs(best_x(k)) < kSnapAngle) best_x(k) = 0;
  if (f == Family::VLine) {
    if (std::abs(best_x(0)) < kSnapAngle) best_x(0) = 0;
    if (std::abs(std::abs(best_x(0)) - std::numbers::pi / 2) < kSnapAngle) best_x(0) = std::numbers::pi / 2;
  }
  if (f == Family::HeisLine) {
    for (int i = 0; i < 3; ++i)
      if (std::abs(best_x(i)) < kSnapAngle) best_x(i) = 0;
  }
  auto d = candidate_from(f, best_x);
  if (!d) d = candidate_from(f, starts.front().x);
  if (!d) throw std::runtime_error("fit_family: no admissible candidate");
  Match m;
  m.descriptor = canonicalize(*d);
  m.algebra_fit = grass_dist(target, lie_subspace(m.descriptor));
  return m;
}

std::vector<Match> classify(const PointCloud& cloud, const MetricConfig& cfg, const ClassifyOptions& opts) {
  const Subspace W = estimate_lie_algebra(cloud);
  std::vector<Family> fams = opts.families;
  if (fams.empty()) fams = families_of_dimension(W.dim());
  const PaddedCloud padded(cloud, cfg);
  std::vector<Match> out;
  for (Family f : fams) {
    if (identity_dimension(f) != W.dim()) continue;
    Match m = fit_family(f, W);
    try {
      m.distance = chabauty_dist(PaddedCloud(m.descriptor, cfg), padded);
    } catch (const std::runtime_error&) {
      continue;
    }
    if (f == Family::TildeNPlus) m = refine_tilde(m, padded, cfg);
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(), [](const Match& a, const Match& b) { return a.distance < b.distance; });
  if (out.empty()) return out;
  // Candidates within half a mesh of the best are indistinguishable on the
  // nets.  Prefer the least distorted conjugator, then parameters inside the
  // fit box, then fewer components and parameters.
  const double window = out.front().distance + cfg.mesh / 2;
  auto distortion = [](const Match& m) {
    const double s1 = Eigen::JacobiSVD<Mat2<double>>(m.descriptor.conjugator.sl2).singularValues()(0);
    return std::round(std::log(s1) / 0.1);
  };
  auto unbounded = [](const Match& m) {
    const int np = parameter_count(m.descriptor.family);
    for (int i = 0; i < np; ++i) {
      const double p = m.descriptor.params[static_cast<std::size_t>(i)];
      if (std::isfinite(p) && std::abs(p) > kBoxW) return true;
    }
    return false;
  };
  auto key = [&](const Match& m) {
    const Family f = m.descriptor.family;
    return std::make_tuple(distortion(m), unbounded(m), component_count(f), parameter_count(f), m.distance);
  };
  auto best = out.begin();
  for (auto it = out.begin(); it != out.end() && it->distance <= window; ++it)
    if (key(*it) < key(*best)) best = it;
  std::rotate(out.begin(), best, best + 1);
  return out;
}

// ---------------------------------------------------------------------------

LimitReport estimate_limit(const SequenceSpec& s, const LimitConfig& cfg) {
  cfg.metric.validate();
  if (cfg.schedule.size() < 3 || !std::is_sorted(cfg.schedule.begin(), cfg.schedule.end()) ||
      std::adjacent_find(cfg.schedule.begin(), cfg.schedule.end()) != cfg.schedule.end() ||
      cfg.schedule.front() < 1)
    throw std::invalid_argument("estimate_limit: schedule must be increasing, >= 1, with >= 3 entries");
  s.validate();

  LimitReport r;
  r.spec = s;
  r.config = cfg;
  r.profile = extract_profile(s);
  std::optional<PaddedCloud> oracle_cloud;
  try {
    r.oracle = oracle_for(s);
    oracle_cloud.emplace(r.oracle->limit, cfg.metric);
  } catch (const IndeterminateProfile& e) {
    r.oracle_note = e.what();
  } catch (const std::runtime_error& e) {
    r.oracle_note = std::string("oracle limit too large to sample: ") + e.what();
  }

  const double eps = cfg.metric.mesh;
  std::optional<PaddedCloud> previous;
  for (double n : cfg.schedule) {
    LimitStep step;
    step.n = n;
    PointCloud cloud = sample_ball(s.conjugate_at(n), cfg.metric.radius, eps);
    PaddedCloud padded(cloud, cfg.metric);
    if (oracle_cloud) step.oracle_distance = chabauty_dist(padded, *oracle_cloud);
    try {
      step.dimension = estimate_lie_algebra(cloud).dim();
      if (n == cfg.schedule.back()) {
        const auto matches = classify(cloud, cfg.metric);
        if (!matches.empty()) step.match = matches.front();
      }
    } catch (const TooFewPoints&) {
      step.dimension = 0;
    }
    if (previous) r.cauchy_distance = chabauty_dist(padded, *previous);
    previous.emplace(std::move(padded));
    r.steps.push_back(step);
    r.final_cloud = std::move(cloud);
  }
  r.limit_dimension = r.steps.back().dimension;
  r.components = count_components(r.final_cloud, 3 * eps);
  r.cauchy = r.cauchy_distance < 3 * eps;
  if (r.cauchy) r.final_match = r.steps.back().match;
  if (r.final_match && oracle_cloud)
    r.match_to_oracle = chabauty_dist(PaddedCloud(r.final_match->descriptor, cfg.metric), *oracle_cloud);
  if (r.final_match && r.final_match->descriptor.family == Family::WSlant)
    r.warnings.push_back(
        "limit matches WSlant(c), c != 0, which is not conjugate to N+ x| {(t,0)}; the closed-form list of "
        "limits of Borel conjugates (B, N+ x| {(t,0)}, R^2) omits it");
  return r;
}

namespace {

nlohmann::json match_json(const Match& m) {
  return {{"descriptor", to_json(m.descriptor)},
          {"label", m.descriptor.to_string()},
          {"distance", m.distance},
          {"algebra_fit", m.algebra_fit}};
}

}  // namespace

nlohmann::json LimitReport::to_json() const {
  nlohmann::json j;
  j["sequence"] = spec.to_json();
  j["profile"] = profile.to_json();
  j["config"] = {{"radius", config.metric.radius},
                 {"mesh", config.metric.mesh},
                 {"sphere_pad", config.metric.sphere_pad},
                 {"schedule", config.schedule}};
  if (oracle) {
    j["oracle"] = {{"limit", chabauty::to_json(oracle->limit)},
                   {"label", oracle->limit.to_string()},
                   {"rule", oracle->rule}};
  } else {
    j["oracle"] = nullptr;
    j["oracle_note"] = oracle_note;
  }
  nlohmann::json steps_j = nlohmann::json::array();
  for (const auto& st : steps) {
    nlohmann::json e = {{"n", st.n}, {"dimension", st.dimension}};
    e["oracle_distance"] = st.oracle_distance >= 0 ? nlohmann::json(st.oracle_distance) : nlohmann::json();
    e["match"] = st.match ? match_json(*st.match) : nlohmann::json();
    steps_j.push_back(std::move(e));
  }
  j["steps"] = std::move(steps_j);
  j["limit_dimension"] = limit_dimension;
  j["components"] = components;
  j["cauchy"] = cauchy;
  j["cauchy_distance"] = cauchy_distance;
  j["final_match"] = final_match ? match_json(*final_match) : nlohmann::json();
  j["warnings"] = warnings;
  if (final_match && final_match->descriptor.family == Family::HeisLine) {
    const auto& p = final_match->descriptor.params;
    const HeisConstraint h = heis_constraint(p[0], p[1], p[2]);
    j["heisline_constraint"] = {{"and_binds_tighter", h.and_first}, {"left_to_right", h.left_to_right}};
  }
  j["match_to_oracle"] = match_to_oracle >= 0 ? nlohmann::json(match_to_oracle) : nlohmann::json();
  j["agrees"] = agrees();
  return j;
}

std::string LimitReport::curve_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "n,distance\n";
  for (const auto& st : steps) {
    os << st.n << ',';
    if (st.oracle_distance >= 0) os << st.oracle_distance;
    os << '\n';
  }
  return os.str();
}

UnipotentCheck unipotent_limit_check(const LimitReport& r, const SequenceSpec& s) {
  UnipotentCheck c;
  const bool outer_id = s.outer.sl2.isIdentity(1e-12) && s.outer.trans.isZero(1e-12);
  c.applicable = r.profile.v_diverges && r.profile.a_is_one && r.profile.s_is_zero && outer_id;
  if (!c.applicable) return c;
  const double cut = 3 * r.config.metric.mesh;
  for (std::size_t i = 0; i < r.final_cloud.size(); ++i) {
    const Element x = r.final_cloud.point(i);
    if (x.trans.norm() > cut) continue;
    ++c.checked;
    c.worst = std::max(c.worst, std::abs(x.sl2.trace() - 2));
  }
  c.vacuous = c.checked == 0;
  c.pass = c.worst <= 1e-3;
  return c;
}

std::vector<SequenceSpec> load_witnesses(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<SequenceSpec> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw std::runtime_error("cannot read " + f.string());
    nlohmann::json j;
    try {
      in >> j;
      SequenceSpec s = SequenceSpec::from_json(j);
      if (s.name.empty()) s.name = f.stem().string();
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw std::runtime_error(f.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace chabauty
