// Acceptance run: one PASS/FAIL line per criterion, details indented below.
// Exit status 0 iff every criterion passes.

#include "chabauty/irs.hpp"
#include "chabauty/limit.hpp"
#include "support.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#ifndef CHABAUTY_DATA_DIR
#define CHABAUTY_DATA_DIR "data"
#endif

using namespace chabauty;

namespace {

// Tolerances.
constexpr double kGroupTol = 1e-10;
constexpr double kAdjointTol = 1e-4;
constexpr double kProjectorTol = 1e-9;
constexpr double kOracleTol = 0.1;
constexpr double kSlantMargin = 0.2;
constexpr double kTraceTol = 1e-3;
constexpr double kSpearmanMin = 0.9;
constexpr double kAlgebraTol = 0.05;
constexpr double kDiracTol = 1e-9;
constexpr int kRandomElements = 10'000;
constexpr int kLineSequences = 20;
constexpr int kIrsSeeds = 10;
constexpr int kIrsAtoms = 200;

const MetricConfig kCfg{};  // R = 4, eps = 0.05

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back((ok ? "ok    " : "FAIL  ") + what);
  }
  void note(const std::string& what) { details.push_back("info  " + what); }
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared witness reports.

const std::vector<SequenceSpec>& witnesses() {
  static const auto all = load_witnesses(std::filesystem::path(CHABAUTY_DATA_DIR) / "witnesses");
  return all;
}

const LimitReport& report(const SequenceSpec& s) {
  static std::map<std::string, LimitReport> cache;
  auto it = cache.find(s.name);
  if (it == cache.end()) {
    LimitConfig lc;
    lc.metric = kCfg;
    it = cache.emplace(s.name, estimate_limit(s, lc)).first;
  }
  return it->second;
}

const SequenceSpec& witness(const std::string& name) {
  for (const auto& s : witnesses())
    if (s.name == name) return s;
  throw std::runtime_error("no witness " + name);
}

std::vector<const SequenceSpec*> witnesses_for(const std::string& id) {
  std::vector<const SequenceSpec*> out;
  for (const auto& s : witnesses())
    if (s.theorem == id) out.push_back(&s);
  return out;
}

double final_oracle_distance(const LimitReport& r) { return r.steps.back().oracle_distance; }

std::string describe(const LimitReport& r) {
  return fmt("%-20s oracle %-28s match %-28s d(n=1e4) %.4f  match-oracle %.4f", r.spec.name.c_str(),
             r.oracle ? r.oracle->limit.to_string().c_str() : "none",
             r.final_match ? r.final_match->descriptor.to_string().c_str() : "-", final_oracle_distance(r),
             r.match_to_oracle);
}

// Witness matches its oracle: final match within kOracleTol and the n = 1e4
// cloud within kOracleTol of the oracle limit.
bool matches_oracle(const LimitReport& r) {
  return r.oracle && r.agrees() && final_oracle_distance(r) >= 0 && final_oracle_distance(r) <= kOracleTol;
}

// ---------------------------------------------------------------------------
// 1. Group core.

Outcome group_core() {
  Outcome o;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI), r(-1, 1), s(-2, 2), t(-3, 3);
  auto draw = [&] { return Element{iwasawa(angle(rng), r(rng), s(rng)), Vec2<double>(t(rng), t(rng))}; };
  auto gap = [](const Element& a, const Element& b) {
    return (embed(a) - embed(b)).cwiseAbs().maxCoeff() / (1 + embed(a).cwiseAbs().maxCoeff());
  };
  double assoc = 0, inverse = 0, hom = 0, adj = 0;
  for (int i = 0; i < kRandomElements; ++i) {
    const Element a = draw(), b = draw(), c = draw();
    assoc = std::max(assoc, gap(mul(mul(a, b), c), mul(a, mul(b, c))));
    inverse = std::max({inverse, gap(mul(a, inv(a)), Element::identity()), gap(mul(inv(a), a), Element::identity())});
    hom = std::max(hom, gap(conj(a, mul(b, c)), mul(conj(a, b), conj(a, c))));
    if (i % 10 == 0) {
      const double h = 1e-5;
      for (int k = 0; k < 5; ++k) {
        const Lie X = Lie::Unit(k);
        const Element p = conj(a, exp<double>(h * X)), m = conj(a, exp<double>(-h * X));
        const Lie fd = make_lie<double>((p.sl2 - m.sl2) / (2 * h), (p.trans - m.trans) / (2 * h));
        const Lie ad = adjoint(a, X);
        adj = std::max(adj, (fd - ad).cwiseAbs().maxCoeff() / (1 + ad.cwiseAbs().maxCoeff()));
      }
    }
  }
  o.require(assoc <= kGroupTol, fmt("associativity over %d triples: %.2e (tol %.0e, relative)", kRandomElements, assoc, kGroupTol));
  o.require(inverse <= kGroupTol, fmt("inverses: %.2e", inverse));
  o.require(hom <= kGroupTol, fmt("conjugation homomorphism: %.2e", hom));
  o.require(adj <= kAdjointTol, fmt("adjoint vs central differences (h = 1e-5): %.2e (tol %.0e)", adj, kAdjointTol));
  return o;
}

// ---------------------------------------------------------------------------
// 2. Catalog identities.

// Points of {(u_{at}, (ct + abt^2/2, bt))} in B_{R+eps}, taken straight from
// the defining formula with spacing eps/4 along the curve, the grid shifted
// by phase steps.
PointCloud literal_heis(double a, double b, double c, const MetricConfig& cfg, double phase = 0) {
  const double reach = cfg.radius + cfg.mesh;
  const double rate = std::hypot(a, b) > 0 ? std::hypot(a, b) : std::abs(c);
  const double tmax = reach / rate;
  std::vector<Embedded<double>> pts;
  auto at = [&](double t) { return Element{upper_unipotent(a * t), Vec2<double>(c * t + a * b * t * t / 2, b * t)}; };
  auto speed = [&](double t) { return std::sqrt(a * a + std::pow(c + a * b * t, 2) + b * b); };
  const double t0 = phase * cfg.mesh / 4 / speed(0);
  for (int dir : {1, -1}) {
    double t = dir > 0 ? t0 : t0 - cfg.mesh / 4 / speed(t0);
    while (std::abs(t) <= tmax) {
      const Element x = at(t);
      if (dist_to_identity(x) <= reach) pts.push_back(embed(x));
      t += dir * cfg.mesh / 4 / speed(t);
    }
  }
  PointCloud P;
  P.coords.resize(6, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) P.coords.col(static_cast<Eigen::Index>(i)) = pts[i];
  P.radius = cfg.radius;
  P.mesh = cfg.mesh;
  return P;
}

double literal_vs(double a, double b, double c, const SubgroupDescriptor& d) {
  return chabauty_dist(literal_heis(a, b, c, kCfg), sample_ball(d, kCfg.radius, kCfg.mesh), kCfg);
}

Outcome catalog_identities() {
  Outcome o;
  const double tol = 2 * kCfg.mesh;
  for (double c : {0.0, 1.0, -1.0, 3.0, -3.0}) {
    const auto npc = c == 0 ? SubgroupDescriptor::n_plus() : SubgroupDescriptor::n_plus_c(c);
    const double d = literal_vs(1, 0, c, npc);
    o.require(d <= tol, fmt("V_(1,0,%g) = N+_%g: %.4f (tol %.2f)", c, c, d, tol));
  }
  for (double c : {0.0, 1.0, -1.0, 3.0, -3.0}) {
    const double d = literal_vs(0, 1, c, SubgroupDescriptor::v_line(c));
    o.require(d <= tol, fmt("V_(0,1,%g) = V_%g: %.4f", c, c, d));
  }
  {
    const double d = literal_vs(0, 0, 1, SubgroupDescriptor::v_line(kInfinity));
    o.require(d <= tol, fmt("V_(0,0,1) = V_inf: %.4f", d));
  }
  const std::vector<std::array<double, 3>> triples{{1, 2, -1}, {1, -0.5, -0.5}, {0.5, 1, 2}, {0, 1, 3}, {1, 0, 2}};
  double worst = 0;
  for (const auto& [a, b, c] : triples) {
    const PointCloud base = literal_heis(a, b, c, kCfg);
    for (double lam : {-2.0, 0.5, 5.0})
      worst = std::max(worst, chabauty_dist(literal_heis(lam * a, lam * b, lam * c, kCfg, 0.5), base, kCfg));
  }
  o.require(worst <= tol, fmt("V_(la,lb,lc) = V_(a,b,c) for l in {-2, 1/2, 5} on %zu triples: worst %.4f",
                              triples.size(), worst));
  // From the defining formula, V_(0,b,c) = {(I,(ct, bt))}: the second slot is
  // the y-component and the third the x-component.
  double fixed = 0;
  for (double c : {0.0, 1.0, -1.0, 3.0, -3.0}) fixed = std::max(fixed, literal_vs(0, c, 1, SubgroupDescriptor::v_line(c)));
  fixed = std::max(fixed, literal_vs(0, 1, 0, SubgroupDescriptor::v_line(kInfinity)));
  o.note(fmt("V_(0,c,1) = V_c for c in {0, +-1, +-3} and V_(0,1,0) = V_inf hold: worst %.4f", fixed));
  o.note(fmt("V_(0,1,c) = V_(1/c) and V_(0,0,1) = V_0: %.4f, %.4f", literal_vs(0, 1, 3, SubgroupDescriptor::v_line(1.0 / 3)),
             literal_vs(0, 0, 1, SubgroupDescriptor::v_line(0))));
  return o;
}

// ---------------------------------------------------------------------------
// 3-7. Conjugacy limits of the five base families.

Outcome levi_limits() {
  Outcome o;
  // Metric resolution for the monotonicity check: distances are measured on eps-nets.
  const double slack = kCfg.mesh / 2;
  for (const char* name : {"thm1.5_one_n0", "thm1.5_one_0n", "thm1.5_both_nn", "thm1.5_one_n3"}) {
    const auto& r = report(witness(name));
    double rise = 0;
    for (std::size_t i = 1; i < r.steps.size(); ++i)
      rise = std::max(rise, r.steps[i].oracle_distance - r.steps[i - 1].oracle_distance);
    const bool fam = r.oracle && (r.oracle->limit.family == Family::Levi || r.oracle->limit.family == Family::NPlusSemiR2);
    o.require(matches_oracle(r) && fam && rise <= slack,
              describe(r) + fmt("  largest rise %.4f (slack %.3f)", rise, slack));
  }
  for (const auto* s : witnesses_for("1.5")) {
    const auto& r = report(*s);
    if (std::string(s->name).find("conv") != std::string::npos) o.require(matches_oracle(r), describe(r));
  }
  return o;
}

Outcome compact_limits() {
  Outcome o;
  const std::set<std::string> two_components{"thm1.6_tilde_s", "thm1.6_tilde_a"};
  for (const auto* s : witnesses_for("1.6")) {
    const auto& r = report(*s);
    o.require(matches_oracle(r), describe(r));
    if (two_components.count(s->name))
      o.require(r.components == 2, fmt("%s: limit cloud has %d components", s->name.c_str(), r.components));
  }
  // Its -I coset sits at distance > R from the identity, so B_R sees one component.
  o.note(fmt("thm1.6_tilde_sv (TildeNPlus shifted by (1,2)): %d component(s) inside B_R", report(witness("thm1.6_tilde_sv")).components));
  return o;
}

Outcome diagonal_limits() {
  Outcome o;
  for (const auto* s : witnesses_for("1.7")) {
    const auto& r = report(*s);
    o.require(matches_oracle(r), describe(r));
    if (r.final_match && r.final_match->descriptor.family == Family::HeisLine) {
      const auto& d = r.final_match->descriptor;
      const auto c = canonicalize(d);
      const bool canonical = c.family == Family::HeisLine && c.params == d.params;
      const HeisConstraint h = heis_constraint(d.params[0], d.params[1], d.params[2]);
      o.require(canonical && (h.and_first || h.left_to_right),
                fmt("%s: %s canonical %s; constraint with 'and' first %s, left to right %s", s->name.c_str(),
                    d.to_string().c_str(), canonical ? "yes" : "no", h.and_first ? "holds" : "fails",
                    h.left_to_right ? "holds" : "fails"));
    }
  }
  return o;
}

Outcome borel_limits() {
  Outcome o;
  for (const auto* s : witnesses_for("1.8")) o.require(matches_oracle(report(*s)), describe(report(*s)));
  const auto& r = report(witness("thm1.8_c2_slant"));
  const PaddedCloud cloud(r.final_cloud, kCfg);
  const double to_slant = chabauty_dist(cloud, PaddedCloud(SubgroupDescriptor::w_slant(1), kCfg));
  const double to_v0 = chabauty_dist(cloud, PaddedCloud(SubgroupDescriptor::n_plus_semi_v0(), kCfg));
  const bool slant = r.cauchy && to_slant <= kOracleTol && to_v0 - to_slant >= kSlantMargin;
  o.require(slant, fmt("alpha = n^2, beta = n: cauchy %s, d(WSlant(1)) %.4f, d(NPlusSemiV0) %.4f, margin %.4f (min %.1f)",
                       r.cauchy ? "yes" : "no", to_slant, to_v0, to_v0 - to_slant, kSlantMargin));
  o.require(!r.warnings.empty(), "report flags the discrepancy: " + (r.warnings.empty() ? std::string("none") : r.warnings.front()));
  return o;
}

Outcome unipotent_base_limits() {
  Outcome o;
  for (const auto* s : witnesses_for("1.9")) {
    const auto& r = report(*s);
    const Family got = r.final_match ? r.final_match->descriptor.family : Family::Levi;
    if (r.profile.beta.is_finite()) {
      o.require(matches_oracle(r) && (got == Family::NPlus || got == Family::NPlusC), describe(r));
    } else if (s->beta.terms().size() == 1 && s->beta.leading() == std::pair<Rational, double>{Rational(1), 1.0}) {
      o.require(matches_oracle(r) && got == Family::VLine, describe(r));
    } else {
      // Slower divergence: the n = 1e4 conjugate is itself a member of another family.
      o.require(matches_oracle(r), describe(r));
      o.note(fmt("%s: beta = %s, so g_n N+ g_n^-1 is %s at n = 1e4", s->name.c_str(), s->beta.to_string().c_str(),
                 canonicalize(s->conjugate_at(1e4)).to_string().c_str()));
    }
  }
  return o;
}

// ---------------------------------------------------------------------------
// 8. Unipotent limits.

Outcome unipotent_limits() {
  Outcome o;
  int applicable = 0, checked = 0;
  double worst = 0;
  for (const auto& s : witnesses()) {
    if (!report(s).profile.v_diverges) continue;
    const UnipotentCheck u = unipotent_limit_check(report(s), s);
    if (!u.applicable) continue;
    ++applicable;
    checked += u.checked;
    worst = std::max(worst, u.worst);
    if (!u.pass) o.require(false, fmt("%s: |trace - 2| = %.2e", s.name.c_str(), u.worst));
  }
  o.require(applicable > 0 && checked > 0 && worst <= kTraceTol,
            fmt("%d divergent-translation witnesses, %d elements with |v| <= 3 eps, worst |trace - 2| %.2e (tol %.0e)",
                applicable, checked, worst, kTraceTol));
  return o;
}

// ---------------------------------------------------------------------------
// 9. Grassmannian embedding.

Outcome grassmannian_shadow() {
  Outcome o;
  std::mt19937_64 rng(9);
  double worst_proj = 0;
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Lie> vs(1 + rep % 5);
    for (auto& v : vs)
      for (int k = 0; k < 5; ++k) v(k) = g(rng);
    const Projector P = proj_matrix(Subspace::span(vs));
    worst_proj = std::max({worst_proj, (P * P - P).cwiseAbs().maxCoeff(), (P - P.transpose()).cwiseAbs().maxCoeff()});
  }
  o.require(worst_proj <= kProjectorTol, fmt("projector idempotence/symmetry over 200 subspaces: %.2e", worst_proj));
  double lowest = 1;
  for (int i = 0; i < kLineSequences; ++i) {
    const auto seq = testing::random_line_sequence(rng);
    std::vector<double> gd, cd;
    for (const auto& d : seq.terms) {
      gd.push_back(grass_dist(lie_subspace(d), lie_subspace(seq.limit)));
      cd.push_back(chabauty_dist(d, seq.limit, kCfg));
    }
    lowest = std::min(lowest, testing::spearman(gd, cd));
  }
  o.require(lowest >= kSpearmanMin, fmt("Spearman(grass_dist, chabauty_dist) over %d line sequences: min %.3f (min %.1f)",
                                        kLineSequences, lowest, kSpearmanMin));
  return o;
}

// ---------------------------------------------------------------------------
// 10. Lie algebra convergence.

Outcome algebra_shadow() {
  Outcome o;
  int used = 0, connected = 0, exponential = 0;
  for (const auto& s : witnesses()) {
    const auto oracle = oracle_for(s);
    if (identity_dimension(s.base.family) != identity_dimension(oracle.limit.family)) continue;
    std::vector<SubgroupDescriptor> ds;
    for (double n : {10.0, 100.0, 1000.0, 10000.0}) ds.push_back(s.conjugate_at(n));
    const auto curve = algebra_convergence_check(ds, oracle.limit);
    bool down = true;
    for (std::size_t i = 1; i < curve.size(); ++i) down = down && curve[i] <= curve[i - 1] + 1e-12;
    ++used;
    if (!down || curve.back() > kAlgebraTol)
      o.require(false, fmt("%s: curve %.3g %.3g %.3g %.3g", s.name.c_str(), curve[0], curve[1], curve[2], curve[3]));
  }
  o.require(o.pass && used > 0, fmt("%d equal-dimension witnesses: algebra curves non-increasing, final <= %.2f", used, kAlgebraTol));
  for (const auto& s : witnesses()) {
    const Family b = s.base.family;
    if (b != Family::Diagonal && b != Family::BorelSL2 && b != Family::NPlus) continue;
    ++exponential;
    const auto& r = report(s);
    if (r.components == 1) ++connected;
    else o.require(false, fmt("%s: %d components", s.name.c_str(), r.components));
  }
  o.require(connected == exponential, fmt("limit clouds of %d exponential-group witnesses connected: %d", exponential, connected));
  return o;
}

// ---------------------------------------------------------------------------
// 11. Invariant random subgroups.

Outcome irs_suite() {
  Outcome o;
  const MetricConfig m = irs_metric();
  const auto plane = dirac_plane(kIrsAtoms, 1, m), space = dirac_space(kIrsAtoms, 1, m);
  o.require(plane.statistic <= kDiracTol && space.statistic <= kDiracTol,
            fmt("Dirac at R^2 and R^3: %.2e, %.2e (tol %.0e)", plane.statistic, space.statistic, kDiracTol));
  int invariant = 0, rejected = 0;
  std::string so3, levi;
  for (int seed = 1; seed <= kIrsSeeds; ++seed) {
    const auto a = so3_example(kIrsAtoms, static_cast<std::uint64_t>(seed), m);
    invariant += a.pass ? 1 : 0;
    so3 += fmt(" %.4f/%.4f", a.statistic, a.threshold);
    const auto b = levi_orbit(kIrsAtoms, 100, static_cast<std::uint64_t>(seed), m);
    rejected += b.pass ? 0 : 1;
    levi += fmt(" %.3f/%.3f", b.statistic, b.threshold);
  }
  o.require(invariant == kIrsSeeds, fmt("Haar pushforward below its 95%% quantile: %d/%d seeds", invariant, kIrsSeeds));
  o.note("statistic/quantile:" + so3);
  o.require(rejected == kIrsSeeds, fmt("Levi orbit above its 95%% quantile: %d/%d seeds", rejected, kIrsSeeds));
  o.note("statistic/quantile:" + levi);
  std::vector<double> med;
  for (double T : {10.0, 100.0, 1000.0}) med.push_back(levi_escape_demo(T, m));
  o.require(med[1] <= med[0] && med[2] <= med[1],
            fmt("Levi escape medians at T = 10, 100, 1000: %.4f %.4f %.4f", med[0], med[1], med[2]));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "run only these criteria (1-11)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"group core identities and adjoint", group_core},
      {"catalog identities for V_(a,b,c)", catalog_identities},
      {"Levi conjugates", levi_limits},
      {"maximal compact conjugates", compact_limits},
      {"diagonal conjugates", diagonal_limits},
      {"Borel conjugates", borel_limits},
      {"unipotent conjugates", unipotent_base_limits},
      {"limits with divergent translation are unipotent", unipotent_limits},
      {"Grassmannian embedding", grassmannian_shadow},
      {"Lie algebra convergence", algebra_shadow},
      {"invariant random subgroups", irs_suite},
  };
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ++ran;
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %2d  %s  (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), secs);
    for (const auto& d : o.details) std::printf("        %s\n", d.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria pass\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
