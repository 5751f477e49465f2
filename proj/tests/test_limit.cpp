#include "chabauty/limit.hpp"

#include <doctest.h>

#include <map>

using namespace chabauty;

namespace {

const std::vector<SequenceSpec>& witnesses() {
  static const auto all = load_witnesses(std::filesystem::path(CHABAUTY_DATA_DIR) / "witnesses");
  return all;
}

const SequenceSpec& witness(const std::string& name) {
  for (const auto& s : witnesses())
    if (s.name == name) return s;
  throw std::runtime_error("no witness " + name);
}

SubgroupDescriptor nsr2_along(double phi) {
  return SubgroupDescriptor::make(Family::NPlusSemiR2, {}, Element::linear(rotation(-phi)));
}

SubgroupDescriptor shifted(SubgroupDescriptor d, double x, double y) {
  return conjugate_descriptor(d, Element::translation(x, y));
}

// Limits predicted by the classification theorems for each bundled witness.
std::map<std::string, SubgroupDescriptor> expected_limits() {
  using D = SubgroupDescriptor;
  const double inf = kInfinity;
  return {
      {"thm1.5_both_2n_n", nsr2_along(std::atan2(1, 2))},
      {"thm1.5_both_n2_n", nsr2_along(0)},
      {"thm1.5_both_nn", nsr2_along(M_PI / 4)},
      {"thm1.5_conv_a", shifted(D::levi(), 1, 2)},
      {"thm1.5_conv_b", D::levi()},
      {"thm1.5_conv_c", shifted(D::levi(), -2, 0)},
      {"thm1.5_one_0n", nsr2_along(M_PI / 2)},
      {"thm1.5_one_n0", nsr2_along(0)},
      {"thm1.5_one_n3", nsr2_along(0)},
      {"thm1.6_bounded", D::make(Family::MaxCompact, {}, Element{diagonal(2.0), Vec2<double>(1, -1)})},
      {"thm1.6_c1_0n", D::v_line(0)},
      {"thm1.6_c1_1n", D::v_line(0)},
      {"thm1.6_c1_n_n2", D::v_line(0)},
      {"thm1.6_c2_n0", D::v_line(inf)},
      {"thm1.6_c2_n1", D::v_line(inf)},
      {"thm1.6_c2_n2_n", D::v_line(inf)},
      {"thm1.6_c3_2n_n", D::v_line(-2)},
      {"thm1.6_c3_a", D::v_line(0)},
      {"thm1.6_c3_neg", D::v_line(3)},
      {"thm1.6_c3_nn", D::v_line(-1)},
      {"thm1.6_c3_s", D::v_line(0)},
      {"thm1.6_tilde_a", D::tilde_n_plus()},
      {"thm1.6_tilde_s", D::tilde_n_plus()},
      {"thm1.6_tilde_sv", shifted(D::tilde_n_plus(), 1, 2)},
      {"thm1.7_c1_a", D::heis_line(1, -0.5, -0.5)},
      {"thm1.7_c1_b", D::heis_line(1, -1, 0)},
      {"thm1.7_c1_c", D::heis_line(1, -0.25, -0.75)},
      {"thm1.7_c2_a", D::n_plus_c(0.5)},
      {"thm1.7_c2_b", D::n_plus_c(1)},
      {"thm1.7_c2_c", D::heis_line(1, -1, 0.5)},
      {"thm1.7_c3_a", D::v_line(0)},
      {"thm1.7_c3_b", D::v_line(0)},
      {"thm1.7_c3_c", D::v_line(0)},
      {"thm1.7_c4_a", D::v_line(inf)},
      {"thm1.7_c4_b", D::v_line(inf)},
      {"thm1.7_c4_c", D::v_line(inf)},
      {"thm1.7_c5_a", D::v_line(-1)},
      {"thm1.7_c5_b", D::v_line(-0.5)},
      {"thm1.7_c5_c", D::v_line(-3)},
      {"thm1.7_n_as", D::n_plus()},
      {"thm1.7_n_s", D::n_plus()},
      {"thm1.7_n_s2", D::n_plus()},
      {"thm1.8_bounded_a", shifted(D::borel_sl2(), 1, 2)},
      {"thm1.8_bounded_b", D::borel_sl2()},
      {"thm1.8_bounded_c", shifted(D::borel_sl2(), 0, 1)},
      {"thm1.8_c1_a", D::translations2()},
      {"thm1.8_c1_b", D::translations2()},
      {"thm1.8_c1_c", D::translations2()},
      {"thm1.8_c2_a", D::n_plus_semi_v0()},
      {"thm1.8_c2_b", D::n_plus_semi_v0()},
      {"thm1.8_c2_c", D::n_plus_semi_v0()},
      {"thm1.8_c2_inf", D::translations2()},
      {"thm1.8_c2_slant", D::w_slant(1)},
      {"thm1.8_c2_slant4", D::w_slant(4)},
      {"thm1.8_c2_slanthalf", D::w_slant(0.5)},
      {"thm1.8_c3_a", D::translations2()},
      {"thm1.8_c3_b", D::translations2()},
      {"thm1.8_c3_c", D::translations2()},
      {"thm1.9_np_a", D::n_plus_c(-5)},
      {"thm1.9_np_b", D::n_plus()},
      {"thm1.9_np_c", D::n_plus_c(-1)},
      {"thm1.9_np_k", D::make(Family::NPlus, {}, Element::linear(rotation(M_PI / 4)))},
      {"thm1.9_v0", D::v_line(0)},
      {"thm1.9_v0_b", D::v_line(0)},
      {"thm1.9_v0_c", D::v_line(0)},
  };
}

}  // namespace

TEST_CASE("every witness has a frozen expected limit") {
  const auto table = expected_limits();
  CHECK(witnesses().size() == table.size());
  for (const auto& s : witnesses()) CHECK_MESSAGE(table.count(s.name) == 1, s.name);
}

TEST_CASE("oracles reproduce the frozen limits") {
  const MetricConfig cfg{2.0, 0.1, 64};
  for (const auto& [name, want] : expected_limits()) {
    const OracleResult o = oracle_for(witness(name));
    const auto got = canonicalize(o.limit);
    const auto exp = canonicalize(want);
    CHECK_MESSAGE(got.family == exp.family, name << ": " << got.to_string());
    for (int k = 0; k < 3; ++k) {
      const bool same = std::isinf(exp.params[k]) ? got.params[k] == exp.params[k]
                                                  : std::abs(got.params[k] - exp.params[k]) <= 1e-9;
      CHECK_MESSAGE(same, name);
    }
    if (got.family != Family::VLine) CHECK_MESSAGE(dist(got.conjugator, exp.conjugator) <= 1e-9, name);
    if (got.family == Family::Levi || got.family == Family::NPlusSemiR2) continue;
    CHECK_MESSAGE(chabauty_dist(got, exp, cfg) <= 1e-9, name);
  }
}

TEST_CASE("far conjugates sit near the oracle limit") {
  // Direct check at n = 10^4 with no profile analysis involved.  Levi
  // witnesses are left to the acceptance run.
  const MetricConfig cfg{};
  for (const auto& s : witnesses()) {
    if (s.base.family == Family::Levi) continue;
    const auto far = s.conjugate_at(1e4);
    const double d = chabauty_dist(far, oracle_for(s).limit, cfg);
    CHECK_MESSAGE(d <= 0.1, s.name << ": " << d);
  }
}

TEST_CASE("indeterminate profiles are reported") {
  AsymptoticProfile p;
  p.alpha = p.beta = Limit::none();
  CHECK_THROWS_AS(oracle_unipotent(p), IndeterminateProfile);
}

TEST_CASE("classify recognizes catalog clouds") {
  const MetricConfig cfg{};
  const Element h{rotation(0.3), Vec2<double>(0.5, -0.2)};
  for (const auto& d : {SubgroupDescriptor::n_plus_c(1.0), SubgroupDescriptor::v_line(2),
                        conjugate_descriptor(SubgroupDescriptor::heis_line(1, 2, -1), h),
                        SubgroupDescriptor::tilde_n_plus(), SubgroupDescriptor::w_slant(1),
                        conjugate_descriptor(SubgroupDescriptor::n_plus_semi_v0(), h)}) {
    const auto cloud = sample_ball(d, cfg.radius, cfg.mesh);
    const auto matches = classify(cloud, cfg);
    REQUIRE(!matches.empty());
    CHECK_MESSAGE(chabauty_dist(matches.front().descriptor, d, cfg) <= 0.1,
                  d.to_string() << " -> " << matches.front().descriptor.to_string());
    for (std::size_t i = 1; i < matches.size(); ++i) CHECK(matches[i].distance >= matches[i - 1].distance - 1e-12);
  }
}

TEST_CASE("estimate_limit on short schedules") {
  LimitConfig lc;
  lc.schedule = {10, 100, 1000, 10000};

  SUBCASE("translation line") {
    const auto r = estimate_limit(witness("thm1.9_v0"), lc);
    CHECK(r.cauchy);
    CHECK(r.agrees());
    CHECK(r.limit_dimension == 1);
    CHECK(r.warnings.empty());
    const auto u = unipotent_limit_check(r, witness("thm1.9_v0"));
    CHECK(u.applicable);
    CHECK(!u.vacuous);
    CHECK(u.pass);
    const auto j = r.to_json();
    CHECK(j.at("agrees") == true);
    CHECK(j.at("steps").size() == 4);
    CHECK(r.curve_csv().rfind("n,distance\n", 0) == 0);
  }
  SUBCASE("two components") {
    const auto r = estimate_limit(witness("thm1.6_tilde_s"), lc);
    CHECK(r.agrees());
    CHECK(r.components == 2);
  }
  SUBCASE("slanted limit of Borel conjugates") {
    const auto r = estimate_limit(witness("thm1.8_c2_slant"), lc);
    REQUIRE(r.final_match.has_value());
    CHECK(r.final_match->descriptor.family == Family::WSlant);
    CHECK(r.agrees());
    CHECK(r.warnings.size() == 1);
  }
  SUBCASE("HeisLine reports the closure constraint") {
    const auto r = estimate_limit(witness("thm1.7_c1_a"), lc);
    CHECK(r.agrees());
    const auto j = r.to_json();
    REQUIRE(j.contains("heisline_constraint"));
    CHECK(j["heisline_constraint"]["and_binds_tighter"] == true);
    CHECK(j["heisline_constraint"]["left_to_right"] == true);
  }
  SUBCASE("reports are deterministic") {
    const auto a = estimate_limit(witness("thm1.7_c2_a"), lc).to_json();
    const auto b = estimate_limit(witness("thm1.7_c2_a"), lc).to_json();
    CHECK(a.dump() == b.dump());
  }
}

TEST_CASE("schedule validation") {
  LimitConfig lc;
  lc.schedule = {10, 100};
  CHECK_THROWS_AS(estimate_limit(witness("thm1.9_v0"), lc), std::invalid_argument);
  lc.schedule = {10, 1000, 100};
  CHECK_THROWS_AS(estimate_limit(witness("thm1.9_v0"), lc), std::invalid_argument);
}
