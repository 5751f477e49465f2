#include "chabauty/sequence.hpp"

#include <doctest.h>

#include <cmath>

using namespace chabauty;

namespace {

SequenceSpec spec(const char* text) { return SequenceSpec::from_json(nlohmann::json::parse(text)); }

}  // namespace

TEST_CASE("rationals reduce and order") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(1, -2) == Rational(-1, 2));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(-3, 2) < Rational(-1));
  CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
}

TEST_CASE("power-law parsing") {
  const auto p = PowerSum::parse("n^2 - 3 n + 1/n");
  for (double n : {1.0, 2.0, 7.5, 1e3}) CHECK(p.eval(n) == doctest::Approx(n * n - 3 * n + 1 / n));
  const auto q = PowerSum::parse("2*n^(1/2)");
  CHECK(q.eval(9) == doctest::Approx(6));
  const auto r = PowerSum::parse("-0.5 n^(-3/2)");
  CHECK(r.eval(4) == doctest::Approx(-0.0625));
  CHECK(PowerSum::parse("n - n").is_zero());
  CHECK(PowerSum::parse("4").is_constant());
  CHECK(PowerSum::parse("3 + 1/n").leading().first == Rational(0));
  CHECK(PowerSum::from_json(nlohmann::json::parse(R"([{"coef": 2, "power": "1/3"}])")).eval(8) == doctest::Approx(4));
  CHECK(PowerSum::from_json(2.5).eval(100) == 2.5);
}

TEST_CASE("unsupported expressions are rejected") {
  for (const char* bad : {"(-1)^n n", "n^", "log n", "2^n", "n^(1/0)", "", "n n n +"})
    CHECK_THROWS_AS(PowerSum::parse(bad), std::invalid_argument);
  CHECK_THROWS(PowerSum::from_json(nlohmann::json::parse("[{\"coef\": 1}]")));
  CHECK_THROWS(PowerSum::from_json(nlohmann::json(true)));
}

TEST_CASE("limits") {
  CHECK(PowerSum::parse("n^2 - 3 n").limit().kind == LimitKind::PosInf);
  CHECK(PowerSum::parse("-n^(1/2) + 5").limit().kind == LimitKind::NegInf);
  CHECK(PowerSum::parse("3 + 1/n").limit().value == 3);
  CHECK(PowerSum::parse("1/n").limit().is_zero());
  CHECK(PowerSum().limit().is_zero());
}

TEST_CASE("asymptotic division against direct evaluation") {
  const auto a = PowerSum::parse("n^3 + 2 n + 1");
  const auto b = PowerSum::parse("n^2 - n");
  const auto q = PowerSum::divide(a, b, Rational(-4));
  REQUIRE(q.has_value());
  // The expansion is exact through n^-4, so the error at n = 1e3 is O(n^-5).
  for (double n : {1e2, 1e3}) CHECK(std::abs(q->eval(n) - a.eval(n) / b.eval(n)) <= 10 * std::pow(n, -5));
  CHECK(!PowerSum::divide(a, PowerSum()).has_value());
  CHECK(PowerSum::divide(PowerSum::parse("n"), PowerSum::parse("n^2"))->limit().is_zero());
}

TEST_CASE("arithmetic") {
  const auto a = PowerSum::parse("n + 1"), b = PowerSum::parse("n - 1");
  CHECK((a * b).eval(5) == doctest::Approx(24));
  CHECK((a - b).is_constant());
  CHECK((2.0 * a).eval(3) == doctest::Approx(8));
  CHECK(PowerSum::parse((a * b).to_string()).eval(7) == doctest::Approx(48));
}

TEST_CASE("conjugator at n") {
  const auto s = spec(R"({"base": {"family": "Levi"}, "a": "n", "s": "2", "alpha": "n", "beta": "-1"})");
  const Element g = s.conjugator_at(3);
  const Mat2<double> want = upper_unipotent(2.0) * diagonal(3.0);
  CHECK((g.sl2 - want).norm() <= 1e-14);
  CHECK(g.trans(0) == 3);
  CHECK(g.trans(1) == -1);
  CHECK(s.conjugate_at(3).family == Family::Levi);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(spec(R"({"base": {"family": "Levi"}, "a": "1 - n"})").validate(), std::invalid_argument);
  CHECK_THROWS(spec(R"({"a": "n"})"));
  CHECK_THROWS(spec(R"([1, 2])"));
  const auto s = spec(R"({"name": "x", "theorem": "1.9", "base": {"family": "NPlus"}, "beta": "n"})");
  CHECK(SequenceSpec::from_json(s.to_json()).to_json() == s.to_json());
}

// Expected limits follow from the leading terms by hand.
TEST_CASE("profiles of representative sequences") {
  SUBCASE("alpha = n^2, beta = n") {
    const auto p = extract_profile(spec(R"({"base": {"family": "BorelSL2"}, "alpha": "n^2", "beta": "n"})"));
    CHECK(p.v_diverges);
    CHECK(p.beta2_over_alpha.value == doctest::Approx(1));
    CHECK(p.alpha_over_beta.kind == LimitKind::PosInf);
    CHECK(p.beta_over_alpha.is_zero());
    REQUIRE(p.v_angle.has_value());
    CHECK(*p.v_angle == doctest::Approx(0));
  }
  SUBCASE("bounded v, divergent s") {
    const auto p = extract_profile(spec(R"({"base": {"family": "MaxCompact"}, "s": "n"})"));
    CHECK(p.v_is_zero);
    CHECK(!p.v_diverges);
    CHECK(p.s.kind == LimitKind::PosInf);
    CHECK(p.a_is_one);
  }
  SUBCASE("v = (n, 3 + 1/n)") {
    const auto p = extract_profile(spec(R"({"base": {"family": "Levi"}, "alpha": "n", "beta": "3 + 1/n"})"));
    CHECK(p.v_diverges);
    CHECK(p.beta.value == doctest::Approx(3));
    REQUIRE(p.v_angle.has_value());
    CHECK(*p.v_angle == doctest::Approx(0));
  }
  SUBCASE("v = (n, n)") {
    const auto p = extract_profile(spec(R"({"base": {"family": "Levi"}, "alpha": "n", "beta": "n"})"));
    REQUIRE(p.v_angle.has_value());
    CHECK(*p.v_angle == doctest::Approx(M_PI / 4));
    CHECK(p.alpha_over_beta.value == doctest::Approx(1));
  }
  SUBCASE("s = n, alpha = 2 n^2 + 1, beta = n") {
    // 2 s - alpha / beta = 2n - 2n - 1/n -> 0 and alpha / s - 2 beta = 1/n -> 0.
    const auto p = extract_profile(spec(R"({"base": {"family": "NPlus"}, "s": "n", "alpha": "2 n^2 + 1", "beta": "n"})"));
    CHECK(p.d.is_zero(1e-9));
    CHECK(p.d_prime.is_zero(1e-9));
  }
  SUBCASE("slope limit") {
    // -beta / (alpha - 2 s beta) = -n / (3n - 2n) = -1.
    const auto p = extract_profile(spec(R"({"base": {"family": "NPlus"}, "s": "1", "alpha": "3 n", "beta": "n"})"));
    CHECK(p.slope.value == doctest::Approx(-1));
  }
}
