#include "chabauty/catalog.hpp"
#include "chabauty/metric.hpp"

#include <doctest.h>

#include <random>

using namespace chabauty;

namespace {

const MetricConfig kSmall{2.0, 0.1, 64};

Element random_element(std::mt19937_64& rng, double spread = 1.0) {
  std::uniform_real_distribution<double> angle(-M_PI, M_PI), u(-spread, spread);
  return {iwasawa(angle(rng), u(rng), u(rng)), Vec2<double>(u(rng), u(rng))};
}

std::vector<SubgroupDescriptor> every_family() {
  return {SubgroupDescriptor::levi(),          SubgroupDescriptor::max_compact(),
          SubgroupDescriptor::diagonal(),      SubgroupDescriptor::borel_sl2(),
          SubgroupDescriptor::borel_full(),    SubgroupDescriptor::n_plus(),
          SubgroupDescriptor::n_minus(),       SubgroupDescriptor::tilde_n_plus(),
          SubgroupDescriptor::n_plus_c(1.5),   SubgroupDescriptor::v_line(-0.5),
          SubgroupDescriptor::v_line(kInfinity), SubgroupDescriptor::heis_line(1, 2, -1),
          SubgroupDescriptor::n_plus_semi_r2(), SubgroupDescriptor::n_plus_semi_v0(),
          SubgroupDescriptor::w_slant(1),      SubgroupDescriptor::translations2()};
}

// A point of the identity component: exp of a random Lie algebra element,
// then conjugated.  Independent of the sampler's charts.
Element random_member(const SubgroupDescriptor& d, std::mt19937_64& rng, double size) {
  const auto basis = lie_algebra(canonicalize(SubgroupDescriptor::make(d.family, d.params)));
  std::normal_distribution<double> g;
  Lie X = Lie::Zero();
  for (const auto& b : basis) X += g(rng) * b;
  if (X.norm() > 0) X *= size / X.norm();
  return conj(d.conjugator, exp(X));
}

}  // namespace

TEST_CASE("family metadata") {
  for (Family f : kAllFamilies) {
    const auto name = family_name(f);
    REQUIRE(family_from_name(name).has_value());
    CHECK(*family_from_name(name) == f);
    CHECK(component_count(f) == (f == Family::TildeNPlus ? 2 : 1));
  }
  CHECK(identity_dimension(Family::Levi) == 3);
  CHECK(identity_dimension(Family::BorelFull) == 4);
  CHECK(identity_dimension(Family::NPlusSemiR2) == 3);
  CHECK(identity_dimension(Family::WSlant) == 2);
  CHECK(identity_dimension(Family::HeisLine) == 1);
  CHECK(parameter_count(Family::HeisLine) == 3);
  CHECK(!family_from_name("Parabolic").has_value());
}

TEST_CASE("descriptor validation and projective HeisLine") {
  CHECK_THROWS(SubgroupDescriptor::heis_line(0, 0, 0));
  CHECK_THROWS(SubgroupDescriptor::w_slant(0));
  const auto h = SubgroupDescriptor::heis_line(-2, 4, 6);
  CHECK(h.params[0] == doctest::Approx(1));
  CHECK(h.params[1] == doctest::Approx(-2));
  CHECK(h.params[2] == doctest::Approx(-3));
}

TEST_CASE("membership of generated elements") {
  std::mt19937_64 rng(11);
  for (const auto& base : every_family()) {
    const auto d = conjugate_descriptor(base, random_element(rng, 0.5));
    for (int i = 0; i < 20; ++i) {
      const Element x = random_member(d, rng, 1.0);
      CHECK_MESSAGE(membership(d, x, 1e-8), base.to_string());
    }
  }
  CHECK(!membership(SubgroupDescriptor::n_plus(), Element::translation(1, 0), 1e-3));
  CHECK(!membership(SubgroupDescriptor::v_line(0), Element::translation(0, 1), 1e-3));
  CHECK(membership(SubgroupDescriptor::tilde_n_plus(), Element::linear(-upper_unipotent(0.4)), 1e-12));
  CHECK(membership(SubgroupDescriptor::w_slant(2), Element({upper_unipotent(1.0)}, Vec2<double>(5, -2)), 1e-12));
}

TEST_CASE("sample_ball is an eps-net of H n B_R") {
  std::mt19937_64 rng(12);
  const double R = 2.0, eps = 0.1;
  for (const auto& base : every_family()) {
    const auto d = conjugate_descriptor(base, random_element(rng, 0.3));
    const PointCloud P = sample_ball(d, R, eps);
    REQUIRE(!P.empty());
    bool inside = true;
    double worst = 0;
    for (std::size_t i = 0; i < P.size(); ++i) {
      inside = inside && membership(d, P.point(i), 1e-7);
      worst = std::max(worst, dist_to_identity(P.point(i)));
    }
    CHECK_MESSAGE(inside, base.to_string());
    CHECK_MESSAGE(worst <= R + eps + 1e-9, base.to_string());
    int tested = 0;
    for (int i = 0; i < 200; ++i) {
      const Element x = random_member(d, rng, std::uniform_real_distribution<double>(0, 2)(rng));
      if (dist_to_identity(x) > R - eps) continue;
      ++tested;
      const auto e = embed(x);
      const double nearest = (P.coords.colwise() - e).colwise().norm().minCoeff();
      CHECK_MESSAGE(nearest <= 2 * eps, base.to_string());
    }
    CHECK(tested > 20);
  }
}

TEST_CASE("sample_ball input checks") {
  CHECK_THROWS_AS(sample_ball(SubgroupDescriptor::n_plus(), 0.5, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sample_ball(SubgroupDescriptor::n_plus(), 4, 0.001), std::invalid_argument);
}

TEST_CASE("canonicalize is idempotent") {
  std::mt19937_64 rng(13);
  for (const auto& base : every_family()) {
    for (int i = 0; i < 10; ++i) {
      const auto c1 = canonicalize(conjugate_descriptor(base, random_element(rng)));
      const auto c2 = canonicalize(c1);
      CHECK(c1.family == c2.family);
      for (int k = 0; k < 3; ++k) CHECK(c2.params[k] == doctest::Approx(c1.params[k]).epsilon(1e-9));
      CHECK(dist(c1.conjugator, c2.conjugator) <= 1e-9);
    }
  }
}

TEST_CASE("canonicalize preserves the subgroup") {
  std::mt19937_64 rng(14);
  for (const auto& base : every_family()) {
    const auto d = conjugate_descriptor(base, random_element(rng, 0.7));
    const auto c = canonicalize(d);
    CHECK_MESSAGE(chabauty_dist(d, c, kSmall) <= 1e-6, base.to_string() << " -> " << c.to_string());
  }
}

TEST_CASE("canonical HeisLine rewrites") {
  auto check = [](SubgroupDescriptor d, SubgroupDescriptor want) {
    const auto c = canonicalize(d);
    CHECK(c.family == want.family);
    if (std::isinf(want.params[0]))
      CHECK(c.params[0] == want.params[0]);
    else
      CHECK(c.params[0] == doctest::Approx(want.params[0]));
  };
  check(SubgroupDescriptor::heis_line(1, 0, 2), SubgroupDescriptor::n_plus_c(2));
  check(SubgroupDescriptor::heis_line(0, 1, 2), SubgroupDescriptor::v_line(0.5));
  check(SubgroupDescriptor::heis_line(0, 1, 0), SubgroupDescriptor::v_line(kInfinity));
  check(SubgroupDescriptor::heis_line(0, 0, 1), SubgroupDescriptor::v_line(0));
  CHECK(canonicalize(SubgroupDescriptor::heis_line(1, 1, 1)).family == Family::HeisLine);
}

TEST_CASE("normalizer reductions") {
  // Translation by (0, u) moves N+_c to N+_{c-u}; diag(a, 1/a) moves it to N+_{c/a}.
  const auto moved = canonicalize(conjugate_descriptor(SubgroupDescriptor::n_plus_c(3), Element::translation(7, 1)));
  CHECK(moved.family == Family::NPlusC);
  CHECK(moved.params[0] == doctest::Approx(2));
  const auto scaled = canonicalize(conjugate_descriptor(SubgroupDescriptor::n_plus_c(3), Element::linear(diagonal(3.0))));
  CHECK(scaled.params[0] == doctest::Approx(1));
  CHECK(canonicalize(conjugate_descriptor(SubgroupDescriptor::n_plus(), Element::translation(0, 2))).params[0] ==
        doctest::Approx(-2));
  CHECK(canonicalize(conjugate_descriptor(SubgroupDescriptor::n_plus_c(2), Element::translation(0, 2))).family ==
        Family::NPlus);
  const auto rotated = canonicalize(conjugate_descriptor(SubgroupDescriptor::v_line(0), Element::linear(rotation(-M_PI / 4))));
  CHECK(rotated.family == Family::VLine);
  CHECK(rotated.params[0] == doctest::Approx(1));
  CHECK(dist(canonicalize(conjugate_descriptor(SubgroupDescriptor::translations2(), Element::linear(rotation(1.0)))).conjugator,
             Element::identity()) == 0);
  for (auto f : {SubgroupDescriptor::borel_full(), SubgroupDescriptor::n_plus_semi_r2(), SubgroupDescriptor::n_plus_semi_v0()}) {
    const auto c = canonicalize(conjugate_descriptor(f, Element({upper_unipotent(3.0) * diagonal(2.0)}, Vec2<double>(4, 5))));
    CHECK(dist(c.conjugator, Element::identity()) <= 1e-12);
  }
}

TEST_CASE("closure constraint readings") {
  // Every nonzero triple can be scaled so that some coordinate equals 1.
  CHECK(heis_constraint(1, 0, 5).and_first);
  CHECK(heis_constraint(0, 0, 1).and_first);
  CHECK(heis_constraint(2, -3, 7).and_first);
  CHECK(!heis_constraint(0, 0, 0).and_first);
  CHECK(!heis_constraint(1, 0, 5).left_to_right);
  CHECK(heis_constraint(0, 1, 4).left_to_right);
  CHECK(heis_constraint(1, -0.5, -0.5).left_to_right);
  CHECK(heis_constraint(2, 2, 9).left_to_right);
  CHECK(!heis_constraint(1, 2, 3).left_to_right);
}

TEST_CASE("json round trip") {
  std::mt19937_64 rng(15);
  for (const auto& base : every_family()) {
    const auto d = conjugate_descriptor(base, random_element(rng));
    const auto back = descriptor_from_json(to_json(d));
    CHECK(back.family == d.family);
    CHECK(dist(back.conjugator, d.conjugator) <= 1e-15);
    for (int k = 0; k < 3; ++k) CHECK(back.params[k] == d.params[k]);
    CHECK(to_json(back) == to_json(d));
  }
  CHECK_THROWS(descriptor_from_json(nlohmann::json{{"family", "Nope"}}));
}
