#include "chabauty/metric.hpp"

#include <doctest.h>

#include <random>

using namespace chabauty;

TEST_CASE("config validation") {
  CHECK_NOTHROW(MetricConfig{}.validate());
  CHECK_THROWS_AS((MetricConfig{0.5, 0.05, 256}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MetricConfig{21, 0.05, 256}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MetricConfig{4, 0.005, 256}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MetricConfig{4, 0.6, 256}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MetricConfig{4, 0.05, 10}.validate()), std::invalid_argument);
}

TEST_CASE("hausdorff of explicit point sets") {
  const std::vector<Element> P{Element::identity(), Element::translation(1, 0)};
  const std::vector<Element> Q{Element::identity(), Element::translation(0, 3)};
  // translation(1,0) is 1 from the identity; translation(0,3) is 3 from it and sqrt 10 from (1,0).
  CHECK(hausdorff(P, Q) == doctest::Approx(3));
  CHECK(hausdorff(P, P) == 0);
}

TEST_CASE("sphere padding lies on the sphere") {
  const auto S = sphere_sample(4, 256);
  CHECK(S.cols() == 256);
  const Embedded<double> id = embed(Element::identity());
  for (Eigen::Index i = 0; i < S.cols(); ++i) CHECK((S.col(i) - id).norm() == doctest::Approx(4));
  CHECK((sphere_sample(4, 256) - S).norm() == 0);
}

TEST_CASE("self distance, symmetry and triangle inequality") {
  const MetricConfig cfg{2.0, 0.1, 64};
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<SubgroupDescriptor> ds{SubgroupDescriptor::n_plus(), SubgroupDescriptor::v_line(0.3),
                                     SubgroupDescriptor::heis_line(1, 0.5, -0.2), SubgroupDescriptor::translations2(),
                                     SubgroupDescriptor::n_plus_semi_v0(), SubgroupDescriptor::max_compact()};
  for (auto& d : ds) d = conjugate_descriptor(d, Element{iwasawa(u(rng), 0.2 * u(rng), u(rng)), Vec2<double>(u(rng), u(rng))});
  std::vector<PaddedCloud> clouds;
  for (const auto& d : ds) clouds.emplace_back(d, cfg);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(chabauty_dist(clouds[i], clouds[i]) == 0);
    for (std::size_t j = 0; j < ds.size(); ++j) {
      const double dij = chabauty_dist(clouds[i], clouds[j]);
      CHECK(dij == chabauty_dist(clouds[j], clouds[i]));
      CHECK(dij >= 0);
      // The padded distance is a true Hausdorff distance only up to net resolution.
      for (std::size_t k = 0; k < ds.size(); ++k)
        CHECK(dij <= chabauty_dist(clouds[i], clouds[k]) + chabauty_dist(clouds[k], clouds[j]) + 4 * cfg.mesh);
    }
  }
}

TEST_CASE("distance between translation lines") {
  // Lines through 0 at angle phi inside B_R: the farthest point of one line is
  // R sin phi from the other, well below the padding gap for small phi.
  const MetricConfig cfg{};
  for (double phi : {0.02, 0.05, 0.1}) {
    const double d = chabauty_dist(SubgroupDescriptor::v_line(0), SubgroupDescriptor::v_line(std::tan(phi)), cfg);
    CHECK(std::abs(d - cfg.radius * std::sin(phi)) <= cfg.mesh / 2);
  }
}

TEST_CASE("disjoint curves are separated by the padding") {
  const MetricConfig cfg{};
  const double d = chabauty_dist(SubgroupDescriptor::v_line(0), SubgroupDescriptor::v_line(kInfinity), cfg);
  // Half the radius is the point on one line equidistant from the other line and the sphere.
  CHECK(d >= cfg.radius / 2 - 2 * cfg.mesh);
  CHECK(d <= cfg.radius);
}

TEST_CASE("convergence curve towards a fixed line") {
  std::vector<SubgroupDescriptor> ds;
  for (double c : {0.5, 0.2, 0.1, 0.05}) ds.push_back(SubgroupDescriptor::v_line(c));
  const auto curve = convergence_curve(ds, SubgroupDescriptor::v_line(0), MetricConfig{});
  REQUIRE(curve.size() == 4);
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] < curve[i - 1]);
  CHECK(curve.back() <= 0.25);
}

TEST_CASE("component count") {
  const auto one = sample_ball(SubgroupDescriptor::n_plus(), 4, 0.05);
  const auto two = sample_ball(SubgroupDescriptor::tilde_n_plus(), 4, 0.05);
  CHECK(count_components(one, 0.2) == 1);
  CHECK(count_components(two, 0.2) == 2);
}
