#include "chabauty/grassmannian.hpp"
#include "support.hpp"

#include <doctest.h>

#include <random>

using namespace chabauty;

namespace {

Subspace random_subspace(std::mt19937_64& rng, int k) {
  std::normal_distribution<double> g;
  std::vector<Lie> vs;
  for (int i = 0; i < k; ++i) {
    Lie v;
    for (int j = 0; j < 5; ++j) v(j) = g(rng);
    vs.push_back(v);
  }
  return Subspace::span(vs);
}

}  // namespace

TEST_CASE("projectors are symmetric idempotents of the right rank") {
  std::mt19937_64 rng(31);
  for (int k = 1; k <= 5; ++k) {
    for (int rep = 0; rep < 50; ++rep) {
      const Projector P = proj_matrix(random_subspace(rng, k));
      CHECK((P * P - P).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK((P - P.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK(P.trace() == doctest::Approx(k));
    }
  }
}

TEST_CASE("span drops dependent vectors") {
  const Lie e = Lie::Unit(0), f = Lie::Unit(3);
  const Subspace W = Subspace::span({e, f, Lie(2 * e - f)});
  CHECK(W.dim() == 2);
  CHECK_THROWS_AS(Subspace::span({Lie::Zero()}), std::invalid_argument);
  CHECK_THROWS_AS(Subspace::span({}), std::invalid_argument);
}

TEST_CASE("grass_dist is the sine of the angle between lines") {
  for (double phi : {0.0, 0.1, 0.7, M_PI / 2}) {
    Lie a = Lie::Zero(), b = Lie::Zero();
    a(3) = 1;
    b(3) = std::cos(phi);
    b(4) = std::sin(phi);
    CHECK(grass_dist(Subspace::span({a}), Subspace::span({b})) == doctest::Approx(std::sin(phi)));
  }
  std::mt19937_64 rng(32);
  // Subspaces of different dimension are at distance 1.
  CHECK(grass_dist(random_subspace(rng, 2), random_subspace(rng, 3)) == doctest::Approx(1));
}

TEST_CASE("lie algebras of the catalog") {
  CHECK(lie_subspace(SubgroupDescriptor::levi()).dim() == 3);
  CHECK(lie_subspace(SubgroupDescriptor::borel_full()).dim() == 4);
  CHECK(lie_subspace(SubgroupDescriptor::w_slant(2)).dim() == 2);
  // N+ and TildeNPlus share the identity component.
  CHECK(grass_dist(lie_subspace(SubgroupDescriptor::n_plus()), lie_subspace(SubgroupDescriptor::tilde_n_plus())) <= 1e-12);
  // Conjugation acts on the algebra through Ad.
  const Element h{iwasawa(0.4, 0.3, -0.2), Vec2<double>(1, -2)};
  const auto d = conjugate_descriptor(SubgroupDescriptor::heis_line(1, 2, 3), h);
  const Lie X = adjoint(h, Lie(lie_algebra(SubgroupDescriptor::heis_line(1, 2, 3)).front()));
  CHECK(grass_dist(lie_subspace(d), Subspace::span({X})) <= 1e-12);
}

TEST_CASE("estimated tangent space of sampled clouds") {
  std::mt19937_64 rng(33);
  for (const auto& d : {SubgroupDescriptor::n_plus(), SubgroupDescriptor::heis_line(1, -1, 0.5),
                        SubgroupDescriptor::n_plus_semi_r2(), SubgroupDescriptor::levi(), SubgroupDescriptor::w_slant(1)}) {
    const PointCloud P = sample_ball(d, 2, 0.05);
    CHECK_MESSAGE(grass_dist(estimate_lie_algebra(P), lie_subspace(d)) <= 0.05, d.to_string());
  }
  CHECK_THROWS_AS(estimate_lie_algebra(sample_ball(SubgroupDescriptor::n_plus(), 2, 0.05), 0.5), std::invalid_argument);
  PointCloud tiny;
  tiny.coords = Eigen::Matrix<double, 6, Eigen::Dynamic>(6, 1);
  tiny.coords.col(0) = embed(Element::identity());
  CHECK_THROWS_AS(estimate_lie_algebra(tiny), TooFewPoints);
}

TEST_CASE("algebra convergence along conjugates") {
  std::vector<SubgroupDescriptor> ds;
  for (double n : {10.0, 100.0, 1000.0}) ds.push_back(conjugate_descriptor(SubgroupDescriptor::v_line(0), Element::linear(rotation(1 / n))));
  const auto curve = algebra_convergence_check(ds, SubgroupDescriptor::v_line(0));
  for (std::size_t i = 0; i < curve.size(); ++i) CHECK(curve[i] == doctest::Approx(std::sin(1 / std::pow(10.0, i + 1))));
}

TEST_CASE("spearman helper") {
  CHECK(testing::spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1));
  CHECK(testing::spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1));
  CHECK(testing::spearman({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5));
}

TEST_CASE("grass_dist and chabauty_dist are co-monotone on line sequences") {
  std::mt19937_64 rng(34);
  const MetricConfig cfg{};
  for (int s = 0; s < 3; ++s) {
    const auto seq = testing::random_line_sequence(rng);
    std::vector<double> g, c;
    for (const auto& d : seq.terms) {
      g.push_back(grass_dist(lie_subspace(d), lie_subspace(seq.limit)));
      c.push_back(chabauty_dist(d, seq.limit, cfg));
    }
    CHECK(testing::spearman(g, c) >= 0.9);
  }
}
