#include "chabauty/irs.hpp"

#include <doctest.h>

#include <algorithm>

using namespace chabauty;

TEST_CASE("SO(2) angles are uniform") {
  const int n = 4000;
  std::vector<double> angles;
  for (const auto& g : haar_sample(HaarGroup::SO2, n, 1)) angles.push_back(planar_angle(g) / (2 * M_PI));
  std::sort(angles.begin(), angles.end());
  double ks = 0;
  for (int i = 0; i < n; ++i)
    ks = std::max({ks, std::abs(angles[i] - static_cast<double>(i) / n), std::abs(angles[i] - static_cast<double>(i + 1) / n)});
  // Kolmogorov-Smirnov critical value at the 5% level.
  CHECK(ks <= 1.36 / std::sqrt(n));
}

TEST_CASE("SO(3) samples are rotations with centred entries") {
  const int n = 10'000;
  const auto gs = haar_sample(HaarGroup::SO3, n, 42);
  Eigen::Matrix3d mean = Eigen::Matrix3d::Zero();
  for (const auto& g : gs) {
    CHECK((g.linear.transpose() * g.linear - Eigen::Matrix3d::Identity()).norm() <= 1e-12);
    CHECK(g.linear.determinant() == doctest::Approx(1));
    mean += g.linear / n;
  }
  CHECK(mean.cwiseAbs().maxCoeff() <= 0.03);
  // E[trace] = 0 under Haar measure; its variance is 1.
  CHECK(std::abs(mean.trace()) <= 4.0 / std::sqrt(n));
}

TEST_CASE("sampling is reproducible") {
  const auto a = haar_sample(HaarGroup::SO3, 5, 7), b = haar_sample(HaarGroup::SO3, 5, 7);
  for (int i = 0; i < 5; ++i) CHECK(dist(a[i], b[i]) == 0);
  CHECK(dist(haar_sample(HaarGroup::SO3, 1, 8)[0], a[0]) > 0);
}

TEST_CASE("normalizer of the axial subgroup fixes it") {
  const auto z = Subgroup3::axial(Vec3d::UnitZ());
  for (const auto& g : haar_sample(HaarGroup::O2, 200, 43)) {
    CHECK(g.linear.determinant() == doctest::Approx(1));
    const auto c = conjugate(z, g);
    CHECK(c.kind == Subgroup3::Kind::Axial);
    CHECK(std::abs(c.axis.dot(Vec3d::UnitZ())) == doctest::Approx(1));
  }
}

TEST_CASE("generic rotations move the axis") {
  const auto z = Subgroup3::axial(Vec3d::UnitZ());
  const auto gs = haar_sample(HaarGroup::SO3, 50, 44);
  const auto m = orbit_pushforward(z, gs, 44);
  CHECK_NOTHROW(m.validate());
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const auto& a = std::get<Subgroup3>(m.atoms[i]);
    CHECK(std::abs(a.axis.dot(gs[i].linear * Vec3d::UnitZ())) == doctest::Approx(1));
    for (std::size_t j = 0; j < i; ++j) CHECK(std::abs(a.axis.dot(std::get<Subgroup3>(m.atoms[j]).axis)) < 1 - 1e-9);
  }
  CHECK(conjugate(Subgroup3::translations(), gs[0]).kind == Subgroup3::Kind::Translations);
}

TEST_CASE("distance between axial subgroups") {
  const MetricConfig cfg = irs_metric();
  const auto z = Subgroup3::axial(Vec3d::UnitZ());
  CHECK(chabauty_dist(z, Subgroup3::axial(-Vec3d::UnitZ()), cfg) <= 1e-12);
  CHECK(chabauty_dist(Subgroup3::translations(), Subgroup3::translations(), cfg) == 0);
  // Grows with the angle until the sphere padding caps it.
  double prev = 0;
  for (double t : {0.05, 0.2, 0.4, 0.8, 1.2, M_PI / 2}) {
    const auto u = Subgroup3::axial(Vec3d(std::sin(t), 0, std::cos(t)));
    const double d = chabauty_dist(z, u, cfg);
    CHECK(d == doctest::Approx(chabauty_dist(u, z, cfg)));
    if (t <= 0.8) CHECK(d > prev);
    CHECK(d <= 2 * cfg.radius);
    prev = d;
  }
  CHECK(chabauty_dist(z, Subgroup3::translations(), cfg) > 0.5);
}

TEST_CASE("measure validation") {
  EmpiricalMeasure m;
  m.atoms = {Subgroup3::translations(), Subgroup3::translations()};
  m.weights = {0.5, 0.5};
  CHECK_NOTHROW(m.validate());
  m.weights = {0.7, 0.5};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m.weights = {1.5, -0.5};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m.weights = {1.0};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m.atoms = {Subgroup3::translations(), SubgroupDescriptor::translations2()};
  m.weights = {0.5, 0.5};
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("dirac masses at normal subgroups are invariant") {
  const auto plane = dirac_plane(20, 45);
  const auto space = dirac_space(20, 45);
  CHECK(plane.statistic <= 1e-9);
  CHECK(space.statistic <= 1e-9);
  CHECK(plane.pass);
  CHECK(space.pass);
}

TEST_CASE("small invariance runs") {
  SUBCASE("Haar pushforward in SO(3) x| R^3") {
    const auto r = so3_example(60, 46);
    CHECK(r.pass);
    CHECK(r.permutations == 999);
    CHECK(r.to_json().at("seed") == 46);
  }
  SUBCASE("translated Levi subgroups") {
    const auto r = levi_orbit(24, 100, 47);
    CHECK(!r.pass);
    CHECK(r.statistic > r.threshold);
  }
}

TEST_CASE("Levi conjugates escape towards N+ x| R^2") {
  const MetricConfig cfg = irs_metric();
  CHECK(levi_escape_demo(0, cfg) <= 1e-12);
  double prev = std::numeric_limits<double>::infinity();
  for (double T : {10.0, 100.0, 1000.0}) {
    const double d = levi_escape_demo(T, cfg, 5, 48);
    CHECK(d <= prev);
    prev = d;
  }
  // Along the x-axis the search starts at the oracle limit of the conjugates.
  for (double x : {10.0, 100.0}) {
    const double oracle = chabauty_dist(conjugate_descriptor(SubgroupDescriptor::levi(), Element::translation(x, 0)),
                                        SubgroupDescriptor::n_plus_semi_r2(), cfg);
    const double escape = levi_escape_distance(Vec2<double>(x, 0), cfg);
    CHECK(escape <= oracle);
    CHECK(escape >= oracle - cfg.mesh);
  }
  CHECK_THROWS_AS(levi_escape_demo(-1, cfg), std::invalid_argument);
}
