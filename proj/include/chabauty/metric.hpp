#pragma once

// Padded local Hausdorff distance between eps-nets of subgroups intersected
// with the ball B_R around the identity.

#include "chabauty/catalog.hpp"
#include "chabauty/kdtree.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

namespace chabauty {

struct MetricConfig {
  double radius = 4.0;
  double mesh = 0.05;
  int sphere_pad = 256;

  /// Throws std::invalid_argument unless R in [1,20], eps in [0.01,0.5], pad >= 64.
  void validate() const;
};

/// Worker count for the Hausdorff loops: CHABAUTY_THREADS if set, else the
/// hardware concurrency.
int thread_count();

/// max_p min_q |p - q| over columns, exact.  A fixed random sample of P is
/// visited first so the running maximum rises early; the rest is visited in
/// storage order, where neighbouring columns are close and the search can
/// usually stop in the leaf that answered the previous query.
template <int D>
double directed_hausdorff(const Eigen::Matrix<double, D, Eigen::Dynamic>& P, const KdTree<D>& Q) {
  const auto n = static_cast<std::size_t>(P.cols());
  std::atomic<double> cmax{0.0};
  auto raise = [&](double d) {
    double prev = cmax.load(std::memory_order_relaxed);
    while (d > prev && !cmax.compare_exchange_weak(prev, d, std::memory_order_relaxed)) {
    }
  };

  std::mt19937_64 rng(0x5eed);
  std::uniform_int_distribution<std::size_t> pick(0, n == 0 ? 0 : n - 1);
  std::int32_t leaf = -1;
  for (std::size_t k = 0; k < std::min<std::size_t>(n, 2048); ++k) {
    const double cur = cmax.load(std::memory_order_relaxed);
    const double d = Q.nearest_cached(P.col(static_cast<Eigen::Index>(pick(rng))), cur, leaf);
    if (d > cur) raise(d);
  }

  auto work = [&](std::size_t begin, std::size_t end) {
    std::int32_t hint = -1;
    for (std::size_t i = begin; i < end; ++i) {
      const double cur = cmax.load(std::memory_order_relaxed);
      const double d = Q.nearest_cached(P.col(static_cast<Eigen::Index>(i)), cur, hint);
      if (d > cur) raise(d);
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, thread_count()));
  if (threads == 1 || n < 4096) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return cmax.load();
}

template <int D>
double hausdorff(const KdTree<D>& P, const KdTree<D>& Q) {
  if (P.size() == 0 || Q.size() == 0) throw std::domain_error("hausdorff: empty point set");
  return std::max(directed_hausdorff<D>(P.points(), Q), directed_hausdorff<D>(Q.points(), P));
}

/// Symmetric Hausdorff distance of two finite sets under the ambient metric.
double hausdorff(const std::vector<Element>& P, const std::vector<Element>& Q);

/// sphere_pad deterministic points on the sphere of radius R about the
/// identity in R^6.
Eigen::Matrix<double, 6, Eigen::Dynamic> sphere_sample(double R, int count);

/// A net together with the sphere padding, indexed for Hausdorff queries,
/// and the net points inside the closed ball B_R.
class PaddedCloud {
 public:
  PaddedCloud(const PointCloud& cloud, const MetricConfig& cfg);
  PaddedCloud(const SubgroupDescriptor& d, const MetricConfig& cfg)
      : PaddedCloud(sample_ball(d, cfg.radius, cfg.mesh), cfg) {}

  [[nodiscard]] const KdTree<6>& tree() const { return tree_; }
  [[nodiscard]] std::size_t net_size() const { return net_size_; }
  [[nodiscard]] const Eigen::Matrix<double, 6, Eigen::Dynamic>& inner() const { return inner_; }

 private:
  KdTree<6> tree_;
  Eigen::Matrix<double, 6, Eigen::Dynamic> inner_;
  std::size_t net_size_ = 0;
};

/// max(h(P1 n B_R, P2 u S_R), h(P2 n B_R, P1 u S_R)) with h the directed
/// Hausdorff distance.  Net points in the shell R < |x| <= R + eps are
/// targets only, so the two nets' boundary clipping does not register.
double chabauty_dist(const PaddedCloud& a, const PaddedCloud& b);
double chabauty_dist(const PointCloud& a, const PointCloud& b, const MetricConfig& cfg);
double chabauty_dist(const SubgroupDescriptor& a, const SubgroupDescriptor& b,
                     const MetricConfig& cfg = {});

/// chabauty_dist of each entry to target, in order.
std::vector<double> convergence_curve(const std::vector<SubgroupDescriptor>& ds,
                                      const SubgroupDescriptor& target, const MetricConfig& cfg = {});

/// Clusters of the cloud under single linkage at distance link.
int count_components(const PointCloud& cloud, double link);

}  // namespace chabauty
