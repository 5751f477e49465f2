#include "chabauty/metric.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace chabauty {

void MetricConfig::validate() const {
  if (!(radius >= 1 && radius <= 20)) throw std::invalid_argument("MetricConfig: R must lie in [1, 20]");
  if (!(mesh >= 0.01 && mesh <= 0.5))
    throw std::invalid_argument("MetricConfig: eps must lie in [0.01, 0.5]");
  if (sphere_pad < 64) throw std::invalid_argument("MetricConfig: sphere_pad must be >= 64");
}

int thread_count() {
  if (const char* env = std::getenv("CHABAUTY_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

KdTree<6> tree_of(const std::vector<Element>& pts) {
  Eigen::Matrix<double, 6, Eigen::Dynamic> m(6, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = embed(pts[i]);
  return KdTree<6>(std::move(m));
}

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

double hausdorff(const std::vector<Element>& P, const std::vector<Element>& Q) {
  if (P.empty() || Q.empty()) throw std::domain_error("hausdorff: empty point set");
  return hausdorff<6>(tree_of(P), tree_of(Q));
}

Eigen::Matrix<double, 6, Eigen::Dynamic> sphere_sample(double R, int count) {
  std::mt19937_64 rng(0x5068657265ULL);
  std::normal_distribution<double> normal;
  Embedded<double> id;
  id << 1, 0, 0, 1, 0, 0;
  Eigen::Matrix<double, 6, Eigen::Dynamic> out(6, count);
  for (int i = 0; i < count; ++i) {
    Embedded<double> g;
    do {
      for (int k = 0; k < 6; ++k) g(k) = normal(rng);
    } while (g.norm() < 1e-8);
    out.col(i) = id + R * g.normalized();
  }
  return out;
}

PaddedCloud::PaddedCloud(const PointCloud& cloud, const MetricConfig& cfg) {
  cfg.validate();
  net_size_ = cloud.size();
  const auto sphere = sphere_sample(cfg.radius, cfg.sphere_pad);
  Eigen::Matrix<double, 6, Eigen::Dynamic> all(6, cloud.coords.cols() + sphere.cols());
  all << cloud.coords, sphere;
  tree_ = KdTree<6>(std::move(all));

  Embedded<double> id;
  id << 1, 0, 0, 1, 0, 0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < cloud.coords.cols(); ++i)
    if ((cloud.coords.col(i) - id).norm() <= cfg.radius) keep.push_back(i);
  inner_.resize(6, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) inner_.col(static_cast<Eigen::Index>(i)) = cloud.coords.col(keep[i]);
}

double chabauty_dist(const PaddedCloud& a, const PaddedCloud& b) {
  return std::max(directed_hausdorff<6>(a.inner(), b.tree()), directed_hausdorff<6>(b.inner(), a.tree()));
}

double chabauty_dist(const PointCloud& a, const PointCloud& b, const MetricConfig& cfg) {
  return chabauty_dist(PaddedCloud(a, cfg), PaddedCloud(b, cfg));
}

double chabauty_dist(const SubgroupDescriptor& a, const SubgroupDescriptor& b,
                     const MetricConfig& cfg) {
  cfg.validate();
  return chabauty_dist(PaddedCloud(a, cfg), PaddedCloud(b, cfg));
}

std::vector<double> convergence_curve(const std::vector<SubgroupDescriptor>& ds,
                                      const SubgroupDescriptor& target, const MetricConfig& cfg) {
  if (ds.empty()) throw std::invalid_argument("convergence_curve: empty sequence");
  cfg.validate();
  const PaddedCloud t(target, cfg);
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& d : ds) out.push_back(chabauty_dist(PaddedCloud(d, cfg), t));
  return out;
}

int count_components(const PointCloud& cloud, double link) {
  if (cloud.empty()) return 0;
  const KdTree<6> tree(cloud.coords);
  const std::size_t n = tree.size();
  UnionFind uf(n);
  int comps = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    tree.radius_query(tree.points().col(static_cast<Eigen::Index>(i)), link, [&](std::size_t j) {
      if (uf.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j))) --comps;
    });
  }
  return comps;
}

}  // namespace chabauty
