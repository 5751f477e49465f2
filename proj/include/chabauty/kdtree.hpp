#pragma once

// Static kd-tree over the columns of a D x N matrix, tuned for the directed
// Hausdorff loop: nearest-neighbour search can stop as soon as any point
// closer than a caller-supplied bound is found.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

namespace chabauty {

template <int D>
class KdTree {
 public:
  using Points = Eigen::Matrix<double, D, Eigen::Dynamic>;
  using Point = Eigen::Matrix<double, D, 1>;

  KdTree() = default;

  explicit KdTree(Points pts) : pts_(std::move(pts)) {
    const auto n = static_cast<std::int32_t>(pts_.cols());
    idx_.resize(static_cast<std::size_t>(n));
    std::iota(idx_.begin(), idx_.end(), 0);
    nodes_.reserve(static_cast<std::size_t>(2 * n / kLeaf + 2));
    if (n > 0) build(0, n);
    // Store points in tree order for cache locality.
    Points sorted(D, n);
    for (std::int32_t i = 0; i < n; ++i) sorted.col(i) = pts_.col(idx_[static_cast<std::size_t>(i)]);
    pts_ = std::move(sorted);
  }

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(pts_.cols()); }
  [[nodiscard]] const Points& points() const { return pts_; }
  /// Original column index of the i-th stored point.
  [[nodiscard]] std::int32_t original_index(std::size_t i) const { return idx_[i]; }

  /// Distance to the nearest point; returns early with some value < stop as
  /// soon as one point closer than stop is seen.
  [[nodiscard]] double nearest(const Point& q, double stop = 0.0) const {
    if (nodes_.empty()) return std::numeric_limits<double>::infinity();
    double best2 = std::numeric_limits<double>::infinity();
    const double stop2 = stop * stop;
    if (box_dist2(nodes_[0], q) < best2) nearest_rec(0, q, best2, stop2);
    return std::sqrt(best2);
  }

  /// As nearest(), but first scans the leaf in `leaf` (if >= 0) and stores
  /// the leaf holding the returned point back into it.  Consecutive queries
  /// that are close to each other mostly finish in the cached leaf.
  [[nodiscard]] double nearest_cached(const Point& q, double stop, std::int32_t& leaf) const {
    if (nodes_.empty()) return std::numeric_limits<double>::infinity();
    double best2 = std::numeric_limits<double>::infinity();
    const double stop2 = stop * stop;
    if (leaf >= 0) {
      const Node& n = nodes_[static_cast<std::size_t>(leaf)];
      for (std::int32_t i = n.begin; i < n.end; ++i) {
        best2 = std::min(best2, (pts_.col(i) - q).squaredNorm());
        if (best2 < stop2) return std::sqrt(best2);
      }
    }
    std::int32_t found = leaf;
    if (box_dist2(nodes_[0], q) < best2) nearest_rec(0, q, best2, stop2, &found);
    leaf = found;
    return std::sqrt(best2);
  }

  [[nodiscard]] bool any_within(const Point& q, double r) const {
    return nearest(q, r) <= r;
  }

  /// Calls f(stored_index) for every point with |p - q| <= r.
  template <typename F>
  void radius_query(const Point& q, double r, F&& f) const {
    if (nodes_.empty()) return;
    radius_rec(0, q, r * r, f);
  }

 private:
  static constexpr std::int32_t kLeaf = 12;

  struct Node {
    std::int32_t begin, end;
    std::int32_t left = -1, right = -1;
    Point lo, hi;
  };

  [[nodiscard]] static double box_dist2(const Node& n, const Point& q) {
    return ((n.lo - q).cwiseMax(q - n.hi)).cwiseMax(0.0).squaredNorm();
  }

  std::int32_t build(std::int32_t b, std::int32_t e) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    Point lo = pts_.col(idx_[static_cast<std::size_t>(b)]), hi = lo;
    for (std::int32_t i = b + 1; i < e; ++i) {
      lo = lo.cwiseMin(pts_.col(idx_[static_cast<std::size_t>(i)]));
      hi = hi.cwiseMax(pts_.col(idx_[static_cast<std::size_t>(i)]));
    }
    nodes_.push_back(Node{b, e, -1, -1, lo, hi});
    if (e - b <= kLeaf) return id;
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const std::int32_t mid = b + (e - b) / 2;
    std::nth_element(idx_.begin() + b, idx_.begin() + mid, idx_.begin() + e,
                     [&](std::int32_t x, std::int32_t y) { return pts_(axis, x) < pts_(axis, y); });
    const std::int32_t l = build(b, mid);
    const std::int32_t r = build(mid, e);
    Node& n = nodes_[static_cast<std::size_t>(id)];
    n.left = l;
    n.right = r;
    return id;
  }

  bool nearest_rec(std::int32_t id, const Point& q, double& best2, double stop2,
                   std::int32_t* found = nullptr) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.left < 0) {
      for (std::int32_t i = n.begin; i < n.end; ++i) {
        const double d2 = (pts_.col(i) - q).squaredNorm();
        if (d2 < best2) {
          best2 = d2;
          if (found) *found = id;
          if (best2 < stop2) return true;
        }
      }
      return false;
    }
    const Node& l = nodes_[static_cast<std::size_t>(n.left)];
    const Node& r = nodes_[static_cast<std::size_t>(n.right)];
    const double dl = box_dist2(l, q), dr = box_dist2(r, q);
    const bool left_first = dl <= dr;
    const std::int32_t first = left_first ? n.left : n.right;
    const std::int32_t second = left_first ? n.right : n.left;
    const double d1 = left_first ? dl : dr, d2 = left_first ? dr : dl;
    if (d1 < best2 && nearest_rec(first, q, best2, stop2, found)) return true;
    if (d2 < best2) return nearest_rec(second, q, best2, stop2, found);
    return false;
  }

  template <typename F>
  void radius_rec(std::int32_t id, const Point& q, double r2, F& f) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.left < 0) {
      for (std::int32_t i = n.begin; i < n.end; ++i)
        if ((pts_.col(i) - q).squaredNorm() <= r2) f(static_cast<std::size_t>(i));
      return;
    }
    if (box_dist2(nodes_[static_cast<std::size_t>(n.left)], q) <= r2) radius_rec(n.left, q, r2, f);
    if (box_dist2(nodes_[static_cast<std::size_t>(n.right)], q) <= r2) radius_rec(n.right, q, r2, f);
  }

  Points pts_;
  std::vector<std::int32_t> idx_;
  std::vector<Node> nodes_;
};

}  // namespace chabauty
