#pragma once

// Subspaces of the 5-dimensional Lie algebra of G, compared through their
// orthogonal projectors.

#include "chabauty/catalog.hpp"

#include <stdexcept>
#include <vector>

namespace chabauty {

using Projector = Eigen::Matrix<double, 5, 5>;

/// Orthonormal basis stored column-wise.
struct Subspace {
  Eigen::Matrix<double, 5, Eigen::Dynamic> basis;

  [[nodiscard]] int dim() const { return static_cast<int>(basis.cols()); }

  /// Orthonormalized span of the vectors; throws if they span {0}.
  static Subspace span(const std::vector<Lie>& vectors, double rank_tol = 1e-10);
};

class TooFewPoints : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Projector proj_matrix(const Subspace& W);

/// Spectral norm of P_W - P_W2.
double grass_dist(const Subspace& W, const Subspace& W2);

/// Lie algebra of the identity component of d as a subspace.
Subspace lie_subspace(const SubgroupDescriptor& d);

/// Tangent space at the identity recovered from the logs of the cloud points
/// within delta of the identity: left singular vectors with singular value
/// at least 0.1 sigma_max.  Needs delta <= 0.3 and at least three such points.
Subspace estimate_lie_algebra(const PointCloud& P, double delta = 0.3);

/// grass_dist(lie_algebra(d_n), lie_algebra(target)) for each n.
std::vector<double> algebra_convergence_check(const std::vector<SubgroupDescriptor>& ds,
                                              const SubgroupDescriptor& target);

}  // namespace chabauty
