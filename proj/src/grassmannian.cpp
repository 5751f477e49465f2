#include "chabauty/grassmannian.hpp"

namespace chabauty {

Subspace Subspace::span(const std::vector<Lie>& vectors, double rank_tol) {
  if (vectors.empty()) throw std::invalid_argument("Subspace::span: no vectors");
  Eigen::MatrixXd M(5, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) M.col(static_cast<Eigen::Index>(i)) = vectors[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0)) throw std::invalid_argument("Subspace::span: zero vectors");
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > rank_tol * s(0)) ++rank;
  Subspace W;
  W.basis = svd.matrixU().leftCols(rank);
  return W;
}

Projector proj_matrix(const Subspace& W) { return W.basis * W.basis.transpose(); }

double grass_dist(const Subspace& W, const Subspace& W2) {
  const Projector D = proj_matrix(W) - proj_matrix(W2);
  Eigen::SelfAdjointEigenSolver<Projector> es(D, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Subspace lie_subspace(const SubgroupDescriptor& d) { return Subspace::span(lie_algebra(d)); }

Subspace estimate_lie_algebra(const PointCloud& P, double delta) {
  if (!(delta > 0 && delta <= 0.3)) throw std::invalid_argument("estimate_lie_algebra: delta must lie in (0, 0.3]");
  std::vector<Lie> logs;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const Element x = P.point(i);
    const double r = dist_to_identity(x);
    if (r > 0 && r < delta) logs.push_back(log_near_identity(x));
  }
  if (logs.size() < 3)
    throw TooFewPoints("estimate_lie_algebra: fewer than 3 cloud points near the identity");
  Eigen::MatrixXd M(5, static_cast<Eigen::Index>(logs.size()));
  for (std::size_t i = 0; i < logs.size(); ++i) M.col(static_cast<Eigen::Index>(i)) = logs[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) >= 0.1 * s(0)) ++rank;
  Subspace W;
  W.basis = svd.matrixU().leftCols(rank);
  return W;
}

std::vector<double> algebra_convergence_check(const std::vector<SubgroupDescriptor>& ds,
                                              const SubgroupDescriptor& target) {
  const Subspace t = lie_subspace(target);
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& d : ds) out.push_back(grass_dist(lie_subspace(d), t));
  return out;
}

}  // namespace chabauty
