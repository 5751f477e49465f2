#pragma once

// Arithmetic in G = SL(2,R) x| R^2 and in generic affine groups GL(d,R) x| R^d.
//
// An element is a pair (g, v) acting on the plane by x -> g x + v, so the
// product is (g, v)(g', v') = (g g', v + g v').  Everything here is a pure
// function on small fixed-size Eigen types.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace chabauty {

template <typename Scalar> using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar> using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

/// Coordinates (xe, xf, xh, t1, t2) of the Lie algebra sl2 + R^2 in the basis
/// e = (0,1;0,0), f = (0,0;1,0), h = (1,0;0,-1), e1, e2.
template <typename Scalar> using LieVec = Eigen::Matrix<Scalar, 5, 1>;

/// Point of the affine embedding [[g, v], [0, 1]] flattened to R^6:
/// (g00, g01, g10, g11, v0, v1).  The ambient metric is Euclidean on these.
template <typename Scalar> using Embedded = Eigen::Matrix<Scalar, 6, 1>;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <typename Scalar>
struct GroupElement {
  Mat2<Scalar> sl2 = Mat2<Scalar>::Identity();
  Vec2<Scalar> trans = Vec2<Scalar>::Zero();

  GroupElement() = default;
  GroupElement(const Mat2<Scalar>& g, const Vec2<Scalar>& v) : sl2(g), trans(v) {}

  static GroupElement identity() { return {}; }
  static GroupElement translation(Scalar x, Scalar y) {
    return {Mat2<Scalar>::Identity(), Vec2<Scalar>(x, y)};
  }
  static GroupElement linear(const Mat2<Scalar>& g) { return {g, Vec2<Scalar>::Zero()}; }
};

using Element = GroupElement<double>;
using Lie = LieVec<double>;

// Named SL2 elements used throughout.

template <typename Scalar = double>
Mat2<Scalar> upper_unipotent(Scalar s) {
  Mat2<Scalar> m;
  m << 1, s, 0, 1;
  return m;
}

template <typename Scalar = double>
Mat2<Scalar> lower_unipotent(Scalar s) {
  Mat2<Scalar> m;
  m << 1, 0, s, 1;
  return m;
}

/// diag(a, 1/a)
template <typename Scalar = double>
Mat2<Scalar> diagonal(Scalar a) {
  Mat2<Scalar> m;
  m << a, 0, 0, Scalar(1) / a;
  return m;
}

/// (cos t, sin t; -sin t, cos t), the parametrization of K used in the limit analysis.
template <typename Scalar = double>
Mat2<Scalar> rotation(Scalar t) {
  using std::cos;
  using std::sin;
  Mat2<Scalar> m;
  m << cos(t), sin(t), -sin(t), cos(t);
  return m;
}

/// Iwasawa coordinates: k(theta) diag(e^r, e^-r) u(sigma).
template <typename Scalar = double>
Mat2<Scalar> iwasawa(Scalar theta, Scalar r, Scalar sigma) {
  using std::exp;
  return rotation(theta) * diagonal(exp(r)) * upper_unipotent(sigma);
}

template <typename Scalar>
GroupElement<Scalar> mul(const GroupElement<Scalar>& a, const GroupElement<Scalar>& b) {
  return {a.sl2 * b.sl2, a.trans + a.sl2 * b.trans};
}

template <typename Scalar>
GroupElement<Scalar> inv(const GroupElement<Scalar>& a) {
  const Mat2<Scalar> gi = a.sl2.inverse();
  return {gi, -(gi * a.trans)};
}

/// h x h^-1
template <typename Scalar>
GroupElement<Scalar> conj(const GroupElement<Scalar>& h, const GroupElement<Scalar>& x) {
  const Mat2<Scalar> hi = h.sl2.inverse();
  const Mat2<Scalar> g = h.sl2 * x.sl2 * hi;
  return {g, h.trans + h.sl2 * x.trans - g * h.trans};
}

template <typename Scalar>
Mat3<Scalar> affine_matrix(const GroupElement<Scalar>& a) {
  Mat3<Scalar> m = Mat3<Scalar>::Identity();
  m.template topLeftCorner<2, 2>() = a.sl2;
  m.template topRightCorner<2, 1>() = a.trans;
  return m;
}

template <typename Scalar>
GroupElement<Scalar> from_affine_matrix(const Mat3<Scalar>& m) {
  return {m.template topLeftCorner<2, 2>(), m.template topRightCorner<2, 1>()};
}

template <typename Scalar>
Embedded<Scalar> embed(const GroupElement<Scalar>& a) {
  Embedded<Scalar> p;
  p << a.sl2(0, 0), a.sl2(0, 1), a.sl2(1, 0), a.sl2(1, 1), a.trans(0), a.trans(1);
  return p;
}

template <typename Scalar>
GroupElement<Scalar> unembed(const Embedded<Scalar>& p) {
  Mat2<Scalar> g;
  g << p(0), p(1), p(2), p(3);
  return {g, Vec2<Scalar>(p(4), p(5))};
}

/// Frobenius distance of the affine embeddings.  Not left invariant.
template <typename Scalar>
Scalar dist(const GroupElement<Scalar>& a, const GroupElement<Scalar>& b) {
  return (embed(a) - embed(b)).norm();
}

template <typename Scalar>
Scalar dist_to_identity(const GroupElement<Scalar>& a) {
  return dist(a, GroupElement<Scalar>::identity());
}

/// Operator-norm condition number of the affine embedding; conjugation by h
/// distorts distances to the identity by at most this factor.
template <typename Scalar>
Scalar condition(const GroupElement<Scalar>& h) {
  Eigen::JacobiSVD<Mat3<Scalar>> svd(affine_matrix(h));
  const auto& s = svd.singularValues();
  return s(0) / s(2);
}

/// Renormalizes the SL2 part after long products.  Drift up to 1e-9 is left
/// alone, drift in (1e-9, 1e-6] is repaired by 1/sqrt(det), anything larger
/// throws.
template <typename Scalar>
GroupElement<Scalar> repair_det(const GroupElement<Scalar>& a) {
  using std::abs;
  using std::sqrt;
  const Scalar det = a.sl2.determinant();
  const Scalar drift = abs(det - Scalar(1));
  if (drift <= Scalar(1e-9)) return a;
  if (drift > Scalar(1e-6) || det <= 0) throw DomainError("SL2 part has drifted off det = 1");
  return {a.sl2 / sqrt(det), a.trans};
}

template <typename Scalar>
bool is_valid(const GroupElement<Scalar>& a, Scalar tol = Scalar(1e-9)) {
  using std::abs;
  return a.sl2.allFinite() && a.trans.allFinite() && abs(a.sl2.determinant() - Scalar(1)) <= tol;
}

// Lie algebra.

template <typename Scalar>
Mat2<Scalar> sl2_matrix(const LieVec<Scalar>& X) {
  Mat2<Scalar> m;
  m << X(2), X(0), X(1), -X(2);
  return m;
}

template <typename Scalar>
LieVec<Scalar> make_lie(const Mat2<Scalar>& m, const Vec2<Scalar>& xi) {
  LieVec<Scalar> X;
  X << m(0, 1), m(1, 0), Scalar(0.5) * (m(0, 0) - m(1, 1)), xi(0), xi(1);
  return X;
}

template <typename Scalar>
Mat3<Scalar> lie_matrix(const LieVec<Scalar>& X) {
  Mat3<Scalar> m = Mat3<Scalar>::Zero();
  m.template topLeftCorner<2, 2>() = sl2_matrix(X);
  m(0, 2) = X(3);
  m(1, 2) = X(4);
  return m;
}

template <typename Scalar>
GroupElement<Scalar> exp(const LieVec<Scalar>& X) {
  return from_affine_matrix<Scalar>(lie_matrix(X).exp());
}

/// Inverse of exp on the ball dist(a, id) < 0.5.
template <typename Scalar>
LieVec<Scalar> log_near_identity(const GroupElement<Scalar>& a) {
  if (!(dist_to_identity(a) < Scalar(0.5)))
    throw DomainError("log_near_identity: element outside the ball of radius 0.5");
  const Mat3<Scalar> L = affine_matrix(a).log();
  return make_lie<Scalar>(L.template topLeftCorner<2, 2>(), L.template topRightCorner<2, 1>());
}

/// d/dt conj(h, exp(tX)) at t = 0, i.e. Ad(h) X = (g X g^-1, g xi - (g X g^-1) w).
template <typename Scalar>
LieVec<Scalar> adjoint(const GroupElement<Scalar>& h, const LieVec<Scalar>& X) {
  const Mat2<Scalar> m = h.sl2 * sl2_matrix(X) * h.sl2.inverse();
  const Vec2<Scalar> xi = h.sl2 * X.template tail<2>() - m * h.trans;
  return make_lie<Scalar>(m, xi);
}

/// Ad(h) as a 5x5 matrix acting on LieVec coordinates.
template <typename Scalar>
Eigen::Matrix<Scalar, 5, 5> adjoint_matrix(const GroupElement<Scalar>& h) {
  Eigen::Matrix<Scalar, 5, 5> A;
  for (int i = 0; i < 5; ++i) A.col(i) = adjoint(h, LieVec<Scalar>(LieVec<Scalar>::Unit(i)));
  return A;
}

// Generic affine groups (A, v) in GL(d) x| R^d, used for SO(3) x| R^3.

struct AffineElement {
  Eigen::MatrixXd linear;
  Eigen::VectorXd trans;

  AffineElement() = default;
  AffineElement(Eigen::MatrixXd a, Eigen::VectorXd v) : linear(std::move(a)), trans(std::move(v)) {
    if (linear.rows() != linear.cols() || linear.rows() != trans.size())
      throw std::invalid_argument("AffineElement: shape mismatch");
    if (std::abs(linear.determinant()) < 1e-12)
      throw DomainError("AffineElement: singular linear part");
  }

  [[nodiscard]] int dim() const { return static_cast<int>(trans.size()); }

  static AffineElement identity(int d) {
    return {Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d)};
  }
};

inline AffineElement mul(const AffineElement& a, const AffineElement& b) {
  return {a.linear * b.linear, a.trans + a.linear * b.trans};
}

inline AffineElement inv(const AffineElement& a) {
  Eigen::MatrixXd ai = a.linear.inverse();
  Eigen::VectorXd t = -(ai * a.trans);
  return {std::move(ai), std::move(t)};
}

inline AffineElement conj(const AffineElement& h, const AffineElement& x) {
  return mul(mul(h, x), inv(h));
}

/// Flattened (linear row-major, then translation) coordinates of the embedding.
inline Eigen::VectorXd embed(const AffineElement& a) {
  const int d = a.dim();
  Eigen::VectorXd p(d * d + d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) p(i * d + j) = a.linear(i, j);
  p.tail(d) = a.trans;
  return p;
}

inline double dist(const AffineElement& a, const AffineElement& b) {
  return (embed(a) - embed(b)).norm();
}

inline AffineElement to_affine(const Element& a) { return {a.sl2, a.trans}; }

}  // namespace chabauty
