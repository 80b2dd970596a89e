#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "wtn/types.hpp"

namespace wtn {

/// Relative threshold used to count nonzero singular values.
inline constexpr double kRankTolerance = 1e-9;

namespace detail {

template <typename Scalar>
void clamp_tiny(Vector<Scalar>& values) {
  if (values.size() == 0) return;
  const Scalar floor = Scalar(1e-12) * values(0);
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) < floor) values(i) = Scalar(0);
  }
}

// Eigen 3.4.0's divide-and-conquer SVD occasionally returns wrong values on rank-deficient
// input. Its factorization is checked against `a` and JacobiSVD takes over when the check fails.
template <typename Scalar>
Vector<Scalar> checked_svd(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a) {
  using Dyn = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::BDCSVD<Dyn> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& u = svd.matrixU();
  const auto& v = svd.matrixV();
  const Scalar tol = std::sqrt(Eigen::NumTraits<Scalar>::epsilon()) / Scalar(100);
  const Index r = u.cols();
  const bool ok = (a - u * svd.singularValues().asDiagonal() * v.transpose()).norm() <= tol * std::max(Scalar(1), a.norm()) &&
                  (u.transpose() * u - Dyn::Identity(r, r)).norm() <= tol * Scalar(r) &&
                  (v.transpose() * v - Dyn::Identity(r, r)).norm() <= tol * Scalar(r);
  if (ok) return svd.singularValues();
  return Eigen::JacobiSVD<Dyn>(a).singularValues();
}

}  // namespace detail

/// Singular values of a dense matrix, sorted descending, length min(n, m).
template <typename Derived>
Vector<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (!m.allFinite()) throw InvalidInput("singular_values: matrix has non-finite entries");
  if (m.size() == 0) return Vector<Scalar>();
  Vector<Scalar> values = detail::checked_svd<Scalar>(m.eval());
  detail::clamp_tiny(values);
  return values;
}

namespace detail {

// Upper-triangular R from a thin QR of the n x k matrix `tall`, shape min(n,k) x k.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> thin_r(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& tall) {
  const Index r = std::min(tall.rows(), tall.cols());
  Eigen::HouseholderQR<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> qr(tall);
  return qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
}

}  // namespace detail

/// Singular values of U^T V without forming the n x m product.
///
/// With U^T = Q_u R_u and V^T = Q_v R_v, the product is Q_u (R_u R_v^T) Q_v^T, so the
/// spectrum equals that of the small core R_u R_v^T. The result is zero-padded to min(n, m).
template <typename Scalar>
Vector<Scalar> singular_values_factored(const FactorPair<Scalar>& f) {
  if (!f.U.allFinite() || !f.V.allFinite()) throw InvalidInput("singular_values_factored: non-finite factors");
  const Index n = f.rows();
  const Index m = f.cols();
  const Index len = std::min(n, m);
  Vector<Scalar> out = Vector<Scalar>::Zero(len);
  if (f.k() == 0 || len == 0) return out;

  using Dyn = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Dyn ru = detail::thin_r<Scalar>(f.U.transpose());
  const Dyn rv = detail::thin_r<Scalar>(f.V.transpose());
  const Dyn core = ru * rv.transpose();
  const Vector<Scalar> core_values = detail::checked_svd<Scalar>(core);
  const Index copy = std::min(len, core_values.size());
  out.head(copy) = core_values.head(copy);
  detail::clamp_tiny(out);
  return out;
}

/// Number of singular values above kRankTolerance * sigma_max.
template <typename Scalar>
Index numerical_rank(const Vector<Scalar>& spectrum, double tolerance = kRankTolerance) {
  if (spectrum.size() == 0 || spectrum(0) <= Scalar(0)) return 0;
  const Scalar cut = Scalar(tolerance) * spectrum(0);
  return static_cast<Index>((spectrum.array() > cut).count());
}

template <typename Scalar>
DenseMatrix<Scalar> reconstruct(const FactorPair<Scalar>& f) {
  return f.U.transpose() * f.V;
}

/// The matrix zeroed outside the observed index set. Repeats contribute the entry once.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> mask(const Eigen::MatrixBase<Derived>& m, const ObservationSet& s) {
  using Scalar = typename Derived::Scalar;
  DenseMatrix<Scalar> out = DenseMatrix<Scalar>::Zero(m.rows(), m.cols());
  for (const Triplet& t : s.triplets) {
    if (t.row < 0 || t.col < 0 || t.row >= m.rows() || t.col >= m.cols()) {
      throw InvalidInput("mask: observation (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                         ") out of range");
    }
    out(t.row, t.col) = m(t.row, t.col);
  }
  return out;
}

}  // namespace wtn
