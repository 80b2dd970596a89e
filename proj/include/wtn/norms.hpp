#pragma once

#include <cmath>

#include "wtn/linalg.hpp"
#include "wtn/types.hpp"

namespace wtn {

/// Row marginal p(i) and column marginal q(j) of a sampling distribution.
struct Marginals {
  VectorXr p;
  VectorXr q;

  Marginals() = default;
  Marginals(VectorXr rows, VectorXr cols) : p(std::move(rows)), q(std::move(cols)) {}

  static Marginals uniform(Index n, Index m) {
    return {VectorXr::Constant(n, 1.0 / static_cast<double>(n)), VectorXr::Constant(m, 1.0 / static_cast<double>(m))};
  }

  /// Throws InvalidInput unless both vectors are nonnegative and sum to one within `tolerance`.
  void validate(double tolerance = 1e-10) const;
};

/// Everything the `norms` command prints for one matrix.
struct ComplexityReport {
  double trace_norm = 0.0;
  double tc = 0.0;
  double tc_pq = 0.0;
  double tc_pq_alpha = 0.0;
  double alpha = 0.0;
};

/// x^e with 0^0 = 1 so that alpha = 0 leaves zero-marginal rows untouched.
inline double marginal_power(double x, double e) {
  if (e == 0.0) return 1.0;
  return std::pow(x, e);
}

namespace detail {

inline VectorXr powered(const VectorXr& w, double e) {
  VectorXr out(w.size());
  for (Index i = 0; i < w.size(); ++i) out(i) = marginal_power(w(i), e);
  return out;
}

inline void check_weights(const Marginals& w, Index n, Index m, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("alpha must lie in [0, 1]");
  if (w.p.size() != n || w.q.size() != m) throw InvalidInput("marginal dimensions do not match the matrix");
  if ((w.p.array() < 0.0).any() || (w.q.array() < 0.0).any()) throw InvalidInput("negative marginal");
}

// Marginals p^alpha / n^(1-alpha), q^alpha / m^(1-alpha) used by the normalized alpha-measure.
inline Marginals effective_marginals(const Marginals& w, double alpha) {
  const double n = static_cast<double>(w.p.size());
  const double m = static_cast<double>(w.q.size());
  return {powered(w.p, alpha) / std::pow(n, 1.0 - alpha), powered(w.q, alpha) / std::pow(m, 1.0 - alpha)};
}

}  // namespace detail

template <typename Derived>
typename Derived::Scalar trace_norm(const Eigen::MatrixBase<Derived>& m) {
  return singular_values(m).sum();
}

template <typename Scalar>
Scalar trace_norm(const FactorPair<Scalar>& f) {
  return singular_values_factored(f).sum();
}

/// ||X||_tr^2 / (n m): on the scale of the rank for unit-variance matrices.
template <typename Derived>
typename Derived::Scalar tc(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0;
  const auto t = trace_norm(m);
  return t * t / static_cast<typename Derived::Scalar>(m.rows() * m.cols());
}

template <typename Scalar>
Scalar tc(const FactorPair<Scalar>& f) {
  const Scalar t = trace_norm(f);
  return t * t / static_cast<Scalar>(f.rows() * f.cols());
}

/// ||diag(p^(alpha/2)) M diag(q^(alpha/2))||_tr.
template <typename Derived>
typename Derived::Scalar weighted_trace_norm(const Eigen::MatrixBase<Derived>& m, const Marginals& w, double alpha) {
  using Scalar = typename Derived::Scalar;
  detail::check_weights(w, m.rows(), m.cols(), alpha);
  const Vector<Scalar> rs = detail::powered(w.p, alpha / 2.0).template cast<Scalar>();
  const Vector<Scalar> cs = detail::powered(w.q, alpha / 2.0).template cast<Scalar>();
  const DenseMatrix<Scalar> scaled = rs.asDiagonal() * m * cs.asDiagonal();
  return trace_norm(scaled);
}

template <typename Scalar>
Scalar weighted_trace_norm(const FactorPair<Scalar>& f, const Marginals& w, double alpha) {
  detail::check_weights(w, f.rows(), f.cols(), alpha);
  const Vector<Scalar> rs = detail::powered(w.p, alpha / 2.0).template cast<Scalar>();
  const Vector<Scalar> cs = detail::powered(w.q, alpha / 2.0).template cast<Scalar>();
  const FactorPair<Scalar> scaled(f.U * rs.asDiagonal(), f.V * cs.asDiagonal());
  return trace_norm(scaled);
}

/// Normalized weighted complexity. alpha = 1 gives ||X||_{tr(p,q)}^2; alpha = 0 gives tc(X).
template <typename Derived>
typename Derived::Scalar tc_pq(const Eigen::MatrixBase<Derived>& m, const Marginals& w, double alpha) {
  detail::check_weights(w, m.rows(), m.cols(), alpha);
  const auto t = weighted_trace_norm(m, detail::effective_marginals(w, alpha), 1.0);
  return t * t;
}

template <typename Scalar>
Scalar tc_pq(const FactorPair<Scalar>& f, const Marginals& w, double alpha) {
  detail::check_weights(w, f.rows(), f.cols(), alpha);
  const Scalar t = weighted_trace_norm(f, detail::effective_marginals(w, alpha), 1.0);
  return t * t;
}

/// 1/2 (sum_i p(i)^alpha ||U_i||^2 + sum_j q(j)^alpha ||V_j||^2), an upper bound on the
/// partially-weighted trace norm of U^T V, tight for the balanced SVD factorization.
template <typename Scalar>
Scalar factored_weighted_penalty(const FactorPair<Scalar>& f, const Marginals& w, double alpha) {
  detail::check_weights(w, f.rows(), f.cols(), alpha);
  const Vector<Scalar> pu = detail::powered(w.p, alpha).template cast<Scalar>();
  const Vector<Scalar> qv = detail::powered(w.q, alpha).template cast<Scalar>();
  const Scalar row_part = f.U.colwise().squaredNorm().dot(pu.transpose());
  const Scalar col_part = f.V.colwise().squaredNorm().dot(qv.transpose());
  return Scalar(0.5) * (row_part + col_part);
}

template <typename Derived>
ComplexityReport complexity(const Eigen::MatrixBase<Derived>& m, const Marginals& w, double alpha) {
  ComplexityReport r;
  r.alpha = alpha;
  r.trace_norm = static_cast<double>(trace_norm(m));
  r.tc = static_cast<double>(tc(m));
  r.tc_pq = static_cast<double>(tc_pq(m, w, 1.0));
  r.tc_pq_alpha = static_cast<double>(tc_pq(m, w, alpha));
  return r;
}

template <typename Scalar>
ComplexityReport complexity(const FactorPair<Scalar>& f, const Marginals& w, double alpha) {
  ComplexityReport r;
  r.alpha = alpha;
  r.trace_norm = static_cast<double>(trace_norm(f));
  r.tc = static_cast<double>(tc(f));
  r.tc_pq = static_cast<double>(tc_pq(f, w, 1.0));
  r.tc_pq_alpha = static_cast<double>(tc_pq(f, w, alpha));
  return r;
}

}  // namespace wtn
