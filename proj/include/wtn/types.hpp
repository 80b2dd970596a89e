#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wtn {

using Index = Eigen::Index;

/// Row-major dense matrix; targets Y, X* and dense reconstructions live here.
template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Factor storage is column-major so that the factor vector of row i (column i of U) is contiguous.
template <typename Scalar>
using FactorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXr = DenseMatrix<double>;
using VectorXr = Vector<double>;

/// X = U^T V with U of size k x n and V of size k x m.
template <typename Scalar>
struct FactorPair {
  FactorMatrix<Scalar> U;
  FactorMatrix<Scalar> V;

  FactorPair() = default;
  FactorPair(FactorMatrix<Scalar> u, FactorMatrix<Scalar> v) : U(std::move(u)), V(std::move(v)) {
    if (U.rows() != V.rows()) throw std::invalid_argument("FactorPair: U and V must share the inner dimension k");
  }
  static FactorPair zeros(Index k, Index n, Index m) {
    return FactorPair(FactorMatrix<Scalar>::Zero(k, n), FactorMatrix<Scalar>::Zero(k, m));
  }

  Index k() const { return U.rows(); }
  Index rows() const { return U.cols(); }
  Index cols() const { return V.cols(); }

  Scalar entry(Index i, Index j) const { return U.col(i).dot(V.col(j)); }
};

using Factors = FactorPair<double>;

struct Triplet {
  Index row = 0;
  Index col = 0;
  double value = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// A sample of observed entries. Repeated (row, col) pairs are allowed.
struct ObservationSet {
  Index n = 0;
  Index m = 0;
  std::vector<Triplet> triplets;

  ObservationSet() = default;
  ObservationSet(Index rows, Index cols) : n(rows), m(cols) {}

  std::size_t size() const { return triplets.size(); }
  bool empty() const { return triplets.empty(); }
  void push_back(Index i, Index j, double v) { triplets.push_back({i, j, v}); }

  friend bool operator==(const ObservationSet&, const ObservationSet&) = default;
};

/// Per-row and per-column observation counts n_i and m_j.
struct Counts {
  std::vector<std::int64_t> rows;
  std::vector<std::int64_t> cols;
};

Counts count_observations(const ObservationSet& s);

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check_in_range(const ObservationSet& s);

}  // namespace wtn
