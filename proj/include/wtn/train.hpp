#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wtn/norms.hpp"
#include "wtn/types.hpp"

namespace wtn {

enum class TrainMode { deterministic, parallel };

struct TrainConfig {
  Index k = 30;
  /// Penalty weight on the normalized scale, see normalized_penalty().
  double lambda = 0.1;
  double alpha = 1.0;
  int epochs = 60;
  double learning_rate = 0.005;
  double lr_decay = 1.0;
  double init_scale = 0.01;
  std::uint64_t seed = 1;
  TrainMode mode = TrainMode::deterministic;
  int threads = 0;  // parallel mode only; 0 = hardware concurrency
  bool center = true;

  void validate() const;
};

/// Per-observation penalty of the sum-form objective
///
///   sum_{(i,j) in S} (Y_ij - U_i.V_j)^2 + 1/2 (row_scale n_i^(alpha-1) ||U_i||^2 + col_scale m_j^(alpha-1) ||V_j||^2).
///
/// With row_scale = col_scale = lambda/|S| this is the empirical-marginal objective verbatim.
struct Penalty {
  double row_scale = 0.0;
  double col_scale = 0.0;
  double alpha = 1.0;
};

/// row_scale = col_scale = lambda_sum / |S|.
Penalty sum_form_penalty(double lambda_sum, double alpha, std::size_t sample_size);

/// Penalty whose minimized sum over factorizations equals |S| lambda ||X||_{tr(p~,q~)} with
/// p~ = p^alpha / n^(1-alpha), q~ = q^alpha / m^(1-alpha) at the empirical marginals, i.e. the
/// objective (1/|S|) sum (Y - X)^2 + lambda sqrt(tc_{p,q,alpha}(X)) scaled by |S|.
///
/// row_scale = lambda (|S|/n)^(1-alpha), col_scale = lambda (|S|/m)^(1-alpha).
Penalty normalized_penalty(double lambda, double alpha, std::size_t sample_size, Index n, Index m);

/// The sum-form lambda equivalent to a true-marginal lambda when p = n_i/|S|: lambda * |S|^(1-alpha).
double sum_form_lambda_from_marginal_lambda(double lambda_marginal, double alpha, std::size_t sample_size);

/// c_i = row_scale n_i^(alpha-1), d_j = col_scale m_j^(alpha-1); zero for unobserved indices.
struct PenaltyCoefficients {
  VectorXr row;
  VectorXr col;
};

PenaltyCoefficients penalty_coefficients(const Penalty& pen, const Counts& counts);

/// Sum-form objective; counts are taken from `s`.
double objective(const Factors& f, const ObservationSet& s, const Penalty& pen);

/// Regularization part of objective() alone.
double penalty_term(const Factors& f, const ObservationSet& s, const Penalty& pen);

/// sum_S (Y_ij - U_i.V_j)^2 + lambda/2 (p(i)^alpha/n_i ||U_i||^2 + q(j)^alpha/m_j ||V_j||^2).
double objective_true_marginals(const Factors& f, const ObservationSet& s, const Marginals& w, double lambda,
                                double alpha);

/// One stochastic gradient step on the term of observation `t`:
///   r = value - U_i.V_j,  U_i += lr (2 r V_j - c_i U_i),  V_j += lr (2 r U_i - d_j V_j).
/// Returns the term's objective value before the update. Throws DivergenceError if the update
/// is not finite.
double sgd_step(Factors& f, const Triplet& t, const PenaltyCoefficients& coef, double learning_rate,
                std::size_t step_index = 0);

struct FactorModel {
  Factors factors;
  double alpha = 1.0;
  double lambda = 0.0;
  double global_mean = 0.0;
  int epochs = 0;
  std::uint64_t seed = 0;
  double learning_rate = 0.0;
  double lr_decay = 1.0;
  /// Sum over each epoch of the per-term objective at the visited iterate.
  std::vector<double> epoch_objective;

  Index rows() const { return factors.rows(); }
  Index cols() const { return factors.cols(); }
  Index k() const { return factors.k(); }

  /// global_mean + U_i.V_j; indices outside the model fall back to global_mean.
  double predict(Index i, Index j) const {
    if (i < 0 || j < 0 || i >= rows() || j >= cols()) return global_mean;
    return global_mean + factors.entry(i, j);
  }

  /// Factors of the full prediction matrix, with the mean folded in as an extra rank-one term.
  Factors with_offset() const;
};

/// Sum-form objective of a trained model, with the model's own (normalized) lambda and alpha,
/// measured on data centered by the model's global mean.
double objective(const FactorModel& model, const ObservationSet& s);

/// Trains by SGD over seeded per-epoch permutations. Rows and columns without observations end
/// with zero factors so they predict the global mean.
FactorModel train(const ObservationSet& s, const TrainConfig& cfg);

struct GridPoint {
  double lambda = 0.0;
  double alpha = 0.0;
};

/// Metric returned by a sweep evaluation: the primary value plus named extras for CSV output.
struct Metrics {
  double value = 0.0;
  std::vector<std::pair<std::string, double>> extra;
};

struct SweepRow {
  GridPoint point;
  std::uint64_t seed = 0;
  Metrics metrics;
  std::string error;  // empty on success
  bool ok() const { return error.empty(); }
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<std::size_t> argmin;
};

/// Seed for one grid point; a function of the base seed and the point itself, so duplicates agree.
std::uint64_t grid_seed(std::uint64_t base_seed, const GridPoint& p);

/// Trains one model per grid point and evaluates it. Failures are recorded per row.
SweepResult sweep(const ObservationSet& s, const std::vector<GridPoint>& grid, const TrainConfig& base,
                  const std::function<Metrics(const FactorModel&)>& eval_fn, int workers = 1);

}  // namespace wtn
