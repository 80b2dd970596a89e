#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "wtn/synth.hpp"
#include "wtn/train.hpp"
#include "wtn/types.hpp"

namespace wtn {

/// Weighted squared error, split by block for two-block distributions.
struct WeightedError {
  double overall = 0.0;
  std::optional<double> block_a;  // mean squared error over A
  std::optional<double> block_b;
};

struct EvalReport {
  double weighted_mse = 0.0;
  std::optional<double> excess_error;
  std::optional<double> rmse;
  std::optional<double> error_a;
  std::optional<double> error_b;
};

/// sum_ij D(i,j) (X_ij - Y_ij)^2, exact.
WeightedError weighted_error(const MatrixXr& x, const MatrixXr& y, const SamplingDistribution& d);

/// Same for X = U^T V and Y = P^T Q given in factored form, in O((n + m) k^2) without forming
/// either matrix: sum_ij D(i,j) (w_i . z_j)^2 with w_i = [U_i; P_i] and z_j = [V_j; -Q_j].
WeightedError weighted_error(const Factors& x, const Factors& y, const SamplingDistribution& d);

inline double weighted_mse(const MatrixXr& x, const MatrixXr& y, const SamplingDistribution& d) {
  return weighted_error(x, y, d).overall;
}
inline double weighted_mse(const Factors& x, const Factors& y, const SamplingDistribution& d) {
  return weighted_error(x, y, d).overall;
}
double weighted_mse(const FactorModel& model, const MatrixXr& y, const SamplingDistribution& d);

/// ||X - X*||_D^2; never touches the noisy observations.
inline WeightedError excess_error(const MatrixXr& x, const MatrixXr& target, const SamplingDistribution& d) {
  return weighted_error(x, target, d);
}
WeightedError excess_error(const FactorModel& model, const Factors& target, const SamplingDistribution& d);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t draws = 0;
};

/// Monte-Carlo estimate of the weighted error from `draws` i.i.d. index pairs.
MonteCarloEstimate weighted_mse_monte_carlo(const FactorModel& model, const Factors& target,
                                            const SamplingDistribution& d, std::size_t draws, std::uint64_t seed);

/// Root mean squared error over the triplets (repeats counted by multiplicity).
double holdout_rmse(const FactorModel& model, const ObservationSet& test);

std::string to_json(const EvalReport& r);
std::string csv_header(const EvalReport& r);
std::string csv_row(const EvalReport& r);

}  // namespace wtn
