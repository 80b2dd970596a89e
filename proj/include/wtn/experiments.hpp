#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wtn/data.hpp"
#include "wtn/train.hpp"

namespace wtn {

/// `count` points spaced evenly in log10 between lo and hi, both included.
std::vector<double> log_grid(double lo, double hi, int count);

/// SGD settings used by the synthetic experiments. Slower schedules than the TrainConfig
/// defaults leave the large block B underfit.
TrainConfig synthetic_train_defaults();

struct SyntheticBlocksConfig {
  Index n_a = 300;
  Index n_b = 4700;
  Index k_true = 2;
  double noise_sd = 1.0;
  std::size_t sample_size = 140000;
  std::vector<double> lambdas = log_grid(1e-3, 10.0, 30);
  std::vector<double> alphas = {0.0, 1.0};
  std::uint64_t target_seed = 11;
  std::uint64_t sample_seed = 12;
  TrainConfig train = synthetic_train_defaults();
  int workers = 1;
};

struct CurveRow {
  double alpha = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double excess = 0.0;
  double excess_a = 0.0;
  double excess_b = 0.0;
  double tc = 0.0;     // of the learned matrix
  double tc_pq = 0.0;  // under the true two-block marginals
  std::string error;
};

struct CurveTable {
  std::vector<CurveRow> rows;

  /// Row with the smallest finite excess error for this alpha.
  std::optional<std::size_t> argmin(double alpha) const;
};

/// Trains one model per (alpha, lambda) on a noisy two-block sample of an orthogonal low-rank
/// target and records its excess error against the target. Rows are ordered by alpha, then lambda.
CurveTable run_synthetic_blocks(const SyntheticBlocksConfig& cfg);

std::string to_csv(const CurveTable& t);

/// Low-rank ratings with power-law user and item popularity.
struct LongTailConfig {
  Index users = 2000;
  Index items = 1000;
  std::size_t ratings = 200000;
  Index k_true = 10;
  double exponent = 0.8;  // 0 gives uniform sampling
  double noise_sd = 1.0;
  std::uint64_t seed = 21;
};

RatingsDataset generate_long_tail(const LongTailConfig& cfg);

TrainConfig alpha_sweep_train_defaults();

struct AlphaSweepConfig {
  std::vector<double> alphas = {1.0, 0.9, 0.75, 0.5, 0.0};
  std::vector<double> lambdas = log_grid(0.01, 1.0, 7);
  std::size_t valid_count = 10000;
  std::size_t test_count = 10000;
  std::uint64_t split_seed = 31;
  TrainConfig train = alpha_sweep_train_defaults();
  int workers = 1;
};

struct AlphaSweepPoint {
  double alpha = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double validation_rmse = 0.0;
  double test_rmse = 0.0;
  std::string error;
};

struct AlphaSweepRow {
  double alpha = 0.0;
  double best_lambda = 0.0;
  double validation_rmse = 0.0;
  double test_rmse = 0.0;
};

struct AlphaSweepResult {
  std::vector<AlphaSweepPoint> points;  // full grid
  std::vector<AlphaSweepRow> selected;  // one per alpha, lambda chosen on validation
};

AlphaSweepResult run_alpha_sweep(const RatingsDataset& ds, const AlphaSweepConfig& cfg);

std::string to_csv(const AlphaSweepResult& r);
std::string grid_csv(const AlphaSweepResult& r);

}  // namespace wtn
