#include "wtn/experiments.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "wtn/eval.hpp"
#include "wtn/norms.hpp"
#include "wtn/random.hpp"
#include "wtn/synth.hpp"

namespace wtn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ostringstream csv_stream() {
  std::ostringstream out;
  out.precision(17);
  return out;
}

double metric(const Metrics& m, const std::string& name) {
  for (const auto& [key, value] : m.extra)
    if (key == name) return value;
  return kNaN;
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw InvalidInput("log_grid: need 0 < lo <= hi and count >= 1");
  if (count == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log10(lo), b = std::log10(hi);
  for (int t = 0; t < count; ++t) out[static_cast<std::size_t>(t)] = std::pow(10.0, a + (b - a) * t / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

TrainConfig synthetic_train_defaults() {
  TrainConfig cfg;
  cfg.k = 30;
  cfg.epochs = 300;
  cfg.learning_rate = 0.05;
  cfg.lr_decay = 0.99;
  cfg.seed = 5;
  return cfg;
}

std::optional<std::size_t> CurveTable::argmin(double alpha) const {
  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const CurveRow& row = rows[r];
    if (row.alpha != alpha || !row.error.empty() || !std::isfinite(row.excess)) continue;
    if (!best || row.excess < rows[*best].excess) best = r;
  }
  return best;
}

CurveTable run_synthetic_blocks(const SyntheticBlocksConfig& cfg) {
  if (cfg.lambdas.empty() || cfg.alphas.empty()) throw InvalidInput("synth-blocks: empty grid");
  const auto dist = SamplingDistribution::two_block(cfg.n_a, cfg.n_b);
  const Index n = dist.rows();
  const Factors target = gen_orthogonal_factors(n, n, cfg.k_true, cfg.target_seed);
  const ObservationSet s = sample_observations(target, dist, cfg.sample_size, cfg.noise_sd, cfg.sample_seed);
  const Marginals w = dist.marginals();

  std::vector<GridPoint> grid;
  for (double a : cfg.alphas)
    for (double l : cfg.lambdas) grid.push_back({l, a});

  const auto result = sweep(s, grid, cfg.train, [&](const FactorModel& model) {
    const Factors x = model.with_offset();
    const WeightedError e = weighted_error(x, target, dist);
    return Metrics{e.overall, {{"excess_a", *e.block_a}, {"excess_b", *e.block_b},
                               {"tc", tc(x)}, {"tc_pq", tc_pq(x, w, 1.0)}}};
  }, cfg.workers);

  CurveTable table;
  for (const SweepRow& r : result.rows) {
    CurveRow row;
    row.alpha = r.point.alpha;
    row.lambda = r.point.lambda;
    row.seed = r.seed;
    row.excess = r.metrics.value;
    row.excess_a = metric(r.metrics, "excess_a");
    row.excess_b = metric(r.metrics, "excess_b");
    row.tc = metric(r.metrics, "tc");
    row.tc_pq = metric(r.metrics, "tc_pq");
    row.error = r.error;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string to_csv(const CurveTable& t) {
  auto out = csv_stream();
  out << "alpha,lambda,seed,excess_error,excess_a,excess_b,tc,tc_pq,status\n";
  for (const CurveRow& r : t.rows) {
    out << r.alpha << ',' << r.lambda << ',' << r.seed << ',' << r.excess << ',' << r.excess_a << ',' << r.excess_b
        << ',' << r.tc << ',' << r.tc_pq << ',' << (r.error.empty() ? "ok" : "failed") << '\n';
  }
  return out.str();
}

RatingsDataset generate_long_tail(const LongTailConfig& cfg) {
  const auto dist = cfg.exponent == 0.0
                        ? SamplingDistribution::uniform(cfg.users, cfg.items)
                        : SamplingDistribution::product(power_law_marginals(cfg.users, cfg.items, cfg.exponent));
  const Factors truth = gen_orthogonal_factors(cfg.users, cfg.items, cfg.k_true, mix_seed(cfg.seed, 1));
  return make_dataset(sample_observations(truth, dist, cfg.ratings, cfg.noise_sd, mix_seed(cfg.seed, 2)));
}

TrainConfig alpha_sweep_train_defaults() {
  TrainConfig cfg;
  cfg.k = 30;
  cfg.epochs = 40;
  cfg.learning_rate = 0.02;
  cfg.lr_decay = 0.95;
  cfg.seed = 7;
  return cfg;
}

AlphaSweepResult run_alpha_sweep(const RatingsDataset& ds, const AlphaSweepConfig& cfg) {
  if (cfg.lambdas.empty() || cfg.alphas.empty()) throw InvalidInput("alpha-sweep: empty grid");
  if (cfg.valid_count == 0 || cfg.test_count == 0) throw InvalidInput("alpha-sweep: validation and test sets must be nonempty");
  const Split parts = split(ds, cfg.valid_count, cfg.test_count, cfg.split_seed);

  std::vector<GridPoint> grid;
  for (double a : cfg.alphas)
    for (double l : cfg.lambdas) grid.push_back({l, a});

  const auto result = sweep(parts.train.observations, grid, cfg.train, [&](const FactorModel& model) {
    return Metrics{holdout_rmse(model, parts.validation.observations),
                   {{"test_rmse", holdout_rmse(model, parts.test.observations)}}};
  }, cfg.workers);

  AlphaSweepResult out;
  for (const SweepRow& r : result.rows) {
    out.points.push_back({r.point.alpha, r.point.lambda, r.seed, r.metrics.value, metric(r.metrics, "test_rmse"), r.error});
  }
  for (double a : cfg.alphas) {
    const AlphaSweepPoint* best = nullptr;
    for (const AlphaSweepPoint& p : out.points) {
      if (p.alpha != a || !p.error.empty() || !std::isfinite(p.validation_rmse)) continue;
      if (!best || p.validation_rmse < best->validation_rmse) best = &p;
    }
    if (best) {
      out.selected.push_back({a, best->lambda, best->validation_rmse, best->test_rmse});
    } else {
      out.selected.push_back({a, kNaN, kNaN, kNaN});
    }
  }
  return out;
}

std::string to_csv(const AlphaSweepResult& r) {
  auto out = csv_stream();
  out << "alpha,best_lambda,validation_rmse,test_rmse\n";
  for (const AlphaSweepRow& row : r.selected)
    out << row.alpha << ',' << row.best_lambda << ',' << row.validation_rmse << ',' << row.test_rmse << '\n';
  return out.str();
}

std::string grid_csv(const AlphaSweepResult& r) {
  auto out = csv_stream();
  out << "alpha,lambda,seed,validation_rmse,test_rmse,status\n";
  for (const AlphaSweepPoint& p : r.points) {
    out << p.alpha << ',' << p.lambda << ',' << p.seed << ',' << p.validation_rmse << ',' << p.test_rmse << ','
        << (p.error.empty() ? "ok" : "failed") << '\n';
  }
  return out.str();
}

}  // namespace wtn
