#include "wtn/train.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "wtn/random.hpp"

namespace wtn {

void TrainConfig::validate() const {
  if (k < 1) throw InvalidInput("train: k must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("train: lambda must be finite and >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("train: alpha must lie in [0, 1]");
  if (epochs < 1) throw InvalidInput("train: epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidInput("train: learning_rate must be > 0");
  if (!(lr_decay > 0.0)) throw InvalidInput("train: lr_decay must be > 0");
  if (!(init_scale > 0.0)) throw InvalidInput("train: init_scale must be > 0");
  if (threads < 0) throw InvalidInput("train: threads must be >= 0");
}

Penalty sum_form_penalty(double lambda_sum, double alpha, std::size_t sample_size) {
  if (sample_size == 0) throw InvalidInput("penalty: empty sample");
  const double s = static_cast<double>(sample_size);
  return {lambda_sum / s, lambda_sum / s, alpha};
}

Penalty normalized_penalty(double lambda, double alpha, std::size_t sample_size, Index n, Index m) {
  if (sample_size == 0) throw InvalidInput("penalty: empty sample");
  const double s = static_cast<double>(sample_size);
  if (alpha == 1.0) return {lambda, lambda, alpha};
  return {lambda * std::pow(s / static_cast<double>(n), 1.0 - alpha),
          lambda * std::pow(s / static_cast<double>(m), 1.0 - alpha), alpha};
}

double sum_form_lambda_from_marginal_lambda(double lambda_marginal, double alpha, std::size_t sample_size) {
  return lambda_marginal * std::pow(static_cast<double>(sample_size), 1.0 - alpha);
}

PenaltyCoefficients penalty_coefficients(const Penalty& pen, const Counts& counts) {
  PenaltyCoefficients c{VectorXr::Zero(static_cast<Index>(counts.rows.size())),
                        VectorXr::Zero(static_cast<Index>(counts.cols.size()))};
  const double e = pen.alpha - 1.0;
  for (std::size_t i = 0; i < counts.rows.size(); ++i) {
    if (counts.rows[i] > 0) c.row(static_cast<Index>(i)) = pen.row_scale * marginal_power(static_cast<double>(counts.rows[i]), e);
  }
  for (std::size_t j = 0; j < counts.cols.size(); ++j) {
    if (counts.cols[j] > 0) c.col(static_cast<Index>(j)) = pen.col_scale * marginal_power(static_cast<double>(counts.cols[j]), e);
  }
  return c;
}

namespace {

void check_shapes(const Factors& f, const ObservationSet& s) {
  if (f.rows() != s.n || f.cols() != s.m) throw InvalidInput("factor dimensions do not match the observations");
}

double residual_sum(const Factors& f, const ObservationSet& s, double offset) {
  double acc = 0.0;
  for (const Triplet& t : s.triplets) {
    const double r = t.value - offset - f.entry(t.row, t.col);
    acc += r * r;
  }
  return acc;
}

double penalty_sum(const Factors& f, const ObservationSet& s, const PenaltyCoefficients& c) {
  double acc = 0.0;
  for (const Triplet& t : s.triplets) {
    acc += 0.5 * (c.row(t.row) * f.U.col(t.row).squaredNorm() + c.col(t.col) * f.V.col(t.col).squaredNorm());
  }
  return acc;
}

}  // namespace

double penalty_term(const Factors& f, const ObservationSet& s, const Penalty& pen) {
  check_shapes(f, s);
  return penalty_sum(f, s, penalty_coefficients(pen, count_observations(s)));
}

double objective(const Factors& f, const ObservationSet& s, const Penalty& pen) {
  check_shapes(f, s);
  return residual_sum(f, s, 0.0) + penalty_term(f, s, pen);
}

double objective_true_marginals(const Factors& f, const ObservationSet& s, const Marginals& w, double lambda,
                                double alpha) {
  check_shapes(f, s);
  if (w.p.size() < s.n || w.q.size() < s.m) throw InvalidInput("objective_true_marginals: marginals do not cover S");
  if ((w.p.array() < 0.0).any() || (w.q.array() < 0.0).any()) throw InvalidInput("negative marginal");
  const Counts counts = count_observations(s);
  double acc = 0.0;
  for (const Triplet& t : s.triplets) {
    const double r = t.value - f.entry(t.row, t.col);
    const double ni = static_cast<double>(counts.rows[static_cast<std::size_t>(t.row)]);
    const double mj = static_cast<double>(counts.cols[static_cast<std::size_t>(t.col)]);
    acc += r * r + 0.5 * lambda *
                       (marginal_power(w.p(t.row), alpha) / ni * f.U.col(t.row).squaredNorm() +
                        marginal_power(w.q(t.col), alpha) / mj * f.V.col(t.col).squaredNorm());
  }
  return acc;
}

double sgd_step(Factors& f, const Triplet& t, const PenaltyCoefficients& coef, double learning_rate,
                std::size_t step_index) {
  double* u = f.U.col(t.row).data();
  double* v = f.V.col(t.col).data();
  const Index k = f.k();
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (Index l = 0; l < k; ++l) {
    dot += u[l] * v[l];
    uu += u[l] * u[l];
    vv += v[l] * v[l];
  }
  const double r = t.value - dot;
  const double ci = coef.row(t.row);
  const double dj = coef.col(t.col);
  double check = 0.0;
  for (Index l = 0; l < k; ++l) {
    const double ul = u[l];
    const double vl = v[l];
    u[l] = ul + learning_rate * (2.0 * r * vl - ci * ul);
    v[l] = vl + learning_rate * (2.0 * r * ul - dj * vl);
    check += u[l] + v[l];
  }
  if (!std::isfinite(check)) {
    std::ostringstream msg;
    msg << "SGD diverged at step " << step_index << " (row " << t.row << ", col " << t.col
        << "); try a smaller learning rate";
    throw DivergenceError(msg.str());
  }
  return r * r + 0.5 * (ci * uu + dj * vv);
}

Factors FactorModel::with_offset() const {
  const Index k0 = k();
  Factors out = Factors::zeros(k0 + 1, rows(), cols());
  out.U.topRows(k0) = factors.U;
  out.V.topRows(k0) = factors.V;
  out.U.row(k0).setConstant(global_mean);
  out.V.row(k0).setOnes();
  return out;
}

double objective(const FactorModel& model, const ObservationSet& s) {
  check_shapes(model.factors, s);
  const Penalty pen = normalized_penalty(model.lambda, model.alpha, s.size(), s.n, s.m);
  return residual_sum(model.factors, s, model.global_mean) + penalty_term(model.factors, s, pen);
}

namespace {

constexpr double kFlushBelow = 1e-100;

// Lock-free step on shared factors for parallel mode. Element accesses are relaxed atomics, so
// concurrent updates to the same column interleave with last-write-wins semantics.
double racy_step(Factors& f, const Triplet& t, const PenaltyCoefficients& coef, double lr, VectorXr& ub,
                 VectorXr& vb) {
  const Index k = f.k();
  double* up = f.U.col(t.row).data();
  double* vp = f.V.col(t.col).data();
  for (Index l = 0; l < k; ++l) {
    ub(l) = std::atomic_ref<double>(up[l]).load(std::memory_order_relaxed);
    vb(l) = std::atomic_ref<double>(vp[l]).load(std::memory_order_relaxed);
  }
  const double r = t.value - ub.dot(vb);
  const double ci = coef.row(t.row);
  const double dj = coef.col(t.col);
  const double stiff = std::max(ci, dj);
  if (stiff * lr > 1.0) lr = 1.0 / stiff;
  const double term = r * r + 0.5 * (ci * ub.squaredNorm() + dj * vb.squaredNorm());
  for (Index l = 0; l < k; ++l) {
    const double nu = ub(l) + lr * (2.0 * r * vb(l) - ci * ub(l));
    const double nv = vb(l) + lr * (2.0 * r * ub(l) - dj * vb(l));
    std::atomic_ref<double>(up[l]).store(nu, std::memory_order_relaxed);
    std::atomic_ref<double>(vp[l]).store(nv, std::memory_order_relaxed);
  }
  return term;
}

}  // namespace

FactorModel train(const ObservationSet& s, const TrainConfig& cfg) {
  cfg.validate();
  if (s.empty()) throw InvalidInput("train: no observations");
  const Counts counts = count_observations(s);

  FactorModel model;
  model.alpha = cfg.alpha;
  model.lambda = cfg.lambda;
  model.epochs = cfg.epochs;
  model.seed = cfg.seed;
  model.learning_rate = cfg.learning_rate;
  model.lr_decay = cfg.lr_decay;
  if (cfg.center) {
    double sum = 0.0;
    for (const Triplet& t : s.triplets) sum += t.value;
    model.global_mean = sum / static_cast<double>(s.size());
  }

  ObservationSet centered = s;
  for (Triplet& t : centered.triplets) t.value -= model.global_mean;

  const Penalty pen = normalized_penalty(cfg.lambda, cfg.alpha, s.size(), s.n, s.m);
  const PenaltyCoefficients coef = penalty_coefficients(pen, counts);

  Rng rng(cfg.seed);
  Factors& f = model.factors;
  f = Factors::zeros(cfg.k, s.n, s.m);
  for (Index c = 0; c < s.n; ++c)
    for (Index l = 0; l < cfg.k; ++l) f.U(l, c) = cfg.init_scale * rng.normal();
  for (Index c = 0; c < s.m; ++c)
    for (Index l = 0; l < cfg.k; ++l) f.V(l, c) = cfg.init_scale * rng.normal();

  // Shuffled in place each epoch; sequential reads of the permuted triplets are cache friendly.
  std::vector<Triplet>& order = centered.triplets;
  double lr = cfg.learning_rate;
  std::size_t step = 0;
  const int workers = cfg.mode == TrainMode::parallel
                          ? (cfg.threads > 0 ? cfg.threads : std::max(1, static_cast<int>(std::thread::hardware_concurrency())))
                          : 1;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double epoch_sum = 0.0;
    if (workers == 1) {
      for (const Triplet& t : order) {
        const double stiff = std::max(coef.row(t.row), coef.col(t.col));
        epoch_sum += sgd_step(f, t, coef, stiff * lr > 1.0 ? 1.0 / stiff : lr, step++);
      }
    } else {
      std::vector<double> partial(static_cast<std::size_t>(workers), 0.0);
      std::vector<std::thread> pool;
      const std::size_t chunk = (order.size() + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          VectorXr ub(cfg.k), vb(cfg.k);
          const std::size_t begin = static_cast<std::size_t>(w) * chunk;
          const std::size_t end = std::min(order.size(), begin + chunk);
          double acc = 0.0;
          for (std::size_t p = begin; p < end; ++p) acc += racy_step(f, order[p], coef, lr, ub, vb);
          partial[static_cast<std::size_t>(w)] = acc;
        });
      }
      for (auto& th : pool) th.join();
      epoch_sum = std::accumulate(partial.begin(), partial.end(), 0.0);
      step += order.size();
      if (!f.U.allFinite() || !f.V.allFinite()) {
        throw DivergenceError("SGD diverged during epoch " + std::to_string(epoch) + "; try a smaller learning rate");
      }
    }
    // Heavily shrunk factors decay into subnormals, which are very slow on x86.
    f.U = (f.U.array().abs() < kFlushBelow).select(0.0, f.U);
    f.V = (f.V.array().abs() < kFlushBelow).select(0.0, f.V);
    model.epoch_objective.push_back(epoch_sum);
    lr *= cfg.lr_decay;
  }

  for (Index i = 0; i < s.n; ++i)
    if (counts.rows[static_cast<std::size_t>(i)] == 0) f.U.col(i).setZero();
  for (Index j = 0; j < s.m; ++j)
    if (counts.cols[static_cast<std::size_t>(j)] == 0) f.V.col(j).setZero();
  return model;
}

std::uint64_t grid_seed(std::uint64_t base_seed, const GridPoint& p) {
  return mix_seed(mix_seed(base_seed, std::bit_cast<std::uint64_t>(p.lambda)), std::bit_cast<std::uint64_t>(p.alpha));
}

SweepResult sweep(const ObservationSet& s, const std::vector<GridPoint>& grid, const TrainConfig& base,
                  const std::function<Metrics(const FactorModel&)>& eval_fn, int workers) {
  if (grid.empty()) throw InvalidInput("sweep: empty grid");
  SweepResult out;
  out.rows.resize(grid.size());

  auto run_point = [&](std::size_t idx) {
    SweepRow& row = out.rows[idx];
    row.point = grid[idx];
    row.seed = grid_seed(base.seed, grid[idx]);
    TrainConfig cfg = base;
    cfg.lambda = grid[idx].lambda;
    cfg.alpha = grid[idx].alpha;
    cfg.seed = row.seed;
    try {
      const FactorModel model = train(s, cfg);
      row.metrics = eval_fn(model);
    } catch (const std::exception& e) {
      row.error = e.what();
      row.metrics.value = std::numeric_limits<double>::quiet_NaN();
    }
  };

  if (workers <= 1) {
    for (std::size_t idx = 0; idx < grid.size(); ++idx) run_point(idx);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t idx = next++; idx < grid.size(); idx = next++) run_point(idx);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t idx = 0; idx < out.rows.size(); ++idx) {
    const SweepRow& row = out.rows[idx];
    if (!row.ok() || !std::isfinite(row.metrics.value)) continue;
    if (!out.argmin || row.metrics.value < out.rows[*out.argmin].metrics.value) out.argmin = idx;
  }
  return out;
}

}  // namespace wtn
