#include "wtn/eval.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "wtn/random.hpp"

namespace wtn {

namespace {

using Gram = Eigen::MatrixXd;

void check_dims(Index xr, Index xc, Index yr, Index yc, const SamplingDistribution& d) {
  if (xr != yr || xc != yc) throw InvalidInput("weighted error: matrix dimensions differ");
  if (d.rows() != xr || d.cols() != xc) throw InvalidInput("weighted error: distribution does not match matrix");
}

// Inner product <A, B> of two symmetric Gram matrices.
double frobenius_dot(const Gram& a, const Gram& b) { return a.cwiseProduct(b).sum(); }

double block_mean(const FactorMatrix<double>& w, const FactorMatrix<double>& z, Index begin, Index size) {
  const auto wb = w.middleCols(begin, size);
  const auto zb = z.middleCols(begin, size);
  const Gram gw = wb * wb.transpose();
  const Gram gz = zb * zb.transpose();
  return frobenius_dot(gw, gz) / (static_cast<double>(size) * static_cast<double>(size));
}

}  // namespace

WeightedError weighted_error(const MatrixXr& x, const MatrixXr& y, const SamplingDistribution& d) {
  check_dims(x.rows(), x.cols(), y.rows(), y.cols(), d);
  const MatrixXr sq = (x - y).array().square().matrix();
  WeightedError out;
  switch (d.kind()) {
    case SamplingKind::uniform:
      out.overall = sq.mean();
      break;
    case SamplingKind::two_block: {
      const Index a = d.n_a();
      const Index b = d.n_b();
      out.block_a = sq.topLeftCorner(a, a).mean();
      out.block_b = sq.block(a, a, b, b).mean();
      out.overall = 0.5 * *out.block_a + 0.5 * *out.block_b;
      break;
    }
    case SamplingKind::product: {
      const Marginals w = d.marginals();
      out.overall = w.p.dot(sq * w.q) / d.total_mass();
      break;
    }
  }
  return out;
}

WeightedError weighted_error(const Factors& x, const Factors& y, const SamplingDistribution& d) {
  check_dims(x.rows(), x.cols(), y.rows(), y.cols(), d);
  const Index kx = x.k();
  const Index ky = y.k();
  FactorMatrix<double> w(kx + ky, x.rows());
  FactorMatrix<double> z(kx + ky, x.cols());
  w << x.U, y.U;
  z << x.V, -y.V;

  WeightedError out;
  switch (d.kind()) {
    case SamplingKind::uniform:
      out.overall = frobenius_dot(w * w.transpose(), z * z.transpose()) /
                    (static_cast<double>(x.rows()) * static_cast<double>(x.cols()));
      break;
    case SamplingKind::two_block:
      out.block_a = block_mean(w, z, 0, d.n_a());
      out.block_b = block_mean(w, z, d.n_a(), d.n_b());
      out.overall = 0.5 * *out.block_a + 0.5 * *out.block_b;
      break;
    case SamplingKind::product: {
      const Marginals m = d.marginals();
      const Gram gw = w * m.p.asDiagonal() * w.transpose();
      const Gram gz = z * m.q.asDiagonal() * z.transpose();
      out.overall = frobenius_dot(gw, gz) / d.total_mass();
      break;
    }
  }
  return out;
}

double weighted_mse(const FactorModel& model, const MatrixXr& y, const SamplingDistribution& d) {
  const MatrixXr x = reconstruct(model.with_offset());
  return weighted_mse(x, y, d);
}

WeightedError excess_error(const FactorModel& model, const Factors& target, const SamplingDistribution& d) {
  return weighted_error(model.with_offset(), target, d);
}

MonteCarloEstimate weighted_mse_monte_carlo(const FactorModel& model, const Factors& target,
                                            const SamplingDistribution& d, std::size_t draws, std::uint64_t seed) {
  if (draws < 2) throw InvalidInput("monte carlo: need at least two draws");
  if (model.rows() != target.rows() || model.cols() != target.cols()) {
    throw InvalidInput("monte carlo: dimensions differ");
  }
  Rng rng(seed);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t t = 0; t < draws; ++t) {
    const auto [i, j] = d.draw(rng);
    const double e = model.predict(i, j) - target.entry(i, j);
    const double v = e * e;
    // Welford update.
    const double delta = v - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(draws - 1);
  return {mean, std::sqrt(var / static_cast<double>(draws)), draws};
}

double holdout_rmse(const FactorModel& model, const ObservationSet& test) {
  if (test.empty()) throw InvalidInput("holdout_rmse: empty test set");
  double acc = 0.0;
  for (const Triplet& t : test.triplets) {
    const double r = t.value - model.predict(t.row, t.col);
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(test.size()));
}

std::string to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["weighted_mse"] = r.weighted_mse;
  if (r.excess_error) j["excess_error"] = *r.excess_error;
  if (r.rmse) j["rmse"] = *r.rmse;
  if (r.error_a) j["error_a"] = *r.error_a;
  if (r.error_b) j["error_b"] = *r.error_b;
  return j.dump(2);
}

std::string csv_header(const EvalReport&) { return "weighted_mse,excess_error,rmse,error_a,error_b"; }

std::string csv_row(const EvalReport& r) {
  std::ostringstream out;
  out.precision(17);
  auto opt = [&](const std::optional<double>& v) {
    if (v) out << *v;
  };
  out << r.weighted_mse << ',';
  opt(r.excess_error);
  out << ',';
  opt(r.rmse);
  out << ',';
  opt(r.error_a);
  out << ',';
  opt(r.error_b);
  return out.str();
}

}  // namespace wtn
