#include "wtn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wtn {

namespace {

std::vector<double> cumulative(const VectorXr& w) {
  std::vector<double> cdf(static_cast<std::size_t>(w.size()));
  double acc = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    acc += w(i);
    cdf[static_cast<std::size_t>(i)] = acc;
  }
  return cdf;
}

Index draw_from_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<Index>(it - cdf.begin());
}

template <typename Entry>
ObservationSet sample_impl(Index n, Index m, Entry&& entry, const SamplingDistribution& d, std::size_t count,
                           double noise_sd, std::uint64_t seed) {
  if (!(noise_sd >= 0.0)) throw InvalidInput("sample_observations: noise_sd must be nonnegative");
  if (d.rows() != n || d.cols() != m) throw InvalidInput("sample_observations: distribution does not match target");
  if (!(d.total_mass() > 0.0)) throw InvalidInput("sample_observations: distribution has zero total mass");
  Rng rng(seed);
  ObservationSet s(n, m);
  s.triplets.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    const auto [i, j] = d.draw(rng);
    const double noise = noise_sd > 0.0 ? noise_sd * rng.normal() : 0.0;
    s.push_back(i, j, entry(i, j) + noise);
  }
  return s;
}

}  // namespace

SamplingDistribution SamplingDistribution::uniform(Index n, Index m) {
  if (n < 1 || m < 1) throw InvalidInput("uniform distribution needs n, m >= 1");
  SamplingDistribution d;
  d.kind_ = SamplingKind::uniform;
  d.n_ = n;
  d.m_ = m;
  return d;
}

SamplingDistribution SamplingDistribution::two_block(Index n_a, Index n_b, Index n, Index m) {
  if (n_a < 1 || n_b < 1) throw InvalidInput("two_block: block sizes must be >= 1");
  if (n == 0) n = n_a + n_b;
  if (m == 0) m = n_a + n_b;
  if (n_a + n_b > std::min(n, m)) throw InvalidInput("two_block: blocks overlap or do not fit in the matrix");
  SamplingDistribution d;
  d.kind_ = SamplingKind::two_block;
  d.n_ = n;
  d.m_ = m;
  d.n_a_ = n_a;
  d.n_b_ = n_b;
  return d;
}

SamplingDistribution SamplingDistribution::product(Marginals w) {
  if (w.p.size() < 1 || w.q.size() < 1) throw InvalidInput("product distribution needs nonempty marginals");
  if ((w.p.array() < 0.0).any() || (w.q.array() < 0.0).any()) throw InvalidInput("negative marginal");
  SamplingDistribution d;
  d.kind_ = SamplingKind::product;
  d.n_ = w.p.size();
  d.m_ = w.q.size();
  d.row_cdf_ = cumulative(w.p);
  d.col_cdf_ = cumulative(w.q);
  d.weights_ = std::move(w);
  return d;
}

double SamplingDistribution::total_mass() const {
  if (kind_ != SamplingKind::product) return 1.0;
  return weights_.p.sum() * weights_.q.sum();
}

double SamplingDistribution::probability(Index i, Index j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= m_) return 0.0;
  switch (kind_) {
    case SamplingKind::uniform:
      return 1.0 / (static_cast<double>(n_) * static_cast<double>(m_));
    case SamplingKind::two_block:
      if (in_a(i, j)) return 0.5 / (static_cast<double>(n_a_) * static_cast<double>(n_a_));
      if (in_b(i, j)) return 0.5 / (static_cast<double>(n_b_) * static_cast<double>(n_b_));
      return 0.0;
    case SamplingKind::product: {
      const double mass = total_mass();
      return mass > 0.0 ? weights_.p(i) * weights_.q(j) / mass : 0.0;
    }
  }
  return 0.0;
}

Marginals SamplingDistribution::marginals() const {
  switch (kind_) {
    case SamplingKind::uniform:
      return Marginals::uniform(n_, m_);
    case SamplingKind::two_block: {
      VectorXr p = VectorXr::Zero(n_);
      VectorXr q = VectorXr::Zero(m_);
      p.head(n_a_).setConstant(0.5 / static_cast<double>(n_a_));
      p.segment(n_a_, n_b_).setConstant(0.5 / static_cast<double>(n_b_));
      q.head(n_a_).setConstant(0.5 / static_cast<double>(n_a_));
      q.segment(n_a_, n_b_).setConstant(0.5 / static_cast<double>(n_b_));
      return {std::move(p), std::move(q)};
    }
    case SamplingKind::product:
      return weights_;
  }
  return {};
}

std::pair<Index, Index> SamplingDistribution::draw(Rng& rng) const {
  switch (kind_) {
    case SamplingKind::uniform:
      return {static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_))),
              static_cast<Index>(rng.below(static_cast<std::uint64_t>(m_)))};
    case SamplingKind::two_block: {
      const bool block_a = rng.uniform() < 0.5;
      const Index size = block_a ? n_a_ : n_b_;
      const Index offset = block_a ? 0 : n_a_;
      const Index i = offset + static_cast<Index>(rng.below(static_cast<std::uint64_t>(size)));
      const Index j = offset + static_cast<Index>(rng.below(static_cast<std::uint64_t>(size)));
      return {i, j};
    }
    case SamplingKind::product: {
      if (!(total_mass() > 0.0)) throw InvalidInput("cannot draw from a distribution with zero mass");
      const Index i = draw_from_cdf(row_cdf_, rng);
      const Index j = draw_from_cdf(col_cdf_, rng);
      return {i, j};
    }
  }
  return {0, 0};
}

Factors gen_orthogonal_factors(Index n, Index m, Index k, std::uint64_t seed) {
  if (k < 1) throw InvalidInput("gen_orthogonal_lowrank: k must be >= 1");
  if (n < 1 || m < 1) throw InvalidInput("gen_orthogonal_lowrank: n, m must be >= 1");
  if (k > std::min(n, m)) throw InvalidInput("gen_orthogonal_lowrank: k must not exceed min(n, m)");
  Rng rng(seed);
  // Variance 1/sqrt(k), i.e. standard deviation k^(-1/4).
  const double sd = std::pow(static_cast<double>(k), -0.25);
  Factors f = Factors::zeros(k, n, m);
  for (Index c = 0; c < n; ++c)
    for (Index l = 0; l < k; ++l) f.U(l, c) = sd * rng.normal();
  for (Index c = 0; c < m; ++c)
    for (Index l = 0; l < k; ++l) f.V(l, c) = sd * rng.normal();
  return f;
}

LowRankTarget gen_orthogonal_lowrank(Index n, Index m, Index k, std::uint64_t seed) {
  LowRankTarget t;
  t.factors = gen_orthogonal_factors(n, m, k, seed);
  t.Y = reconstruct(t.factors);
  return t;
}

ObservationSet sample_observations(const MatrixXr& y, const SamplingDistribution& d, std::size_t count,
                                   double noise_sd, std::uint64_t seed) {
  return sample_impl(
      y.rows(), y.cols(), [&](Index i, Index j) { return y(i, j); }, d, count, noise_sd, seed);
}

ObservationSet sample_observations(const Factors& y, const SamplingDistribution& d, std::size_t count,
                                   double noise_sd, std::uint64_t seed) {
  return sample_impl(
      y.rows(), y.cols(), [&](Index i, Index j) { return y.entry(i, j); }, d, count, noise_sd, seed);
}

Marginals power_law_marginals(Index n, Index m, double exponent) {
  if (n < 1 || m < 1) throw InvalidInput("power_law_marginals: n, m must be >= 1");
  VectorXr p(n), q(m);
  for (Index i = 0; i < n; ++i) p(i) = std::pow(static_cast<double>(i + 1), -exponent);
  for (Index j = 0; j < m; ++j) q(j) = std::pow(static_cast<double>(j + 1), -exponent);
  p /= p.sum();
  q /= q.sum();
  return {std::move(p), std::move(q)};
}

}  // namespace wtn
