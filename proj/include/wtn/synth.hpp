#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "wtn/norms.hpp"
#include "wtn/random.hpp"
#include "wtn/types.hpp"

namespace wtn {

enum class SamplingKind { uniform, two_block, product };

/// A distribution over index pairs (i, j) of an n x m matrix.
///
/// two_block: uniform over A = [0, n_A)^2 with probability 1/2 and uniform over
/// B = [n_A, n_A + n_B)^2 with probability 1/2. product: P(i, j) proportional to p(i) q(j).
class SamplingDistribution {
 public:
  static SamplingDistribution uniform(Index n, Index m);
  /// Matrix size defaults to (n_A + n_B) x (n_A + n_B).
  static SamplingDistribution two_block(Index n_a, Index n_b, Index n = 0, Index m = 0);
  static SamplingDistribution product(Marginals w);

  SamplingKind kind() const { return kind_; }
  Index rows() const { return n_; }
  Index cols() const { return m_; }
  Index n_a() const { return n_a_; }
  Index n_b() const { return n_b_; }

  bool in_a(Index i, Index j) const { return i < n_a_ && j < n_a_; }
  bool in_b(Index i, Index j) const {
    return i >= n_a_ && j >= n_a_ && i < n_a_ + n_b_ && j < n_a_ + n_b_;
  }

  double total_mass() const;
  double probability(Index i, Index j) const;
  Marginals marginals() const;

  /// One draw; throws InvalidInput if the distribution has no mass.
  std::pair<Index, Index> draw(Rng& rng) const;

 private:
  SamplingDistribution() = default;

  SamplingKind kind_ = SamplingKind::uniform;
  Index n_ = 0;
  Index m_ = 0;
  Index n_a_ = 0;
  Index n_b_ = 0;
  Marginals weights_;
  std::vector<double> row_cdf_;
  std::vector<double> col_cdf_;
};

inline Marginals marginals_of(const SamplingDistribution& d) { return d.marginals(); }

struct LowRankTarget {
  MatrixXr Y;
  Factors factors;
};

/// U (k x n) and V (k x m) with i.i.d. N(0, 1/sqrt(k)) entries, so U^T V has unit-variance entries.
Factors gen_orthogonal_factors(Index n, Index m, Index k, std::uint64_t seed);

LowRankTarget gen_orthogonal_lowrank(Index n, Index m, Index k, std::uint64_t seed);

/// `count` i.i.d. draws from `d`, each valued Y_ij plus fresh N(0, noise_sd^2) noise.
ObservationSet sample_observations(const MatrixXr& y, const SamplingDistribution& d, std::size_t count,
                                   double noise_sd, std::uint64_t seed);

/// Same as above with Y given in factored form, for targets too large to store densely.
ObservationSet sample_observations(const Factors& y, const SamplingDistribution& d, std::size_t count,
                                   double noise_sd, std::uint64_t seed);

/// p(i) proportional to (i+1)^-exponent and likewise for q.
Marginals power_law_marginals(Index n, Index m, double exponent);

}  // namespace wtn
