#include <doctest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "wtn/linalg.hpp"
#include "wtn/norms.hpp"
#include "wtn/synth.hpp"

using namespace wtn;

namespace {

// Upper 1e-3 quantile of chi-square with `df` degrees of freedom (Wilson-Hilferty).
double chi2_critical(double df) {
  const double z = 3.090232306167813;  // standard normal 0.999 quantile
  const double h = 2.0 / (9.0 * df);
  return df * std::pow(1.0 - h + z * std::sqrt(h), 3.0);
}

// Pearson statistic of sampled cell frequencies against d; cells of zero mass must stay empty.
void check_goodness_of_fit(const SamplingDistribution& d, std::size_t count, std::uint64_t seed) {
  const MatrixXr y = MatrixXr::Zero(d.rows(), d.cols());
  const ObservationSet s = sample_observations(y, d, count, 0.0, seed);
  MatrixXr freq = MatrixXr::Zero(d.rows(), d.cols());
  for (const Triplet& t : s.triplets) freq(t.row, t.col) += 1.0;
  double stat = 0.0;
  int cells = 0;
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.cols(); ++j) {
      const double p = d.probability(i, j);
      if (p == 0.0) {
        CHECK(freq(i, j) == 0.0);
        continue;
      }
      const double expected = p * static_cast<double>(count);
      stat += (freq(i, j) - expected) * (freq(i, j) - expected) / expected;
      ++cells;
    }
  }
  CHECK(stat < chi2_critical(cells - 1));
}

}  // namespace

TEST_CASE("orthogonal low-rank generator") {
  CHECK_THROWS_AS(gen_orthogonal_lowrank(3, 3, 0, 1), InvalidInput);
  CHECK_THROWS_AS(gen_orthogonal_lowrank(3, 4, 5, 1), InvalidInput);

  const LowRankTarget scalar = gen_orthogonal_lowrank(1, 1, 1, 7);
  CHECK(scalar.Y(0, 0) == doctest::Approx(scalar.factors.U(0, 0) * scalar.factors.V(0, 0)));

  const LowRankTarget t = gen_orthogonal_lowrank(500, 500, 5, 301);
  const double mean = t.Y.mean();
  const double var = (t.Y.array() - mean).square().mean();
  CHECK(var >= 0.9);
  CHECK(var <= 1.1);
  // Factor entries have variance 1/sqrt(k).
  const double fvar = t.factors.U.squaredNorm() / static_cast<double>(t.factors.U.size());
  CHECK(fvar == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(0.05));
  const double c = tc(t.Y);
  CHECK(c >= 4.5);
  CHECK(c <= 5.5);
  CHECK(numerical_rank(singular_values(t.Y)) == 5);

  const LowRankTarget again = gen_orthogonal_lowrank(500, 500, 5, 301);
  CHECK(again.Y == t.Y);
}

TEST_CASE("two-block distribution") {
  const auto one = SamplingDistribution::two_block(1, 1);
  CHECK(one.rows() == 2);
  CHECK(one.probability(0, 0) == 0.5);
  CHECK(one.probability(1, 1) == 0.5);
  CHECK(one.probability(0, 1) == 0.0);

  const auto d = SamplingDistribution::two_block(300, 4700);
  const Marginals w = marginals_of(d);
  CHECK(w.p(0) == doctest::Approx(1.0 / 600.0).epsilon(1e-14));
  CHECK(w.p(299) == doctest::Approx(1.0 / 600.0).epsilon(1e-14));
  CHECK(w.p(300) == doctest::Approx(1.0 / 9400.0).epsilon(1e-14));
  CHECK(w.q(4999) == doctest::Approx(1.0 / 9400.0).epsilon(1e-14));
  CHECK(std::abs(w.p.sum() - 1.0) <= 1e-10);
  CHECK(std::abs(w.q.sum() - 1.0) <= 1e-10);
  CHECK(d.probability(5, 7) == doctest::Approx(1.0 / (2.0 * 300 * 300)));
  CHECK(d.probability(305, 4000) == doctest::Approx(1.0 / (2.0 * 4700 * 4700)));
  CHECK(d.probability(5, 400) == 0.0);

  CHECK_THROWS_AS(SamplingDistribution::two_block(5, 6, 10, 10), InvalidInput);
  CHECK_NOTHROW(SamplingDistribution::two_block(4, 6, 10, 12));
}

TEST_CASE("marginals of each kind") {
  const Marginals u = marginals_of(SamplingDistribution::uniform(4, 5));
  CHECK(u.p(2) == doctest::Approx(0.25));
  CHECK(u.q(4) == doctest::Approx(0.2));
  const Marginals w = power_law_marginals(6, 3, 0.8);
  const Marginals back = marginals_of(SamplingDistribution::product(w));
  CHECK(back.p == w.p);
  CHECK(back.q == w.q);
}

TEST_CASE("sampling") {
  SUBCASE("point mass, no noise") {
    VectorXr p = VectorXr::Zero(3), q = VectorXr::Zero(4);
    p(1) = 1.0;
    q(2) = 1.0;
    const auto d = SamplingDistribution::product({p, q});
    MatrixXr y = MatrixXr::Zero(3, 4);
    y(1, 2) = 2.5;
    const ObservationSet s = sample_observations(y, d, 50, 0.0, 1);
    REQUIRE(s.size() == 50);
    for (const Triplet& t : s.triplets) CHECK(t == Triplet{1, 2, 2.5});
  }
  SUBCASE("zero mass and negative noise are rejected") {
    const auto d = SamplingDistribution::product({VectorXr::Zero(3), VectorXr::Ones(3) / 3.0});
    CHECK_THROWS_AS(sample_observations(MatrixXr::Zero(3, 3), d, 5, 0.0, 1), InvalidInput);
    CHECK_THROWS_AS(sample_observations(MatrixXr::Zero(3, 3), SamplingDistribution::uniform(3, 3), 5, -1.0, 1),
                    InvalidInput);
  }
  SUBCASE("half the two-block sample lands in A") {
    const auto d = SamplingDistribution::two_block(300, 4700);
    const Factors y = gen_orthogonal_factors(5000, 5000, 2, 302);
    const ObservationSet s = sample_observations(y, d, 140000, 1.0, 303);
    std::size_t in_a = 0;
    double noise_sum = 0.0;
    for (const Triplet& t : s.triplets) {
      if (d.in_a(t.row, t.col)) ++in_a;
      else CHECK(d.in_b(t.row, t.col));
      noise_sum += t.value - y.entry(t.row, t.col);
    }
    const double frac = static_cast<double>(in_a) / 140000.0;
    CHECK(frac >= 0.49);
    CHECK(frac <= 0.51);
    CHECK(std::abs(noise_sum / 140000.0) <= 3.0 / std::sqrt(140000.0));
  }
  SUBCASE("repeat draws get fresh noise") {
    const auto d = SamplingDistribution::two_block(1, 1);
    const ObservationSet s = sample_observations(MatrixXr::Zero(2, 2), d, 20, 1.0, 4);
    std::vector<double> values;
    for (const Triplet& t : s.triplets)
      if (t.row == 0) values.push_back(t.value);
    REQUIRE(values.size() >= 2);
    CHECK(values[0] != values[1]);
  }
  SUBCASE("deterministic in the seed") {
    const auto d = SamplingDistribution::uniform(30, 20);
    const MatrixXr y = gen_orthogonal_lowrank(30, 20, 2, 5).Y;
    CHECK(sample_observations(y, d, 1000, 0.5, 9) == sample_observations(y, d, 1000, 0.5, 9));
    CHECK_FALSE(sample_observations(y, d, 1000, 0.5, 9) == sample_observations(y, d, 1000, 0.5, 10));
  }
}

TEST_CASE("chi-square goodness of fit") {
  check_goodness_of_fit(SamplingDistribution::uniform(7, 5), 100000, 311);
  check_goodness_of_fit(SamplingDistribution::two_block(4, 9, 15, 16), 100000, 312);
  check_goodness_of_fit(SamplingDistribution::product(power_law_marginals(20, 12, 1.1)), 200000, 313);
}
