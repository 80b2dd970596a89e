#include <cmath>

#include "wtn/norms.hpp"
#include "wtn/types.hpp"

namespace wtn {

Counts count_observations(const ObservationSet& s) {
  check_in_range(s);
  Counts c;
  c.rows.assign(static_cast<std::size_t>(s.n), 0);
  c.cols.assign(static_cast<std::size_t>(s.m), 0);
  for (const Triplet& t : s.triplets) {
    ++c.rows[static_cast<std::size_t>(t.row)];
    ++c.cols[static_cast<std::size_t>(t.col)];
  }
  return c;
}

void check_in_range(const ObservationSet& s) {
  for (const Triplet& t : s.triplets) {
    if (t.row < 0 || t.row >= s.n || t.col < 0 || t.col >= s.m) {
      throw InvalidInput("observation (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                         ") outside a " + std::to_string(s.n) + "x" + std::to_string(s.m) + " matrix");
    }
  }
}

void Marginals::validate(double tolerance) const {
  if ((p.array() < 0.0).any() || (q.array() < 0.0).any()) throw InvalidInput("negative marginal");
  if (std::abs(p.sum() - 1.0) > tolerance) throw InvalidInput("row marginals do not sum to 1");
  if (std::abs(q.sum() - 1.0) > tolerance) throw InvalidInput("column marginals do not sum to 1");
}

}  // namespace wtn
