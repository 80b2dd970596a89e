#pragma once

#include <unistd.h>

#include <cstdint>

#include "wtn/norms.hpp"
#include "wtn/random.hpp"
#include "wtn/types.hpp"

namespace wtn::test {

inline MatrixXr gaussian(Index n, Index m, Rng& rng) {
  MatrixXr x(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j) x(i, j) = rng.normal();
  return x;
}

inline Factors gaussian_factors(Index k, Index n, Index m, Rng& rng) {
  Factors f = Factors::zeros(k, n, m);
  for (Index c = 0; c < n; ++c)
    for (Index l = 0; l < k; ++l) f.U(l, c) = rng.normal();
  for (Index c = 0; c < m; ++c)
    for (Index l = 0; l < k; ++l) f.V(l, c) = rng.normal();
  return f;
}

/// Random probability vectors; `zeros` entries are forced to zero mass.
inline Marginals random_marginals(Index n, Index m, Rng& rng, Index zeros = 0) {
  VectorXr p(n), q(m);
  for (Index i = 0; i < n; ++i) p(i) = i < zeros ? 0.0 : rng.uniform() + 0.05;
  for (Index j = 0; j < m; ++j) q(j) = j < zeros ? 0.0 : rng.uniform() + 0.05;
  return {p / p.sum(), q / q.sum()};
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace wtn::test

#include <filesystem>
#include <string>

namespace wtn::test {

/// Fresh empty directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("wtn_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

}  // namespace wtn::test
