#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wtn/norms.hpp"
#include "wtn/types.hpp"

namespace wtn {

/// Observed ratings with densified ids and per-row / per-column counts.
struct RatingsDataset {
  ObservationSet observations;
  std::vector<std::string> user_ids;  // dense index -> external id
  std::vector<std::string> item_ids;
  std::vector<std::int64_t> user_counts;
  std::vector<std::int64_t> item_counts;

  Index n_users() const { return observations.n; }
  Index m_items() const { return observations.m; }
  std::size_t size() const { return observations.size(); }
};

/// Wraps an ObservationSet, computing counts; external ids are the dense indices.
RatingsDataset make_dataset(ObservationSet s);

/// Reads `user_id,item_id,rating[,timestamp]` rows, comma or tab delimited, optional header.
///
/// Ids are densified in sorted order (numeric when every id is an integer, lexicographic
/// otherwise). Duplicate (user, item) pairs are kept as repeats.
RatingsDataset load_triplets(const std::filesystem::path& path);

/// Writes the dataset with its external ids and full-precision ratings.
void save_triplets(const std::filesystem::path& path, const RatingsDataset& ds);

/// Writes `external_id,dense_index` rows.
void save_id_map(const std::filesystem::path& path, const std::vector<std::string>& ids);

/// Reads a file written by save_id_map; returns dense index -> external id.
std::vector<std::string> load_id_map(const std::filesystem::path& path);

/// p(i) = n_i / |S|, q(j) = m_j / |S|.
Marginals empirical_marginals(const RatingsDataset& ds);

struct Split {
  RatingsDataset train;
  RatingsDataset validation;
  RatingsDataset test;
};

/// Uniform random partition of triplet positions. All three parts keep the full (n, m) and id maps.
Split split(const RatingsDataset& ds, std::size_t valid_count, std::size_t test_count, std::uint64_t seed);

}  // namespace wtn
