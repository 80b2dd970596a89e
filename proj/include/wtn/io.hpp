#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "wtn/train.hpp"
#include "wtn/types.hpp"

namespace wtn {

inline constexpr int kCheckpointFormat = 1;

/// Writes meta.json plus U.bin (k x n) and V.bin (k x m), little-endian float64, row-major.
void save_checkpoint(const std::filesystem::path& dir, const FactorModel& model);
FactorModel load_checkpoint(const std::filesystem::path& dir);

/// Comma-separated rows of numbers, no header.
MatrixXr load_matrix_csv(const std::filesystem::path& path);
void save_matrix_csv(const std::filesystem::path& path, const MatrixXr& m);

/// Flat `key = value` lines; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> load_config(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace wtn
