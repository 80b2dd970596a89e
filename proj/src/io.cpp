#include "wtn/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace wtn {

namespace {

using json = nlohmann::ordered_json;

void write_le(std::ofstream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  out.write(buf, 8);
}

void save_factor(const std::filesystem::path& path, const FactorMatrix<double>& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  for (Index l = 0; l < f.rows(); ++l)
    for (Index c = 0; c < f.cols(); ++c) write_le(out, f(l, c));
  if (!out) throw InvalidInput("write failed: " + path.string());
}

FactorMatrix<double> load_factor(const std::filesystem::path& path, Index k, Index cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  const auto expected = static_cast<std::uintmax_t>(k * cols) * 8u;
  if (std::filesystem::file_size(path) != expected) {
    throw InvalidInput(path.string() + ": expected " + std::to_string(expected) + " bytes");
  }
  FactorMatrix<double> f(k, cols);
  char buf[8];
  for (Index l = 0; l < k; ++l) {
    for (Index c = 0; c < cols; ++c) {
      in.read(buf, 8);
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= std::uint64_t{static_cast<unsigned char>(buf[b])} << (8 * b);
      f(l, c) = std::bit_cast<double>(bits);
    }
  }
  if (!in) throw InvalidInput("read failed: " + path.string());
  return f;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const FactorModel& model) {
  std::filesystem::create_directories(dir);
  json meta;
  meta["format_version"] = kCheckpointFormat;
  meta["n"] = model.rows();
  meta["m"] = model.cols();
  meta["k"] = model.k();
  meta["alpha"] = model.alpha;
  meta["lambda"] = model.lambda;
  meta["seed"] = model.seed;
  meta["global_mean"] = model.global_mean;
  meta["epochs"] = model.epochs;
  meta["learning_rate"] = model.learning_rate;
  meta["lr_decay"] = model.lr_decay;
  write_text(dir / "meta.json", meta.dump(2) + "\n");
  save_factor(dir / "U.bin", model.factors.U);
  save_factor(dir / "V.bin", model.factors.V);
}

FactorModel load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw InvalidInput("cannot open " + (dir / "meta.json").string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput("meta.json: " + std::string(e.what()));
  }
  try {
    const int version = meta.at("format_version").get<int>();
    if (version != kCheckpointFormat) throw InvalidInput("unsupported checkpoint format " + std::to_string(version));
    FactorModel model;
    const auto n = meta.at("n").get<Index>();
    const auto m = meta.at("m").get<Index>();
    const auto k = meta.at("k").get<Index>();
    if (n < 1 || m < 1 || k < 1) throw InvalidInput("meta.json: n, m, k must be positive");
    model.alpha = meta.at("alpha").get<double>();
    model.lambda = meta.at("lambda").get<double>();
    model.seed = meta.at("seed").get<std::uint64_t>();
    model.global_mean = meta.at("global_mean").get<double>();
    model.epochs = meta.at("epochs").get<int>();
    model.learning_rate = meta.value("learning_rate", 0.0);
    model.lr_decay = meta.value("lr_decay", 1.0);
    model.factors.U = load_factor(dir / "U.bin", k, n);
    model.factors.V = load_factor(dir / "V.bin", k, m);
    return model;
  } catch (const json::exception& e) {
    throw InvalidInput("meta.json: " + std::string(e.what()));
  }
}

MatrixXr load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest = strip(line);
    if (rest.empty()) continue;
    std::vector<double> row;
    for (;;) {
      const std::size_t pos = rest.find(',');
      const std::string_view field = strip(rest.substr(0, pos));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("'" + std::string(field) + "' is not a number", line_no);
      }
      row.push_back(v);
      if (pos == std::string_view::npos) break;
      rest = rest.substr(pos + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError("ragged row", line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput(path.string() + ": empty matrix");
  MatrixXr m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void save_matrix_csv(const std::filesystem::path& path, const MatrixXr& m) {
  std::ostringstream out;
  out.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
  write_text(path, out.str());
}

std::map<std::string, std::string> load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view s = strip(line);
    if (s.empty() || s.front() == '#') continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    const std::string key(strip(s.substr(0, eq)));
    if (key.empty()) throw ParseError("empty key", line_no);
    out[key] = std::string(strip(s.substr(eq + 1)));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidInput("write failed: " + path.string());
}

}  // namespace wtn
