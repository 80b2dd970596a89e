#include "wtn/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <optional>
#include <string_view>
#include <unordered_map>

#include "wtn/random.hpp"

namespace wtn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(std::string_view s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Dense index assignment in sorted id order.
std::unordered_map<std::string, Index> densify(std::vector<std::string>& ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const bool numeric = std::all_of(ids.begin(), ids.end(), [](const std::string& s) { return parse_integer(s).has_value(); });
  if (numeric) {
    std::sort(ids.begin(), ids.end(), [](const std::string& a, const std::string& b) {
      return *parse_integer(a) < *parse_integer(b);
    });
  }
  std::unordered_map<std::string, Index> index;
  index.reserve(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) index.emplace(ids[k], static_cast<Index>(k));
  return index;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

RatingsDataset with_ids(ObservationSet s, const RatingsDataset& like) {
  RatingsDataset ds = make_dataset(std::move(s));
  ds.user_ids = like.user_ids;
  ds.item_ids = like.item_ids;
  return ds;
}

}  // namespace

RatingsDataset make_dataset(ObservationSet s) {
  RatingsDataset ds;
  const Counts c = count_observations(s);
  ds.user_counts = c.rows;
  ds.item_counts = c.cols;
  ds.user_ids.resize(static_cast<std::size_t>(s.n));
  ds.item_ids.resize(static_cast<std::size_t>(s.m));
  for (Index i = 0; i < s.n; ++i) ds.user_ids[static_cast<std::size_t>(i)] = std::to_string(i);
  for (Index j = 0; j < s.m; ++j) ds.item_ids[static_cast<std::size_t>(j)] = std::to_string(j);
  ds.observations = std::move(s);
  return ds;
}

RatingsDataset load_triplets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());

  struct Raw {
    std::string user, item;
    double rating;
  };
  std::vector<Raw> raw;
  std::string line;
  std::size_t line_no = 0;
  char delim = ',';
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.size() >= 3 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
    if (trim(view).empty()) continue;
    if (first) {
      delim = view.find('\t') != std::string_view::npos ? '\t' : ',';
    }
    const auto fields = split_fields(view, delim);
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError("expected user_id,item_id,rating[,timestamp] but found " + std::to_string(fields.size()) +
                           " fields",
                       line_no);
    }
    const auto rating = parse_double(fields[2]);
    if (!rating) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw ParseError("rating '" + std::string(fields[2]) + "' is not a number", line_no);
    }
    if (fields[0].empty() || fields[1].empty()) throw ParseError("empty id", line_no);
    first = false;
    raw.push_back({std::string(fields[0]), std::string(fields[1]), *rating});
  }
  if (raw.empty()) throw InvalidInput(path.string() + ": no observations");

  RatingsDataset ds;
  for (const Raw& r : raw) {
    ds.user_ids.push_back(r.user);
    ds.item_ids.push_back(r.item);
  }
  const auto users = densify(ds.user_ids);
  const auto items = densify(ds.item_ids);
  ObservationSet s(static_cast<Index>(ds.user_ids.size()), static_cast<Index>(ds.item_ids.size()));
  s.triplets.reserve(raw.size());
  for (const Raw& r : raw) s.push_back(users.at(r.user), items.at(r.item), r.rating);

  const Counts c = count_observations(s);
  ds.user_counts = c.rows;
  ds.item_counts = c.cols;
  ds.observations = std::move(s);
  return ds;
}

void save_triplets(const std::filesystem::path& path, const RatingsDataset& ds) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "user_id,item_id,rating\n";
  for (const Triplet& t : ds.observations.triplets) {
    out << ds.user_ids[static_cast<std::size_t>(t.row)] << ',' << ds.item_ids[static_cast<std::size_t>(t.col)] << ','
        << format_double(t.value) << '\n';
  }
}

void save_id_map(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "external_id,dense_index\n";
  for (std::size_t k = 0; k < ids.size(); ++k) out << ids[k] << ',' << k << '\n';
}

std::vector<std::string> load_id_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, ',');
    if (fields.size() != 2) throw ParseError("expected external_id,dense_index", line_no);
    const auto idx = parse_integer(fields[1]);
    if (!idx) {
      if (line_no == 1) continue;  // header
      throw ParseError("dense index '" + std::string(fields[1]) + "' is not an integer", line_no);
    }
    if (*idx != static_cast<long long>(ids.size())) throw ParseError("dense indices must be 0, 1, 2, ... in order", line_no);
    ids.emplace_back(fields[0]);
  }
  return ids;
}

Marginals empirical_marginals(const RatingsDataset& ds) {
  const double total = static_cast<double>(ds.size());
  if (total < 1.0) throw InvalidInput("empirical_marginals: empty dataset");
  VectorXr p(ds.n_users()), q(ds.m_items());
  for (Index i = 0; i < p.size(); ++i) p(i) = static_cast<double>(ds.user_counts[static_cast<std::size_t>(i)]) / total;
  for (Index j = 0; j < q.size(); ++j) q(j) = static_cast<double>(ds.item_counts[static_cast<std::size_t>(j)]) / total;
  return {std::move(p), std::move(q)};
}

Split split(const RatingsDataset& ds, std::size_t valid_count, std::size_t test_count, std::uint64_t seed) {
  const std::size_t total = ds.size();
  if (valid_count + test_count >= total && (valid_count + test_count) > 0) {
    throw InvalidInput("split: validation + test sizes must be smaller than the dataset");
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  const ObservationSet& src = ds.observations;
  ObservationSet valid(src.n, src.m), test(src.n, src.m), train(src.n, src.m);
  valid.triplets.reserve(valid_count);
  test.triplets.reserve(test_count);
  train.triplets.reserve(total - valid_count - test_count);
  for (std::size_t k = 0; k < valid_count; ++k) valid.triplets.push_back(src.triplets[order[k]]);
  for (std::size_t k = valid_count; k < valid_count + test_count; ++k) test.triplets.push_back(src.triplets[order[k]]);
  // Training part keeps the original file order, so valid = test = 0 is the identity.
  std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(valid_count + test_count), order.end());
  std::sort(rest.begin(), rest.end());
  for (std::size_t pos : rest) train.triplets.push_back(src.triplets[pos]);

  return {with_ids(std::move(train), ds), with_ids(std::move(valid), ds), with_ids(std::move(test), ds)};
}

}  // namespace wtn
