#include <doctest.h>

#include <fstream>
#include <set>

#include "support.hpp"
#include "wtn/data.hpp"
#include "wtn/synth.hpp"

using namespace wtn;
using wtn::test::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("load_triplets basics") {
  TempDir dir("data");
  write(dir / "empty.csv", "");
  CHECK_THROWS_AS(load_triplets(dir / "empty.csv"), InvalidInput);
  CHECK_THROWS_AS(load_triplets(dir / "missing.csv"), InvalidInput);

  write(dir / "three.csv", "7,1,5\n7,2,3\n9,1,4\n");
  const RatingsDataset ds = load_triplets(dir / "three.csv");
  CHECK(ds.n_users() == 2);
  CHECK(ds.m_items() == 2);
  CHECK(ds.user_counts == std::vector<std::int64_t>{2, 1});
  CHECK(ds.user_ids == std::vector<std::string>{"7", "9"});
  CHECK(ds.observations.triplets[2] == Triplet{1, 0, 4.0});
}

TEST_CASE("load_triplets formats") {
  TempDir dir("fmt");
  write(dir / "tab.tsv", "user\titem\trating\tts\nu1\ti9\t3.5\t1000\nu2\ti9\t1\t1001\nu1\ti3\t2\t1002\n");
  const RatingsDataset t = load_triplets(dir / "tab.tsv");
  CHECK(t.size() == 3);
  CHECK(t.item_ids == std::vector<std::string>{"i3", "i9"});
  CHECK(t.observations.triplets[0] == Triplet{0, 1, 3.5});

  // Numeric ids are ordered numerically, not lexicographically.
  write(dir / "num.csv", "user_id,item_id,rating\n10,1,1\n9,1,2\n100,2,3\n");
  const RatingsDataset n = load_triplets(dir / "num.csv");
  CHECK(n.user_ids == std::vector<std::string>{"9", "10", "100"});

  // Duplicates are repeats.
  write(dir / "dup.csv", "1,1,5\n1,1,4\r\n");
  const RatingsDataset d = load_triplets(dir / "dup.csv");
  CHECK(d.size() == 2);
  CHECK(d.user_counts[0] == 2);
}

TEST_CASE("malformed lines report their line number") {
  TempDir dir("bad");
  write(dir / "bad.csv", "u,i,r\n1,2,3\n1,2\n");
  try {
    load_triplets(dir / "bad.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  write(dir / "bad2.csv", "1,2,3\n1,2,x\n");
  try {
    load_triplets(dir / "bad2.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("save / load round trip") {
  TempDir dir("rt");
  const Factors y = gen_orthogonal_factors(400, 300, 3, 401);
  const auto dist = SamplingDistribution::product(power_law_marginals(400, 300, 0.8));
  const ObservationSet s = sample_observations(y, dist, 100000, 0.7, 402);
  // Generated ids 0..n-1 may be missing from the sample, so compare on the re-densified set.
  const RatingsDataset first = load_triplets([&] {
    save_triplets(dir / "a.csv", make_dataset(s));
    return dir / "a.csv";
  }());
  save_triplets(dir / "b.csv", first);
  const RatingsDataset second = load_triplets(dir / "b.csv");
  CHECK(second.observations == first.observations);
  CHECK(second.user_ids == first.user_ids);
  CHECK(second.item_ids == first.item_ids);

  // Values survive bit for bit.
  for (std::size_t t = 0; t < s.size(); t += 997) {
    CHECK(first.observations.triplets[t].value == s.triplets[t].value);
  }

  // With every row and column present, the first load is already the identity.
  ObservationSet full(3, 2);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 2; ++j) full.push_back(i, j, 0.1 * static_cast<double>(i) - 1.0 / 3.0 * static_cast<double>(j));
  save_triplets(dir / "c.csv", make_dataset(full));
  CHECK(load_triplets(dir / "c.csv").observations == full);
}

TEST_CASE("id maps") {
  TempDir dir("ids");
  const std::vector<std::string> ids{"alice", "bob", "carol"};
  save_id_map(dir / "users.csv", ids);
  CHECK(load_id_map(dir / "users.csv") == ids);
  std::ifstream in(dir / "users.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "external_id,dense_index");
}

TEST_CASE("empirical marginals") {
  ObservationSet one(1, 1);
  one.push_back(0, 0, 3.0);
  const Marginals m1 = empirical_marginals(make_dataset(one));
  CHECK(m1.p(0) == 1.0);
  CHECK(m1.q(0) == 1.0);

  ObservationSet s(2, 1);
  s.push_back(0, 0, 1.0);
  s.push_back(0, 0, 1.0);
  s.push_back(1, 0, 1.0);
  const Marginals m2 = empirical_marginals(make_dataset(s));
  CHECK(m2.p(0) == doctest::Approx(2.0 / 3.0));
  CHECK(m2.p(1) == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(m2.p.sum() - 1.0) <= 1e-12);

  const Index n = 100;
  const ObservationSet u = sample_observations(MatrixXr::Zero(n, 10), SamplingDistribution::uniform(n, 10), 1000000, 0.0, 403);
  const Marginals mu = empirical_marginals(make_dataset(u));
  CHECK((mu.p.array() - 0.01).abs().maxCoeff() <= 5.0 * std::sqrt(0.01 * 0.99 / 1e6));
  CHECK(std::abs(mu.p.sum() - 1.0) <= 1e-12);
  CHECK(std::abs(mu.q.sum() - 1.0) <= 1e-12);
}

TEST_CASE("split") {
  const ObservationSet s = sample_observations(MatrixXr::Zero(50, 40), SamplingDistribution::uniform(50, 40), 5000, 1.0, 404);
  const RatingsDataset ds = make_dataset(s);

  const Split none = split(ds, 0, 0, 1);
  CHECK(none.train.observations == s);
  CHECK(none.validation.size() == 0);

  const Split a = split(ds, 700, 300, 5);
  CHECK(a.train.size() + a.validation.size() + a.test.size() == s.size());
  CHECK(a.validation.size() == 700);
  CHECK(a.test.size() == 300);
  CHECK(a.train.n_users() == 50);
  CHECK(a.test.m_items() == 40);

  // Disjoint as positions: the noisy values are distinct, so the multisets partition them.
  std::multiset<double> all, parts;
  for (const Triplet& t : s.triplets) all.insert(t.value);
  for (const auto* part : {&a.train, &a.validation, &a.test})
    for (const Triplet& t : part->observations.triplets) parts.insert(t.value);
  CHECK(all == parts);

  const Split b = split(ds, 700, 300, 5);
  CHECK(b.validation.observations == a.validation.observations);
  CHECK(b.test.observations == a.test.observations);
  CHECK_FALSE(split(ds, 700, 300, 6).test.observations == a.test.observations);

  CHECK_THROWS_AS(split(ds, 4000, 1000, 1), InvalidInput);
}
