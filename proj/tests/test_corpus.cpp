#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "ntm/corpus.hpp"
#include "ntm/error.hpp"
#include "ntm/rng.hpp"

using namespace ntm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ntm_test_" + std::to_string(Rng(std::random_device{}()).next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

std::uint32_t count_of(const Corpus& c, std::size_t d, const std::string& token) {
  const auto id = c.vocab.id_of(token);
  REQUIRE(id >= 0);
  for (const auto& [w, n] : c.docs[d]) {
    if (w == static_cast<std::uint32_t>(id)) return n;
  }
  return 0;
}

}  // namespace

TEST_SUITE_BEGIN("corpus");

TEST_CASE("vocabulary is a bijection") {
  Vocabulary v;
  for (const char* t : {"alpha", "beta", "gamma"}) v.add(t);
  CHECK(v.size() == 3);
  for (std::uint32_t i = 0; i < 3; ++i) {
    CHECK(v.id_of(v.token(i)) == i);
  }
  CHECK(v.id_of("missing") == -1);
  CHECK(v.add("beta") == 1);  // re-adding returns the existing id
  CHECK(v.size() == 3);
  CHECK_THROWS_AS(Vocabulary({"dup", "dup"}), Error);
}

TEST_CASE("plaintext ingestion on the two-document fixture") {
  TempDir dir;
  write_file(dir.path / "a.txt", "The cat sat");
  write_file(dir.path / "b.txt", "the dog sat\n");
  IngestOptions opts;
  opts.max_vocab = 10;
  IngestReport report;
  const Corpus c = ingest_plaintext(dir.path.string(), {"the"}, opts, &report);

  std::set<std::string> vocab(c.vocab.tokens().begin(), c.vocab.tokens().end());
  CHECK(vocab == std::set<std::string>{"cat", "dog", "sat"});
  REQUIRE(c.d() == 2);
  CHECK(count_of(c, 0, "cat") == 1);
  CHECK(count_of(c, 0, "sat") == 1);
  CHECK(count_of(c, 0, "dog") == 0);
  CHECK(count_of(c, 1, "dog") == 1);
  CHECK(count_of(c, 1, "sat") == 1);
  CHECK(c.total_tokens == 4);
  CHECK(report.docs_dropped_empty == 0);
}

TEST_CASE("documents reduced to nothing are dropped and counted") {
  TempDir dir;
  write_file(dir.path / "a.txt", "keep these words");
  write_file(dir.path / "b.txt", "the the the");  // only stopwords
  IngestOptions opts;
  IngestReport report;
  const Corpus c = ingest_plaintext(dir.path.string(), {"the"}, opts, &report);
  CHECK(c.d() == 1);
  CHECK(report.docs_dropped_empty == 1);
  CHECK(report.docs_kept == 1);
}

TEST_CASE("vocabulary truncation ranks by document frequency, ties lexicographic") {
  TempDir dir;
  // df: common=3, aaa=2, bbb=2, zzz=1
  write_file(dir.path / "d0.txt", "common aaa bbb");
  write_file(dir.path / "d1.txt", "common aaa bbb");
  write_file(dir.path / "d2.txt", "common zzz");
  IngestOptions opts;
  opts.max_vocab = 3;
  const Corpus c = ingest_plaintext(dir.path.string(), {}, opts);
  CHECK(c.vocab.tokens() == std::vector<std::string>{"common", "aaa", "bbb"});
}

TEST_CASE("ingestion errors") {
  TempDir dir;
  write_file(dir.path / "a.txt", "the the");
  CHECK_THROWS_AS(ingest_plaintext((dir.path / "missing").string(), {}, IngestOptions{}),
                  Error);
  // Every token is a stopword: vocabulary comes out empty.
  CHECK_THROWS_AS(ingest_plaintext(dir.path.string(), {"the"}, IngestOptions{}), Error);
  IngestOptions bad;
  bad.max_vocab = 1;
  CHECK_THROWS_AS(ingest_plaintext(dir.path.string(), {}, bad), Error);
}

TEST_CASE("UCI bag-of-words parsing on the documented example") {
  TempDir dir;
  write_file(dir.path / "vocab.txt", "apple\nbanana\ncherry\n");
  write_file(dir.path / "docword.txt", "2\n3\n3\n1 1 2\n1 3 1\n2 2 5\n");
  const Corpus c = ingest_uci_bow((dir.path / "docword.txt").string(),
                                  (dir.path / "vocab.txt").string());
  REQUIRE(c.d() == 2);
  CHECK(count_of(c, 0, "apple") == 2);
  CHECK(count_of(c, 0, "cherry") == 1);
  CHECK(count_of(c, 1, "banana") == 5);
  CHECK(c.total_tokens == 8);
}

TEST_CASE("UCI parse errors carry line numbers") {
  TempDir dir;
  write_file(dir.path / "vocab.txt", "a\nb\nc\n");

  write_file(dir.path / "bad_word.txt", "1\n3\n1\n1 4 1\n");
  CHECK_THROWS_WITH_AS(ingest_uci_bow((dir.path / "bad_word.txt").string(),
                                      (dir.path / "vocab.txt").string()),
                       doctest::Contains(":4"), Error);

  write_file(dir.path / "bad_count.txt", "1\n3\n1\n1 1 0\n");
  CHECK_THROWS_WITH_AS(ingest_uci_bow((dir.path / "bad_count.txt").string(),
                                      (dir.path / "vocab.txt").string()),
                       doctest::Contains("count"), Error);

  write_file(dir.path / "bad_nnz.txt", "1\n3\n5\n1 1 1\n");
  CHECK_THROWS_WITH_AS(ingest_uci_bow((dir.path / "bad_nnz.txt").string(),
                                      (dir.path / "vocab.txt").string()),
                       doctest::Contains("NNZ"), Error);

  write_file(dir.path / "short_vocab.txt", "a\n");
  write_file(dir.path / "ok.txt", "1\n3\n1\n1 1 1\n");
  CHECK_THROWS_AS(ingest_uci_bow((dir.path / "ok.txt").string(),
                                 (dir.path / "short_vocab.txt").string()),
                  Error);
}

TEST_CASE("UCI round trip preserves counts exactly") {
  TempDir dir;
  const SyntheticData data = generate_synthetic({5, 25, 0.1, 40, 30, 9});
  write_uci_bow(data.corpus, (dir.path / "docword.txt").string(),
                (dir.path / "vocab.txt").string());
  const Corpus back = ingest_uci_bow((dir.path / "docword.txt").string(),
                                     (dir.path / "vocab.txt").string());
  REQUIRE(back.d() == data.corpus.d());
  CHECK(back.total_tokens == data.corpus.total_tokens);
  for (std::size_t d = 0; d < back.d(); ++d) CHECK(back.docs[d] == data.corpus.docs[d]);
  CHECK(back.vocab.tokens() == data.corpus.vocab.tokens());
}

TEST_CASE("split partitions deterministically") {
  const SyntheticData data = generate_synthetic({5, 25, 0.1, 10, 20, 1});
  auto [train, test] = split(data.corpus, 0.2, 7);
  CHECK(train.d() == 8);
  CHECK(test.d() == 2);
  CHECK(train.total_tokens + test.total_tokens == data.corpus.total_tokens);
  CHECK(train.vocab.tokens() == test.vocab.tokens());

  auto [train2, test2] = split(data.corpus, 0.2, 7);
  for (std::size_t d = 0; d < train.d(); ++d) CHECK(train.docs[d] == train2.docs[d]);
  for (std::size_t d = 0; d < test.d(); ++d) CHECK(test.docs[d] == test2.docs[d]);

  // Union of the parts is the original multiset of documents.
  std::multiset<Document> all;
  for (const auto& doc : data.corpus.docs) all.insert(doc);
  std::multiset<Document> parts;
  for (const auto& doc : train.docs) parts.insert(doc);
  for (const auto& doc : test.docs) parts.insert(doc);
  CHECK(all == parts);

  CHECK_THROWS_AS(split(data.corpus, 0.999, 0), Error);
  CHECK_THROWS_AS(split(data.corpus, 0.0, 0), Error);
  CHECK_THROWS_AS(split(data.corpus, 1.0, 0), Error);
}

TEST_CASE("bars topics are disjoint uniform blocks") {
  const SyntheticData data = generate_synthetic({5, 25, 0.1, 5, 10, 0});
  for (std::size_t t = 0; t < 5; ++t) {
    double total = 0.0;
    for (std::size_t w = 0; w < 25; ++w) {
      const double x = data.beta_true(t, w);
      const bool in_bar = w >= t * 5 && w < (t + 1) * 5;
      CHECK(x == (in_bar ? 0.2 : 0.0));
      total += x;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("generator is bit-reproducible for a fixed seed") {
  const SyntheticSpec spec{4, 16, 0.3, 30, 25, 77};
  const SyntheticData a = generate_synthetic(spec);
  const SyntheticData b = generate_synthetic(spec);
  REQUIRE(a.corpus.d() == b.corpus.d());
  for (std::size_t d = 0; d < a.corpus.d(); ++d) CHECK(a.corpus.docs[d] == b.corpus.docs[d]);
  for (std::size_t i = 0; i < a.theta_true.size(); ++i) {
    CHECK(a.theta_true.data()[i] == b.theta_true.data()[i]);
  }
}

TEST_CASE("single-topic documents follow the topic distribution") {
  // K forced to 2 with alpha tiny: nearly every document is single-topic.
  const SyntheticData data = generate_synthetic({2, 10, 1e-6, 200, 400, 3});
  for (std::size_t d = 0; d < 20; ++d) {
    const std::size_t z =
        data.theta_true(d, 0) > data.theta_true(d, 1) ? 0 : 1;
    // Empirical document distribution approaches beta_z for long documents.
    std::vector<double> emp(10, 0.0);
    for (const auto& [w, c] : data.corpus.docs[d]) emp[w] += c;
    for (auto& x : emp) x /= static_cast<double>(data.corpus.doc_tokens(d));
    for (std::size_t w = 0; w < 10; ++w) {
      CHECK(std::abs(emp[w] - data.beta_true(z, w)) < 0.12);
    }
  }
}

TEST_CASE("tiny alpha makes sampled topic proportions spike") {
  const SyntheticData data = generate_synthetic({5, 25, 0.02, 10000, 1, 5});
  double mean_max = 0.0;
  for (std::size_t d = 0; d < data.theta_true.rows(); ++d) {
    mean_max += *std::max_element(data.theta_true.row(d),
                                  data.theta_true.row(d) + data.theta_true.cols());
  }
  mean_max /= static_cast<double>(data.theta_true.rows());
  CHECK(mean_max > 0.9);
}

TEST_CASE("synthetic spec validation") {
  CHECK_THROWS_AS(generate_synthetic({1, 25, 0.1, 10, 10, 0}), Error);
  CHECK_THROWS_AS(generate_synthetic({5, 3, 0.1, 10, 10, 0}), Error);
  CHECK_THROWS_AS(generate_synthetic({5, 25, 0.0, 10, 10, 0}), Error);
  CHECK_THROWS_AS(generate_synthetic({5, 25, 0.1, 10, 0, 0}), Error);
}

TEST_SUITE_END();
