#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ntm/tensor.hpp"

namespace ntm {

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  std::uint32_t add(const std::string& token);  // returns existing id if known
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  // -1 if absent
  std::int64_t id_of(const std::string& token) const;
  const std::string& token(std::uint32_t id) const { return tokens_[id]; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Sparse bag-of-words document: (word id, count >= 1) pairs.
using Document = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

struct Corpus {
  Vocabulary vocab;
  std::vector<Document> docs;
  std::uint64_t total_tokens = 0;

  std::size_t v() const { return vocab.size(); }
  std::size_t d() const { return docs.size(); }
  std::uint64_t doc_tokens(std::size_t d) const;
  // Densifies docs[first..first+count) into a count matrix (count x V).
  Tensor2 dense_batch(const std::vector<std::size_t>& doc_ids) const;
  Tensor2 dense_all() const;
  void validate() const;  // throws on any invariant violation
};

struct IngestReport {
  std::size_t files_read = 0;
  std::size_t docs_kept = 0;
  std::size_t docs_dropped_empty = 0;
  std::size_t vocab_size = 0;
  std::uint64_t tokens_kept = 0;
};

struct IngestOptions {
  std::size_t min_doc_frequency = 1;
  std::size_t max_vocab = 2000;
  // Tokens shorter than this are dropped after lowercasing.
  std::size_t min_token_len = 2;
};

// Lowercased alphabetic tokenization of every regular file under `dir`
// (recursive, sorted paths), stopword removal, vocabulary truncated to the
// top max_vocab tokens by document frequency (ties lexicographic).
Corpus ingest_plaintext(const std::string& dir,
                        const std::unordered_set<std::string>& stopwords,
                        const IngestOptions& opts, IngestReport* report = nullptr);

std::unordered_set<std::string> load_stopwords(const std::string& path);

// UCI bag-of-words: header lines D, W, NNZ then "docId wordId count" triples,
// 1-indexed. Parse errors carry the offending line number.
Corpus ingest_uci_bow(const std::string& docword_path, const std::string& vocab_path);
void write_uci_bow(const Corpus& corpus, const std::string& docword_path,
                   const std::string& vocab_path);

// Deterministic disjoint partition sharing the identical vocabulary.
std::pair<Corpus, Corpus> split(const Corpus& corpus, double test_fraction,
                                std::uint64_t seed);

struct SyntheticSpec {
  std::uint32_t topics = 5;
  std::uint32_t vocab_size = 25;
  double alpha = 0.1;
  std::uint32_t doc_count = 500;
  std::uint32_t doc_length = 80;
  std::uint64_t seed = 0;
};

enum class TopicPattern {
  Bars,      // topic k uniform over the k-th block of V/K words
  Dirichlet  // each topic row drawn from a symmetric Dirichlet(0.1)
};

struct SyntheticData {
  Corpus corpus;
  Tensor2 beta_true;   // K x V, rows sum to 1
  Tensor2 theta_true;  // D x K, rows sum to 1
};

SyntheticData generate_synthetic(const SyntheticSpec& spec,
                                 TopicPattern pattern = TopicPattern::Bars);

}  // namespace ntm
