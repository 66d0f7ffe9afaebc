#include "ntm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "ntm/error.hpp"
#include "ntm/rng.hpp"

namespace fs = std::filesystem;

namespace ntm {

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  for (auto& t : tokens) add(t);
  if (tokens_.size() != tokens.size()) throw Error("Vocabulary: duplicate tokens");
}

std::uint32_t Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

std::int64_t Vocabulary::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::uint64_t Corpus::doc_tokens(std::size_t d) const {
  std::uint64_t n = 0;
  for (const auto& [w, c] : docs[d]) n += c;
  return n;
}

Tensor2 Corpus::dense_batch(const std::vector<std::size_t>& doc_ids) const {
  Tensor2 x(doc_ids.size(), v());
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    for (const auto& [w, c] : docs[doc_ids[i]]) x(i, w) = static_cast<double>(c);
  }
  return x;
}

Tensor2 Corpus::dense_all() const {
  std::vector<std::size_t> ids(d());
  std::iota(ids.begin(), ids.end(), 0);
  return dense_batch(ids);
}

void Corpus::validate() const {
  std::uint64_t total = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (docs[d].empty()) throw Error("corpus: empty document stored at " + std::to_string(d));
    for (const auto& [w, c] : docs[d]) {
      if (w >= v()) throw Error("corpus: word id out of range in doc " + std::to_string(d));
      if (c < 1) throw Error("corpus: zero count in doc " + std::to_string(d));
      total += c;
    }
  }
  if (total != total_tokens) throw Error("corpus: total_tokens inconsistent");
}

namespace {

std::vector<std::string> tokenize_lower_alpha(const std::string& text, std::size_t min_len) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isalpha(uc)) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!cur.empty()) {
      if (cur.size() >= min_len) out.push_back(cur);
      cur.clear();
    }
  }
  if (cur.size() >= min_len) out.push_back(cur);
  return out;
}

Document counts_to_document(const std::map<std::uint32_t, std::uint32_t>& counts) {
  Document doc;
  doc.reserve(counts.size());
  for (const auto& [w, c] : counts) doc.emplace_back(w, c);
  return doc;
}

}  // namespace

std::unordered_set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stopword list: " + path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

Corpus ingest_plaintext(const std::string& dir,
                        const std::unordered_set<std::string>& stopwords,
                        const IngestOptions& opts, IngestReport* report) {
  if (opts.max_vocab < 2) throw Error("ingest_plaintext: max_vocab must be >= 2");
  if (!fs::is_directory(dir)) throw Error("ingest_plaintext: not a directory: " + dir);

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("ingest_plaintext: no files under " + dir);

  std::vector<std::vector<std::string>> doc_tokens;
  doc_tokens.reserve(files.size());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw Error("ingest_plaintext: unreadable file: " + f.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto toks = tokenize_lower_alpha(ss.str(), opts.min_token_len);
    std::erase_if(toks, [&](const std::string& t) { return stopwords.count(t) != 0; });
    doc_tokens.push_back(std::move(toks));
  }

  // Document frequency over the candidate vocabulary.
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& toks : doc_tokens) {
    std::unordered_set<std::string> seen(toks.begin(), toks.end());
    for (const auto& t : seen) ++df[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  ranked.reserve(df.size());
  for (const auto& [t, n] : df) {
    if (n >= opts.min_doc_frequency) ranked.emplace_back(t, n);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;  // tie: lexicographically smaller first
  });
  if (ranked.size() > opts.max_vocab) ranked.resize(opts.max_vocab);
  if (ranked.empty()) throw Error("ingest_plaintext: resulting vocabulary is empty");

  Corpus corpus;
  {
    std::vector<std::string> tokens;
    tokens.reserve(ranked.size());
    for (const auto& [t, n] : ranked) tokens.push_back(t);
    corpus.vocab = Vocabulary(std::move(tokens));
  }

  IngestReport rep;
  rep.files_read = files.size();
  for (const auto& toks : doc_tokens) {
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto& t : toks) {
      const auto id = corpus.vocab.id_of(t);
      if (id >= 0) ++counts[static_cast<std::uint32_t>(id)];
    }
    if (counts.empty()) {
      ++rep.docs_dropped_empty;
      continue;
    }
    auto doc = counts_to_document(counts);
    for (const auto& [w, c] : doc) {
      corpus.total_tokens += c;
      rep.tokens_kept += c;
    }
    corpus.docs.push_back(std::move(doc));
    ++rep.docs_kept;
  }
  rep.vocab_size = corpus.v();
  if (report != nullptr) *report = rep;
  corpus.validate();
  return corpus;
}

Corpus ingest_uci_bow(const std::string& docword_path, const std::string& vocab_path) {
  std::ifstream vin(vocab_path);
  if (!vin) throw Error("cannot open vocab file: " + vocab_path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(vin, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }

  std::ifstream in(docword_path);
  if (!in) throw Error("cannot open docword file: " + docword_path);
  auto parse_error = [&](std::size_t lineno, const std::string& what) {
    return Error(docword_path + ":" + std::to_string(lineno) + ": " + what);
  };

  std::size_t lineno = 0;
  std::uint64_t d = 0, w = 0, nnz = 0;
  auto read_header = [&](std::uint64_t& out) {
    ++lineno;
    if (!std::getline(in, line)) throw parse_error(lineno, "missing header line");
    std::istringstream ss(line);
    if (!(ss >> out)) throw parse_error(lineno, "bad header value");
  };
  read_header(d);
  read_header(w);
  read_header(nnz);
  if (w != tokens.size()) {
    throw Error("vocab file has " + std::to_string(tokens.size()) + " tokens but header W=" +
                std::to_string(w));
  }

  Corpus corpus;
  corpus.vocab = Vocabulary(std::move(tokens));
  std::vector<std::map<std::uint32_t, std::uint32_t>> counts(d);
  std::uint64_t seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    std::int64_t doc_id, word_id, count;
    if (!(ss >> doc_id >> word_id >> count)) throw parse_error(lineno, "expected 'docId wordId count'");
    if (doc_id < 1 || static_cast<std::uint64_t>(doc_id) > d) {
      throw parse_error(lineno, "docId out of range");
    }
    if (word_id < 1 || static_cast<std::uint64_t>(word_id) > w) {
      throw parse_error(lineno, "wordId out of range");
    }
    if (count < 1) throw parse_error(lineno, "count must be >= 1");
    ++seen;
    counts[doc_id - 1][static_cast<std::uint32_t>(word_id - 1)] +=
        static_cast<std::uint32_t>(count);
  }
  if (seen != nnz) {
    throw Error(docword_path + ": NNZ mismatch, header says " + std::to_string(nnz) +
                " but found " + std::to_string(seen));
  }
  for (auto& c : counts) {
    if (c.empty()) continue;  // empty documents are not stored
    auto doc = counts_to_document(c);
    for (const auto& [wid, cnt] : doc) corpus.total_tokens += cnt;
    corpus.docs.push_back(std::move(doc));
  }
  corpus.validate();
  return corpus;
}

void write_uci_bow(const Corpus& corpus, const std::string& docword_path,
                   const std::string& vocab_path) {
  std::ofstream vout(vocab_path);
  if (!vout) throw Error("cannot write vocab file: " + vocab_path);
  for (const auto& t : corpus.vocab.tokens()) vout << t << "\n";

  std::ofstream out(docword_path);
  if (!out) throw Error("cannot write docword file: " + docword_path);
  std::uint64_t nnz = 0;
  for (const auto& doc : corpus.docs) nnz += doc.size();
  out << corpus.d() << "\n" << corpus.v() << "\n" << nnz << "\n";
  for (std::size_t d = 0; d < corpus.d(); ++d) {
    for (const auto& [w, c] : corpus.docs[d]) {
      out << (d + 1) << " " << (w + 1) << " " << c << "\n";
    }
  }
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, double test_fraction,
                                std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error("split: test fraction must be in (0, 1)");
  }
  std::vector<std::size_t> ids(corpus.d());
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(derive_seed(seed, "corpus.split"));
  rng.shuffle(ids);
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(corpus.d())));
  if (n_test == 0 || n_test >= corpus.d()) {
    throw Error("split: fraction leaves an empty side");
  }
  std::vector<bool> is_test(corpus.d(), false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[ids[i]] = true;

  Corpus train, test;
  train.vocab = corpus.vocab;
  test.vocab = corpus.vocab;
  for (std::size_t d = 0; d < corpus.d(); ++d) {
    Corpus& dst = is_test[d] ? test : train;
    dst.docs.push_back(corpus.docs[d]);
    dst.total_tokens += corpus.doc_tokens(d);
  }
  return {std::move(train), std::move(test)};
}

SyntheticData generate_synthetic(const SyntheticSpec& spec, TopicPattern pattern) {
  if (spec.topics < 2) throw Error("synthetic: K must be >= 2");
  if (spec.vocab_size < spec.topics) throw Error("synthetic: V must be >= K");
  if (!(spec.alpha > 0.0)) throw Error("synthetic: alpha must be > 0");
  if (spec.doc_length < 1) throw Error("synthetic: doc_length must be >= 1");

  const std::size_t k = spec.topics, v = spec.vocab_size;
  Rng rng(derive_seed(spec.seed, "corpus.synthetic"));

  SyntheticData data;
  data.beta_true = Tensor2(k, v);
  if (pattern == TopicPattern::Bars) {
    // Disjoint uniform blocks; the last topic absorbs the remainder of V.
    const std::size_t width = v / k;
    for (std::size_t t = 0; t < k; ++t) {
      const std::size_t lo = t * width;
      const std::size_t hi = (t + 1 == k) ? v : lo + width;
      for (std::size_t w = lo; w < hi; ++w) {
        data.beta_true(t, w) = 1.0 / static_cast<double>(hi - lo);
      }
    }
  } else {
    std::vector<double> a(v, 0.1), row;
    for (std::size_t t = 0; t < k; ++t) {
      rng.dirichlet(a, row);
      for (std::size_t w = 0; w < v; ++w) data.beta_true(t, w) = row[w];
    }
  }

  std::vector<std::string> tokens;
  tokens.reserve(v);
  for (std::size_t w = 0; w < v; ++w) tokens.push_back("w" + std::to_string(w));

  data.corpus.vocab = Vocabulary(std::move(tokens));
  data.theta_true = Tensor2(spec.doc_count, k);

  const std::vector<double> alpha(k, spec.alpha);
  std::vector<double> theta;
  std::vector<double> topic_weights(k), word_weights(v);
  for (std::uint32_t d = 0; d < spec.doc_count; ++d) {
    rng.dirichlet(alpha, theta);
    for (std::size_t t = 0; t < k; ++t) data.theta_true(d, t) = theta[t];
    std::map<std::uint32_t, std::uint32_t> counts;
    for (std::uint32_t n = 0; n < spec.doc_length; ++n) {
      for (std::size_t t = 0; t < k; ++t) topic_weights[t] = theta[t];
      const std::size_t z = rng.categorical(topic_weights);
      for (std::size_t w = 0; w < v; ++w) word_weights[w] = data.beta_true(z, w);
      ++counts[static_cast<std::uint32_t>(rng.categorical(word_weights))];
    }
    auto doc = counts_to_document(counts);
    for (const auto& [w, c] : doc) data.corpus.total_tokens += c;
    data.corpus.docs.push_back(std::move(doc));
  }
  data.corpus.validate();
  return data;
}

}  // namespace ntm
