#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "ntm/corpus.hpp"
#include "ntm/error.hpp"
#include "ntm/eval.hpp"
#include "ntm/model.hpp"
#include "ntm/prior.hpp"

using namespace ntm;

namespace {

// Independent nested-loop NPMI: counts documents directly per pair, applying
// the same published formula (joint smoothing 1/(D+1), clamp to [-1, 1]).
double oracle_npmi(const Corpus& ref, const std::string& wa, const std::string& wb) {
  const double d = static_cast<double>(ref.d());
  const double eps = 1.0 / (d + 1.0);
  std::size_t na = 0, nb = 0, nab = 0;
  for (const auto& doc : ref.docs) {
    bool has_a = false, has_b = false;
    for (const auto& [w, c] : doc) {
      const std::string& tok = ref.vocab.token(w);
      has_a = has_a || tok == wa;
      has_b = has_b || tok == wb;
    }
    na += has_a;
    nb += has_b;
    nab += has_a && has_b;
  }
  const double pij = nab / d + eps;
  const double pi = std::max(na / d, eps);
  const double pj = std::max(nb / d, eps);
  const double denom = -std::log(pij);
  if (denom <= 0.0) return pij >= pi * pj ? 1.0 : -1.0;
  return std::clamp(std::log(pij / (pi * pj)) / denom, -1.0, 1.0);
}

Corpus presence_corpus(const std::vector<std::vector<std::string>>& docs) {
  // Build a corpus where each listed token occurs once per listed document.
  Corpus c;
  std::set<std::string> all;
  for (const auto& d : docs) all.insert(d.begin(), d.end());
  for (const auto& t : all) c.vocab.add(t);
  for (const auto& d : docs) {
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const auto& t : d) ++counts[static_cast<std::uint32_t>(c.vocab.id_of(t))];
    Document doc(counts.begin(), counts.end());
    for (const auto& [w, n] : doc) c.total_tokens += n;
    c.docs.push_back(std::move(doc));
  }
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("top words: peaks, ties, softmax invariance") {
  Vocabulary vocab;
  for (const char* t : {"ant", "bee", "cat", "dog"}) vocab.add(t);
  Tensor2 beta(2, 4);
  beta(0, 2) = 3.0;             // cat peaks topic 0
  beta(1, 1) = 5.0;             // bee peaks topic 1
  beta(0, 0) = beta(0, 3) = 1.0;  // ant/dog tie in topic 0

  const auto tw = eval::top_words(beta, vocab, 2);
  CHECK(tw.words[0] == std::vector<std::string>{"cat", "ant"});  // tie: ant < dog
  CHECK(tw.words[1][0] == "bee");

  // Row softmax is monotone, so the ranking is unchanged.
  const auto sm = eval::top_words(nn::softmax_rows(beta), vocab, 2);
  CHECK(sm.words == tw.words);

  CHECK_THROWS_AS(eval::top_words(beta, vocab, 5), Error);
}

TEST_CASE("npmi hand cases on the documented four-document corpus") {
  // w_a in docs {0,1}, w_b in docs {0,2}; doc 3 has neither.
  const Corpus ref = presence_corpus({{"wa", "wb"}, {"wa", "x"}, {"wb", "x"}, {"x"}});
  REQUIRE(ref.d() == 4);
  // P(a)=P(b)=0.5, P(ab)=0.25, eps=1/5: log(0.45/0.25)/-log(0.45)
  const double expect = std::log(0.45 / 0.25) / -std::log(0.45);
  CHECK(eval::npmi_pair(1, 2, 2, 4) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(0.7361064).epsilon(1e-5));
  const auto r = eval::npmi_coherence({{"wa", "wb"}}, ref);
  CHECK(r.mean == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("npmi approaches 0 and 1 on large independent/coupled corpora") {
  // Independence at scale: P(a)=P(b)=0.5, P(ab)=0.25 over 1000 docs.
  CHECK(std::abs(eval::npmi_pair(250, 500, 500, 1000)) < 0.01);
  // Perfect coupling in half the docs.
  CHECK(eval::npmi_pair(500, 500, 500, 1000) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("npmi never co-occurring pair with common words sits near -1") {
  CHECK(eval::npmi_pair(0, 900, 900, 1000) < -0.9);
}

TEST_CASE("npmi matches the brute-force oracle exactly on random corpora") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    // 20 random documents over a 12-token vocabulary.
    std::vector<std::vector<std::string>> docs(20);
    for (auto& d : docs) {
      const std::size_t len = 1 + rng.uniform_int(6);
      for (std::size_t i = 0; i < len; ++i) {
        d.push_back("t" + std::to_string(rng.uniform_int(12)));
      }
    }
    const Corpus ref = presence_corpus(docs);

    std::vector<std::vector<std::string>> topics(2);
    for (auto& t : topics) {
      std::set<std::string> uniq;
      while (uniq.size() < 4) uniq.insert("t" + std::to_string(rng.uniform_int(14)));
      t.assign(uniq.begin(), uniq.end());
    }
    const auto got = eval::npmi_coherence(topics, ref);
    for (std::size_t ti = 0; ti < topics.size(); ++ti) {
      double acc = 0.0;
      std::size_t pairs = 0;
      for (std::size_t a = 0; a < topics[ti].size(); ++a) {
        for (std::size_t b = a + 1; b < topics[ti].size(); ++b) {
          acc += oracle_npmi(ref, topics[ti][a], topics[ti][b]);
          ++pairs;
        }
      }
      CHECK(got.per_topic[ti] == doctest::Approx(acc / pairs).epsilon(1e-12));
      CHECK(got.per_topic[ti] >= -1.0);
      CHECK(got.per_topic[ti] <= 1.0);
    }
    const double mean =
        (got.per_topic[0] + got.per_topic[1]) / 2.0;
    CHECK(got.mean == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("coherence is invariant to topic order and word order") {
  Rng rng(22);
  std::vector<std::vector<std::string>> docs(15);
  for (auto& d : docs) {
    for (std::size_t i = 0; i < 4; ++i) d.push_back("t" + std::to_string(rng.uniform_int(8)));
  }
  const Corpus ref = presence_corpus(docs);
  const std::vector<std::vector<std::string>> topics = {{"t0", "t1", "t2"}, {"t3", "t4", "t5"}};
  const std::vector<std::vector<std::string>> shuffled = {{"t5", "t3", "t4"}, {"t2", "t0", "t1"}};
  CHECK(eval::npmi_coherence(topics, ref).mean ==
        doctest::Approx(eval::npmi_coherence(shuffled, ref).mean).epsilon(1e-14));
}

TEST_CASE("words absent from the reference are handled by the smoothing floor") {
  const Corpus ref = presence_corpus({{"a", "b"}, {"a"}, {"b"}});
  const auto r = eval::npmi_coherence({{"a", "zzz-not-present"}}, ref);
  CHECK(std::isfinite(r.mean));
  CHECK(r.mean >= -1.0);
  CHECK(r.mean <= 1.0);
}

TEST_CASE("uniform decoder perplexity equals the vocabulary size") {
  ModelConfig cfg;
  cfg.topics = 3;
  cfg.vocab_size = 2000;
  cfg.hidden1 = 4;
  cfg.hidden2 = 4;
  cfg.decoder = DecoderKind::ProdLda;
  cfg.prior_kind = PriorKind::Gaussian;
  cfg.use_batch_norm = false;
  cfg.theta_dropout = 0.0;
  TopicModel model = make_model(cfg, 0);
  for (auto& blk : model.param_blocks()) std::fill(blk.data.begin(), blk.data.end(), 0.0);

  Corpus corpus;
  for (std::size_t w = 0; w < 2000; ++w) corpus.vocab.add("w" + std::to_string(w));
  Rng rng(5);
  for (int d = 0; d < 7; ++d) {
    Document doc;
    std::set<std::uint32_t> used;
    while (used.size() < 5) used.insert(static_cast<std::uint32_t>(rng.uniform_int(2000)));
    for (auto w : used) doc.emplace_back(w, 1 + static_cast<std::uint32_t>(rng.uniform_int(4)));
    for (const auto& [w, c] : doc) corpus.total_tokens += c;
    corpus.docs.push_back(std::move(doc));
  }
  CHECK(eval::perplexity(model, corpus, 1, 0) == doctest::Approx(2000.0).epsilon(1e-10));
}

TEST_CASE("perplexity is at least one and decreases as the elbo improves") {
  const SyntheticData data = generate_synthetic({3, 12, 0.2, 25, 20, 8});
  ModelConfig cfg;
  cfg.topics = 3;
  cfg.vocab_size = 12;
  cfg.hidden1 = 8;
  cfg.hidden2 = 8;
  TopicModel model = make_model(cfg, 1);
  CHECK(eval::perplexity(model, data.corpus, 1, 0) >= 1.0);
  // exp(-elbo/tokens) is a monotone transform of the total elbo.
  CHECK(std::exp(1.0 / 10.0) > std::exp(0.5 / 10.0));

  CHECK_THROWS_AS(eval::perplexity(model, Corpus{}, 1, 0), Error);
}

TEST_CASE("sparsity profile on the degenerate uniform distribution") {
  Rng rng(31);
  LogisticNormalParams uniform{std::vector<double>(50, 0.0), std::vector<double>(50, 1e-18)};
  const auto sp = eval::sparsity_profile(uniform, 200, rng);
  CHECK(sp.mean_entropy == doctest::Approx(std::log(50.0)).epsilon(1e-9));
  CHECK(sp.mean_top5_mass == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("per-sample entropy is bounded by [0, log K]") {
  Rng rng(32);
  for (const double var : {0.01, 1.0, 49.0}) {
    LogisticNormalParams p{std::vector<double>(20, 0.0), std::vector<double>(20, var)};
    const auto sp = eval::sparsity_profile(p, 2000, rng);
    CHECK(sp.mean_entropy >= 0.0);
    CHECK(sp.mean_entropy <= std::log(20.0) + 1e-12);
    CHECK(sp.mean_top5_mass <= 1.0 + 1e-12);
  }
}

TEST_CASE("sparse Dirichlet prior yields lower sample entropy than the Gaussian") {
  Rng rng(33);
  const auto laplace = laplace_approximation(DirichletPrior::symmetric(50, 0.02));
  const auto gauss = LogisticNormalParams::standard_gaussian(50);
  const auto sp_l = eval::sparsity_profile(laplace, 4000, rng);
  const auto sp_g = eval::sparsity_profile(gauss, 4000, rng);
  CHECK(sp_l.mean_entropy + 0.5 < sp_g.mean_entropy);
  CHECK(sp_l.mean_top5_mass > sp_g.mean_top5_mass);
}

TEST_CASE("topic matrix text format round trips") {
  namespace fs = std::filesystem;
  Rng rng(34);
  const Tensor2 beta = test::random_tensor(rng, 4, 9, 0.0, 1.0);
  const auto path = (fs::temp_directory_path() / "ntm_beta_roundtrip.txt").string();
  eval::write_topic_matrix(beta, path);
  const Tensor2 back = eval::read_topic_matrix(path);
  REQUIRE(back.rows() == 4);
  REQUIRE(back.cols() == 9);
  for (std::size_t i = 0; i < beta.size(); ++i) {
    CHECK(back.data()[i] == beta.data()[i]);  // %.17g survives the round trip
  }
  fs::remove(path);
}

TEST_SUITE_END();
