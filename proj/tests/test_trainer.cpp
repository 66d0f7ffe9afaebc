#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "ntm/corpus.hpp"
#include "ntm/error.hpp"
#include "ntm/eval.hpp"
#include "ntm/trainer.hpp"

using namespace ntm;
namespace fs = std::filesystem;

namespace {

TrainConfig bars_config(std::uint32_t epochs, std::uint64_t seed = 0) {
  TrainConfig cfg = preset("high-lr-bn");
  cfg.topics = 5;
  cfg.epochs = epochs;
  cfg.batch_size = 64;
  cfg.seed = seed;
  cfg.eval_every = 0;  // trace perplexity only on the final epoch
  return cfg;
}

bool beta_equal(TopicModel& a, TopicModel& b) {
  const auto fa = a.beta.flat();
  const auto fb = b.beta.flat();
  if (fa.size() != fb.size()) return false;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    if (fa[i] != fb[i]) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("trainer");

TEST_CASE("presets encode the documented regimes") {
  const TrainConfig hi = preset("high-lr-bn");
  CHECK(hi.use_batch_norm == true);
  CHECK(hi.lr == 0.002);
  CHECK(hi.lr < 0.1);
  CHECK(hi.lr > 0.001);

  const TrainConfig lo = preset("low-lr-no-bn");
  CHECK(lo.use_batch_norm == false);
  CHECK(lo.lr > 0.00009);
  CHECK(lo.lr < 0.0009);

  CHECK(preset("gaussian-high").prior == PriorKind::Gaussian);
  CHECK(preset("gaussian-low").prior == PriorKind::Gaussian);
  CHECK(preset("gaussian-low").use_batch_norm == false);

  for (const char* name : {"high-lr-bn", "low-lr-no-bn", "gaussian-high", "gaussian-low"}) {
    CHECK(preset(name).adam_beta1 > 0.8);
  }
  CHECK_THROWS_AS(preset("fast-and-loose"), Error);
}

TEST_CASE("two documents, one epoch, batch two: a single optimizer step") {
  Corpus c;
  c.vocab.add("a");
  c.vocab.add("b");
  c.vocab.add("c");
  c.docs.push_back({{0, 2}, {1, 1}});
  c.docs.push_back({{1, 3}, {2, 1}});
  c.total_tokens = 7;

  TrainConfig cfg = preset("high-lr-bn");
  cfg.topics = 2;
  cfg.hidden1 = 4;
  cfg.hidden2 = 4;
  cfg.epochs = 1;
  cfg.batch_size = 2;
  cfg.eval_every = 0;
  const TrainResult result = train(c, cfg);
  REQUIRE(result.trace.rows.size() == 1);

  // One Adam step at lr moves every parameter by strictly less than
  // lr * (1 + eps slack); with a single step |delta| = lr * |mhat|/(sqrt(vhat)+eps)
  // and mhat/sqrt(vhat) = sign(g), so every touched parameter moved by ~lr.
  TopicModel fresh = make_model(cfg.model_config(3), derive_seed(cfg.seed, "trainer.init"));
  TopicModel trained = result.model;
  double max_delta = 0.0;
  auto fb = fresh.param_blocks();
  auto tb = trained.param_blocks();
  for (std::size_t i = 0; i < fb.size(); ++i) {
    for (std::size_t j = 0; j < fb[i].data.size(); ++j) {
      max_delta = std::max(max_delta, std::abs(fb[i].data[j] - tb[i].data[j]));
    }
  }
  CHECK(max_delta > 0.0);
  CHECK(max_delta <= cfg.lr * 1.000001);
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
  const SyntheticData data = generate_synthetic({5, 25, 0.1, 120, 40, 0});
  const TrainConfig cfg = bars_config(6, 3);
  TrainResult a = train(data.corpus, cfg);
  TrainResult b = train(data.corpus, cfg);
  CHECK(beta_equal(a.model, b.model));
  CHECK(a.trace.rows.back().elbo_per_doc == b.trace.rows.back().elbo_per_doc);
}

TEST_CASE("smoothed train elbo improves on the bars corpus") {
  const SyntheticData data = generate_synthetic({5, 25, 0.1, 500, 80, 0});
  TrainResult result = train(data.corpus, bars_config(30));
  const auto& rows = result.trace.rows;
  REQUIRE(rows.size() == 30);
  auto mean_elbo = [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += rows[i].elbo_per_doc;
    return acc / static_cast<double>(hi - lo);
  };
  CHECK(mean_elbo(25, 30) > mean_elbo(0, 5));
  for (const auto& row : rows) CHECK(std::isfinite(row.elbo_per_doc));
}

TEST_CASE("checkpoint resume reproduces the uninterrupted run exactly") {
  const SyntheticData data = generate_synthetic({4, 16, 0.1, 80, 30, 1});
  const auto ckpt = (fs::temp_directory_path() / "ntm_test_ckpt.bin").string();

  TrainConfig full = bars_config(8, 5);
  full.topics = 4;
  TrainResult uninterrupted = train(data.corpus, full);

  // Interrupted run: stop after 4 epochs with a checkpoint, then continue to
  // the same 8-epoch horizon. Per-epoch derived random streams make the
  // continuation independent of the interruption.
  TrainConfig partial = full;
  partial.epochs = 4;
  partial.eval_every = 4;
  partial.checkpoint_path = ckpt;
  train(data.corpus, partial);
  TrainResult resumed = train_resume(ckpt, data.corpus, nullptr, /*override_epochs=*/8);

  CHECK(beta_equal(uninterrupted.model, resumed.model));
  fs::remove(ckpt);
}

TEST_CASE("detect_collapse extremes") {
  ModelConfig cfg;
  cfg.topics = 4;
  cfg.vocab_size = 40;
  cfg.hidden1 = 4;
  cfg.hidden2 = 4;
  cfg.use_batch_norm = false;
  TopicModel same = make_model(cfg, 0);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t w = 0; w < 40; ++w) same.beta(t, w) = static_cast<double>(w % 11);
  }
  CHECK(detect_collapse(same, 10) == 0.0);

  TopicModel disjoint = make_model(cfg, 0);
  disjoint.beta.zero();
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t w = 0; w < 10; ++w) disjoint.beta(t, t * 10 + w) = 5.0 + w;
  }
  CHECK(detect_collapse(disjoint, 10) == 1.0);
}

TEST_CASE("anti-collapse regime scores higher diversity than the collapse regime") {
  const SyntheticData data = generate_synthetic({5, 25, 0.1, 500, 80, 0});
  TrainConfig good = bars_config(200, 0);
  TrainConfig bad = good;
  bad.adam_beta1 = 0.5;
  bad.use_batch_norm = false;
  bad.lr = 1e-4;
  TrainResult g = train(data.corpus, good);
  TrainResult b = train(data.corpus, bad);
  const double dg = detect_collapse(g.model, 5);
  const double db = detect_collapse(b.model, 5);
  MESSAGE("diversity high-lr-bn=", dg, " collapse-config=", db);
  CHECK(db < dg);
}

TEST_CASE("network-only inference recovers the generating topic on sparse docs") {
  const SyntheticData data = generate_synthetic({5, 25, 0.02, 400, 60, 0});
  TrainResult result = train(data.corpus, bars_config(150));

  // Align learned topics to true topics, then check argmax agreement.
  const Tensor2 learned = topic_distributions(result.model);
  const auto match = test::match_topics(learned, data.beta_true);
  std::vector<std::size_t> true_to_learned = match.learned;

  std::size_t hits = 0;
  for (std::size_t d = 0; d < data.corpus.d(); ++d) {
    const std::size_t true_topic = static_cast<std::size_t>(
        std::max_element(data.theta_true.row(d), data.theta_true.row(d) + 5) -
        data.theta_true.row(d));
    const auto theta = infer_theta(result.model, data.corpus.docs[d]);
    const std::size_t inferred = static_cast<std::size_t>(
        std::max_element(theta.begin(), theta.end()) - theta.begin());
    if (inferred == true_to_learned[true_topic]) ++hits;
  }
  const double accuracy = static_cast<double>(hits) / data.corpus.d();
  MESSAGE("argmax recovery accuracy=", accuracy);
  CHECK(accuracy >= 0.8);
}

TEST_CASE("kl warm-up and gradient clipping are wired through") {
  const SyntheticData data = generate_synthetic({3, 12, 0.1, 40, 30, 6});
  TrainConfig base = bars_config(3, 2);
  base.topics = 3;
  TrainResult plain = train(data.corpus, base);

  TrainConfig warm = base;
  warm.kl_warmup_steps = 1000;  // KL weight ~0 for this whole short run
  TrainResult warmed = train(data.corpus, warm);
  CHECK_FALSE(beta_equal(plain.model, warmed.model));
  for (const auto& row : warmed.trace.rows) CHECK(std::isfinite(row.elbo_per_doc));

  TrainConfig clipped = base;
  clipped.clip_norm = 0.001;
  TrainResult clip_run = train(data.corpus, clipped);
  CHECK_FALSE(beta_equal(plain.model, clip_run.model));
}

TEST_CASE("divergent training aborts with a divergence error") {
  const SyntheticData data = generate_synthetic({3, 12, 0.1, 40, 30, 2});
  TrainConfig cfg = bars_config(50, 0);
  cfg.topics = 3;
  cfg.lr = 1e6;  // guaranteed blow-up
  cfg.use_batch_norm = false;
  CHECK_THROWS_AS(train(data.corpus, cfg), TrainingDiverged);
}

TEST_CASE("trace rows line up with epochs and serialize") {
  const SyntheticData data = generate_synthetic({3, 12, 0.1, 30, 20, 4});
  TrainConfig cfg = bars_config(5, 1);
  cfg.topics = 3;
  cfg.eval_every = 2;
  TrainResult result = train(data.corpus, cfg);
  REQUIRE(result.trace.rows.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(result.trace.rows[i].epoch == i);
  // Perplexity present on the eval cadence and final epoch, NaN elsewhere.
  CHECK(std::isfinite(result.trace.rows[1].perplexity));
  CHECK(std::isnan(result.trace.rows[0].perplexity));
  CHECK(std::isfinite(result.trace.rows[4].perplexity));

  const auto path = (fs::temp_directory_path() / "ntm_trace_test.log").string();
  result.trace.write_file(path);
  std::ifstream in(path);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    CHECK(line.find("epoch=") == 0);
    CHECK(line.find("elbo_per_doc=") != std::string::npos);
    CHECK(line.find("diversity=") != std::string::npos);
  }
  CHECK(lines == 5);
  fs::remove(path);
}

TEST_CASE("compare_inference: optimization never scores below the network (shared noise)") {
  const SyntheticData data = generate_synthetic({4, 16, 0.1, 100, 40, 7});
  TrainConfig cfg = bars_config(40, 7);
  cfg.topics = 4;
  TrainResult result = train(data.corpus, cfg);

  eval::CompareInferenceOptions opts;
  opts.steps = 40;
  opts.samples = 2;
  const auto cmp = eval::compare_inference(result.model, data.corpus, opts);
  CHECK(cmp.elbo_optimized >= cmp.elbo_network_only);
  CHECK(cmp.perplexity_optimized <= cmp.perplexity_network_only);
  CHECK(cmp.perplexity_network_only > 1.0);
}

TEST_SUITE_END();
