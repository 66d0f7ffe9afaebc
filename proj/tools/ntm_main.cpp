// Command-line front end: ingestion, training, evaluation, the Gibbs
// baseline and the collapse/ablation demos, each writing a reproducible
// manifest next to its artifacts.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ntm/corpus.hpp"
#include "ntm/error.hpp"
#include "ntm/eval.hpp"
#include "ntm/gibbs.hpp"
#include "ntm/kernels.hpp"
#include "ntm/manifest.hpp"
#include "ntm/model.hpp"
#include "ntm/trainer.hpp"

namespace fs = std::filesystem;
using namespace ntm;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

struct CorpusArgs {
  std::string corpus_dir;
  std::string docword, vocab;

  void attach(CLI::App* cmd) {
    cmd->add_option("--corpus", corpus_dir,
                    "directory containing docword.txt and vocab.txt");
    cmd->add_option("--docword", docword, "explicit docword file (UCI bag-of-words)");
    cmd->add_option("--vocab", vocab, "explicit vocab file (one token per line)");
  }

  Corpus load(RunManifest& manifest) const {
    std::string dw = docword, vb = vocab;
    if (!corpus_dir.empty()) {
      if (dw.empty()) dw = (fs::path(corpus_dir) / "docword.txt").string();
      if (vb.empty()) vb = (fs::path(corpus_dir) / "vocab.txt").string();
    }
    if (dw.empty() || vb.empty()) {
      throw Error("no corpus given: pass --corpus DIR or --docword/--vocab");
    }
    manifest.add_input(dw);
    manifest.add_input(vb);
    return ingest_uci_bow(dw, vb);
  }
};

fs::path ensure_out(const std::string& out) {
  if (out.empty()) throw Error("--out is required");
  fs::create_directories(out);
  return out;
}

void emit_manifest(RunManifest& manifest, const Timer& timer, const fs::path& out) {
  manifest.wall_seconds = timer.seconds();
  const auto path = out / "manifest.txt";
  manifest.outputs.push_back(path.string());
  manifest.write(path.string());
}

void add_train_flags(CLI::App* cmd, TrainConfig& cfg, std::string& preset_name,
                     std::string& decoder_name, std::string& prior_name) {
  cmd->add_option("--preset", preset_name,
                  "high-lr-bn | low-lr-no-bn | gaussian-high | gaussian-low");
  cmd->add_option("--decoder", decoder_name, "lda | prodlda");
  cmd->add_option("--prior", prior_name, "dirichlet | gaussian");
  cmd->add_option("--topics,-k", cfg.topics, "number of topics");
  cmd->add_option("--hidden1", cfg.hidden1, "encoder first layer width");
  cmd->add_option("--hidden2", cfg.hidden2, "encoder second layer width");
  cmd->add_option("--epochs", cfg.epochs, "training epochs");
  cmd->add_option("--batch-size", cfg.batch_size, "minibatch size");
  cmd->add_option("--lr", cfg.lr, "Adam learning rate");
  cmd->add_option("--beta1", cfg.adam_beta1, "Adam first-moment weight");
  cmd->add_option("--beta2", cfg.adam_beta2, "Adam second-moment weight");
  cmd->add_option("--dropout", cfg.dropout, "dropout rate on theta");
  cmd->add_option("--alpha", cfg.prior_alpha, "Dirichlet prior concentration");
  cmd->add_flag("--batch-norm,!--no-batch-norm", cfg.use_batch_norm, "batch normalization");
  cmd->add_option("--kl-warmup", cfg.kl_warmup_steps, "linear KL weight warm-up steps");
  cmd->add_option("--clip-norm", cfg.clip_norm, "global gradient norm clip (0 = off)");
  cmd->add_option("--eval-every", cfg.eval_every, "trace/checkpoint cadence in epochs");
  cmd->add_option("--seed", cfg.seed, "master seed");
}

void resolve_train_config(TrainConfig& cfg, const std::string& preset_name,
                          const std::string& decoder_name, const std::string& prior_name,
                          const CLI::App* cmd) {
  if (!preset_name.empty()) {
    TrainConfig base = preset(preset_name);
    // Explicit flags win over the preset.
    if (cmd->count("--lr") == 0) cfg.lr = base.lr;
    if (cmd->count("--beta1") == 0) cfg.adam_beta1 = base.adam_beta1;
    if (cmd->count("--batch-norm") == 0 && cmd->count("--no-batch-norm") == 0) {
      cfg.use_batch_norm = base.use_batch_norm;
    }
    if (prior_name.empty()) cfg.prior = base.prior;
  }
  if (!decoder_name.empty()) cfg.decoder = decoder_from_string(decoder_name);
  if (!prior_name.empty()) cfg.prior = prior_from_string(prior_name);
}

void manifest_train_config(RunManifest& m, const TrainConfig& cfg) {
  m.add("topics", std::uint64_t(cfg.topics));
  m.add("hidden1", std::uint64_t(cfg.hidden1));
  m.add("hidden2", std::uint64_t(cfg.hidden2));
  m.add("epochs", std::uint64_t(cfg.epochs));
  m.add("batch_size", std::uint64_t(cfg.batch_size));
  m.add("lr", cfg.lr);
  m.add("adam_beta1", cfg.adam_beta1);
  m.add("adam_beta2", cfg.adam_beta2);
  m.add("batch_norm", std::string(cfg.use_batch_norm ? "on" : "off"));
  m.add("dropout", cfg.dropout);
  m.add("prior", std::string(to_string(cfg.prior)));
  m.add("prior_alpha", cfg.prior_alpha);
  m.add("decoder", std::string(to_string(cfg.decoder)));
  m.add("eval_every", std::uint64_t(cfg.eval_every));
  m.add("kl_warmup_steps", std::uint64_t(cfg.kl_warmup_steps));
  m.add("clip_norm", cfg.clip_norm);
  m.add("kernel_backend", std::string(kern::backend_name(kern::active_backend())));
}

int cmd_ingest(const std::string& input_dir, const std::string& stopword_path,
               std::size_t min_df, std::size_t max_vocab, const std::string& out) {
  Timer timer;
  const fs::path outdir = ensure_out(out);
  RunManifest manifest;
  manifest.command = "ingest";
  manifest.add("input_dir", input_dir);
  manifest.add("min_doc_frequency", std::uint64_t(min_df));
  manifest.add("max_vocab", std::uint64_t(max_vocab));

  std::unordered_set<std::string> stopwords;
  if (!stopword_path.empty()) {
    stopwords = load_stopwords(stopword_path);
    manifest.add_input(stopword_path);
  }
  IngestOptions opts;
  opts.min_doc_frequency = min_df;
  opts.max_vocab = max_vocab;
  IngestReport report;
  const Corpus corpus = ingest_plaintext(input_dir, stopwords, opts, &report);

  const auto docword = (outdir / "docword.txt").string();
  const auto vocab = (outdir / "vocab.txt").string();
  write_uci_bow(corpus, docword, vocab);
  manifest.outputs = {docword, vocab};

  std::ofstream rep(outdir / "report.txt");
  rep << "files_read: " << report.files_read << "\n"
      << "docs_kept: " << report.docs_kept << "\n"
      << "docs_dropped_empty: " << report.docs_dropped_empty << "\n"
      << "vocab_size: " << report.vocab_size << "\n"
      << "tokens_kept: " << report.tokens_kept << "\n";
  manifest.outputs.push_back((outdir / "report.txt").string());
  emit_manifest(manifest, timer, outdir);
  std::cout << "ingested " << report.docs_kept << " docs (" << report.docs_dropped_empty
            << " dropped), vocab " << report.vocab_size << "\n";
  return 0;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& pattern, const std::string& out) {
  Timer timer;
  const fs::path outdir = ensure_out(out);
  const TopicPattern pat = pattern == "dirichlet" ? TopicPattern::Dirichlet : TopicPattern::Bars;
  const SyntheticData data = generate_synthetic(spec, pat);

  const auto docword = (outdir / "docword.txt").string();
  const auto vocab = (outdir / "vocab.txt").string();
  write_uci_bow(data.corpus, docword, vocab);
  eval::write_topic_matrix(data.beta_true, (outdir / "beta_true.txt").string());
  eval::write_topic_matrix(data.theta_true, (outdir / "theta_true.txt").string());

  RunManifest manifest;
  manifest.command = "synth";
  manifest.seed = spec.seed;
  manifest.add("topics", std::uint64_t(spec.topics));
  manifest.add("vocab_size", std::uint64_t(spec.vocab_size));
  manifest.add("alpha", spec.alpha);
  manifest.add("doc_count", std::uint64_t(spec.doc_count));
  manifest.add("doc_length", std::uint64_t(spec.doc_length));
  manifest.add("pattern", pattern);
  manifest.outputs = {docword, vocab, (outdir / "beta_true.txt").string(),
                      (outdir / "theta_true.txt").string()};
  emit_manifest(manifest, timer, outdir);
  std::cout << "wrote synthetic corpus: " << data.corpus.d() << " docs, V=" << data.corpus.v()
            << "\n";
  return 0;
}

int cmd_train(const CorpusArgs& cargs, TrainConfig cfg, double test_fraction,
              const std::string& out) {
  Timer timer;
  const fs::path outdir = ensure_out(out);
  RunManifest manifest;
  manifest.command = "train";
  manifest.seed = cfg.seed;
  Corpus corpus = cargs.load(manifest);

  std::optional<std::pair<Corpus, Corpus>> parts;
  const Corpus* train_corpus = &corpus;
  const Corpus* heldout = nullptr;
  if (test_fraction > 0.0) {
    parts = split(corpus, test_fraction, cfg.seed);
    train_corpus = &parts->first;
    heldout = &parts->second;
  }
  cfg.checkpoint_path = (outdir / "checkpoint.bin").string();
  manifest_train_config(manifest, cfg);
  manifest.add("test_fraction", test_fraction);

  TrainResult result = train(*train_corpus, cfg, heldout);

  const auto model_path = (outdir / "model.bin").string();
  save_model(result.model, model_path);
  result.trace.write_file((outdir / "trace.log").string());

  eval::EvalReport report;
  const Tensor2 topics = topic_distributions(result.model);
  const auto tw = eval::top_words(topics, corpus.vocab, std::min<std::size_t>(10, corpus.v()));
  report.top_words = tw.words;
  const auto npmi = eval::npmi_coherence(tw.words, *train_corpus);
  report.coherence = npmi.mean;
  report.per_topic_npmi = npmi.per_topic;
  report.perplexity = eval::perplexity(result.model, heldout ? *heldout : *train_corpus,
                                       cfg.eval_samples, cfg.seed);
  report.diversity = detect_collapse(result.model);
  {
    Rng rng(derive_seed(cfg.seed, "cli.sparsity"));
    const auto sp = eval::sparsity_profile(result.model.prior, 10000, rng);
    report.mean_entropy = sp.mean_entropy;
    report.mean_top5_mass = sp.mean_top5_mass;
  }
  std::ofstream rep(outdir / "report.txt");
  eval::write_report(rep, report);

  manifest.outputs = {model_path, model_path + ".manifest.txt",
                      (outdir / "trace.log").string(), (outdir / "report.txt").string()};
  emit_manifest(manifest, timer, outdir);
  std::cout << "trained " << to_string(cfg.decoder) << " k=" << cfg.topics
            << ": perplexity " << report.perplexity << ", coherence " << report.coherence
            << ", diversity " << report.diversity << "\n";
  return 0;
}

int cmd_gibbs(const CorpusArgs& cargs, std::uint32_t topics, double alpha, double eta,
              std::uint32_t burnin, std::uint32_t samples, std::uint32_t thinning,
              std::uint64_t seed, const std::string& out) {
  Timer timer;
  const fs::path outdir = ensure_out(out);
  RunManifest manifest;
  manifest.command = "gibbs";
  manifest.seed = seed;
  const Corpus corpus = cargs.load(manifest);
  manifest.add("topics", std::uint64_t(topics));
  manifest.add("alpha", alpha);
  manifest.add("eta", eta);
  manifest.add("burnin", std::uint64_t(burnin));
  manifest.add("samples", std::uint64_t(samples));
  manifest.add("thinning", std::uint64_t(thinning));

  gibbs::State state = gibbs::init(corpus, topics, alpha, eta, seed);
  const gibbs::Estimate est = gibbs::estimate(state, burnin, samples, thinning);

  eval::write_topic_matrix(est.beta, (outdir / "beta.txt").string());
  eval::write_topic_matrix(est.theta, (outdir / "theta.txt").string());

  eval::EvalReport report;
  const auto tw = eval::top_words(est.beta, corpus.vocab, std::min<std::size_t>(10, corpus.v()));
  report.top_words = tw.words;
  const auto npmi = eval::npmi_coherence(tw.words, corpus);
  report.coherence = npmi.mean;
  report.per_topic_npmi = npmi.per_topic;
  std::ofstream rep(outdir / "report.txt");
  eval::write_report(rep, report);

  manifest.outputs = {(outdir / "beta.txt").string(), (outdir / "theta.txt").string(),
                      (outdir / "report.txt").string()};
  emit_manifest(manifest, timer, outdir);
  std::cout << "gibbs k=" << topics << ": coherence " << report.coherence << "\n";
  return 0;
}

int cmd_eval(const CorpusArgs& cargs, const std::string& model_path,
             const std::string& beta_path, const std::string& mode, int samples,
             std::size_t top_n, std::uint64_t seed, const std::string& out) {
  Timer timer;
  const fs::path outdir = ensure_out(out);
  RunManifest manifest;
  manifest.command = "eval";
  manifest.seed = seed;
  manifest.add("mode", mode);
  const Corpus corpus = cargs.load(manifest);

  eval::EvalReport report;
  std::optional<TopicModel> model;
  Tensor2 topics;
  if (!model_path.empty()) {
    manifest.add_input(model_path);
    model = load_model(model_path);
    if (model->v() != corpus.v()) throw Error("model vocabulary size does not match corpus");
    topics = topic_distributions(*model);
  } else if (!beta_path.empty()) {
    manifest.add_input(beta_path);
    topics = eval::read_topic_matrix(beta_path);
    if (topics.cols() != corpus.v()) throw Error("topic matrix width does not match corpus");
  } else {
    throw Error("eval needs --model or --beta");
  }

  if (mode == "coherence") {
    const auto tw = eval::top_words(topics, corpus.vocab, top_n);
    report.top_words = tw.words;
    const auto npmi = eval::npmi_coherence(tw.words, corpus);
    report.coherence = npmi.mean;
    report.per_topic_npmi = npmi.per_topic;
    if (model) report.diversity = detect_collapse(*model);
    std::ofstream rep(outdir / "report.txt");
    rep << "coherence_npmi_mean: " << report.coherence << "\n";
    rep << "per_topic_npmi:";
    for (double x : report.per_topic_npmi) rep << " " << x;
    rep << "\ntopic_diversity: " << report.diversity << "\ntopics:\n";
    for (std::size_t t = 0; t < report.top_words.size(); ++t) {
      rep << "  topic " << t << " |";
      for (const auto& w : report.top_words[t]) rep << " " << w;
      rep << "\n";
    }
  } else if (mode == "perplexity") {
    if (!model) throw Error("perplexity needs --model");
    report.perplexity = eval::perplexity(*model, corpus, samples, seed);
    std::ofstream rep(outdir / "report.txt");
    rep << "perplexity: " << report.perplexity << "\n"
        << "elbo_samples: " << samples << "\n";
  } else if (mode == "sparsity") {
    if (!model) throw Error("sparsity needs --model");
    Rng rng(derive_seed(seed, "cli.sparsity"));
    const auto sp = eval::sparsity_profile(model->prior, 10000, rng);
    // Standard Gaussian baseline of the same dimension for comparison.
    Rng rng2(derive_seed(seed, "cli.sparsity.baseline"));
    const auto base = eval::sparsity_profile(
        LogisticNormalParams::standard_gaussian(model->k()), 10000, rng2);
    std::ofstream rep(outdir / "report.txt");
    rep << "prior: " << to_string(model->cfg.prior_kind) << "\n"
        << "prior_mean_entropy_nats: " << sp.mean_entropy << "\n"
        << "prior_mean_top5_mass: " << sp.mean_top5_mass << "\n"
        << "gaussian_baseline_mean_entropy_nats: " << base.mean_entropy << "\n"
        << "gaussian_baseline_mean_top5_mass: " << base.mean_top5_mass << "\n";
  } else if (mode == "compare-inference") {
    if (!model) throw Error("compare-inference needs --model");
    eval::CompareInferenceOptions opts;
    opts.samples = samples;
    opts.seed = seed;
    const auto cmp = eval::compare_inference(*model, corpus, opts);
    std::ofstream rep(outdir / "report.txt");
    rep << "perplexity_network_only: " << cmp.perplexity_network_only << "\n"
        << "perplexity_optimized: " << cmp.perplexity_optimized << "\n"
        << "elbo_network_only: " << cmp.elbo_network_only << "\n"
        << "elbo_optimized: " << cmp.elbo_optimized << "\n";
    manifest.outputs = {(outdir / "report.txt").string()};
    emit_manifest(manifest, timer, outdir);
    std::cout << "network-only " << cmp.perplexity_network_only << " vs optimized "
              << cmp.perplexity_optimized << "\n";
    return 0;
  } else {
    throw Error("unknown eval mode: " + mode);
  }

  manifest.outputs = {(outdir / "report.txt").string()};
  emit_manifest(manifest, timer, outdir);
  std::cout << "report written to " << (outdir / "report.txt").string() << "\n";
  return 0;
}

int cmd_topics(const std::string& model_path, const std::string& beta_path,
               const std::string& vocab_path, std::size_t top_n) {
  Tensor2 topics;
  if (!model_path.empty()) {
    TopicModel model = load_model(model_path);
    topics = topic_distributions(model);
  } else if (!beta_path.empty()) {
    topics = eval::read_topic_matrix(beta_path);
  } else {
    throw Error("topics needs --model or --beta");
  }
  std::ifstream in(vocab_path);
  if (!in) throw Error("cannot open vocab file: " + vocab_path);
  std::string line;
  std::vector<std::string> tokens;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  const Vocabulary vocab(std::move(tokens));
  const auto tw = eval::top_words(topics, vocab, top_n);
  for (std::size_t t = 0; t < tw.words.size(); ++t) {
    std::cout << "topic " << t << ":";
    for (const auto& w : tw.words[t]) std::cout << " " << w;
    std::cout << "\n";
  }
  return 0;
}

int cmd_collapse_demo(const CorpusArgs& cargs, std::uint32_t topics, std::uint32_t epochs,
                      std::size_t top_n, std::uint64_t seed, const std::string& out) {
  Timer timer;
  const fs::path outdir = ensure_out(out);
  RunManifest manifest;
  manifest.command = "collapse-demo";
  manifest.seed = seed;
  const Corpus corpus = cargs.load(manifest);

  TrainConfig good = preset("high-lr-bn");
  good.topics = topics;
  good.epochs = epochs;
  good.batch_size = 64;
  good.seed = seed;
  good.eval_every = 0;

  // Low momentum, no batch norm, tiny learning rate: the regime under which
  // the inferred topics land on near-identical word rankings.
  TrainConfig bad = good;
  bad.adam_beta1 = 0.5;
  bad.use_batch_norm = false;
  bad.lr = 1e-4;

  manifest_train_config(manifest, good);

  TrainResult run_good = train(corpus, good);
  TrainResult run_bad = train(corpus, bad);
  const double div_good = detect_collapse(run_good.model, top_n);
  const double div_bad = detect_collapse(run_bad.model, top_n);

  std::ofstream rep(outdir / "report.txt");
  rep << "diversity_high_lr_bn: " << div_good << "\n";
  rep << "diversity_collapse_config: " << div_bad << "\n";
  rep << "collapse_reproduced: " << (div_bad < div_good ? "yes" : "no") << "\n";
  auto dump_topics = [&](const char* name, TopicModel& m) {
    rep << name << ":\n";
    const auto tw = eval::top_words(topic_distributions(m), corpus.vocab,
                                    std::min<std::size_t>(10, corpus.v()));
    for (std::size_t t = 0; t < tw.words.size(); ++t) {
      rep << "  topic " << t << " |";
      for (const auto& w : tw.words[t]) rep << " " << w;
      rep << "\n";
    }
  };
  dump_topics("topics_high_lr_bn", run_good.model);
  dump_topics("topics_collapse_config", run_bad.model);

  manifest.outputs = {(outdir / "report.txt").string()};
  emit_manifest(manifest, timer, outdir);
  std::cout << "diversity high-lr-bn " << div_good << " vs collapse config " << div_bad << "\n";
  return 0;
}

int cmd_ablate(const CorpusArgs& cargs, std::uint32_t topics, std::uint32_t epochs,
               double test_fraction, std::uint64_t seed, const std::string& out) {
  Timer timer;
  const fs::path outdir = ensure_out(out);
  RunManifest manifest;
  manifest.command = "ablate";
  manifest.seed = seed;
  Corpus corpus = cargs.load(manifest);
  manifest.add("topics", std::uint64_t(topics));
  manifest.add("epochs", std::uint64_t(epochs));
  manifest.add("test_fraction", test_fraction);

  std::optional<std::pair<Corpus, Corpus>> parts;
  const Corpus* train_corpus = &corpus;
  const Corpus* heldout = nullptr;
  if (test_fraction > 0.0) {
    parts = split(corpus, test_fraction, seed);
    train_corpus = &parts->first;
    heldout = &parts->second;
  }

  std::ofstream rep(outdir / "report.txt");
  rep << "preset coherence perplexity diversity\n";
  for (const char* name : {"high-lr-bn", "low-lr-no-bn", "gaussian-high", "gaussian-low"}) {
    TrainConfig cfg = preset(name);
    cfg.topics = topics;
    cfg.epochs = epochs;
    cfg.batch_size = 64;
    cfg.seed = seed;
    cfg.eval_every = 0;
    TrainResult result = train(*train_corpus, cfg, heldout);
    const auto tw = eval::top_words(topic_distributions(result.model), corpus.vocab,
                                    std::min<std::size_t>(10, corpus.v()));
    const double coherence = eval::npmi_coherence(tw.words, *train_corpus).mean;
    const double perp =
        eval::perplexity(result.model, heldout ? *heldout : *train_corpus, 1, seed);
    const double div = detect_collapse(result.model);
    rep << name << " " << coherence << " " << perp << " " << div << "\n";
    std::cout << name << ": coherence " << coherence << ", perplexity " << perp
              << ", diversity " << div << "\n";
  }
  manifest.outputs = {(outdir / "report.txt").string()};
  emit_manifest(manifest, timer, outdir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neural topic models: AVITM (LDA / ProdLDA) with a collapsed Gibbs baseline"};
  app.require_subcommand(1);

  std::string out;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "plaintext directory -> UCI bag-of-words corpus");
  std::string in_dir, stopword_path;
  std::size_t min_df = 1, max_vocab = 2000;
  ingest->add_option("--input", in_dir, "directory of plaintext documents")->required();
  ingest->add_option("--stopwords", stopword_path, "stopword list, one token per line");
  ingest->add_option("--min-df", min_df, "minimum document frequency");
  ingest->add_option("--max-vocab", max_vocab, "vocabulary size cap");
  ingest->add_option("--out", out)->required();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with known topics");
  SyntheticSpec spec;
  std::string pattern = "bars";
  synth->add_option("--topics,-k", spec.topics);
  synth->add_option("--vocab-size", spec.vocab_size);
  synth->add_option("--alpha", spec.alpha);
  synth->add_option("--docs", spec.doc_count);
  synth->add_option("--doc-length", spec.doc_length);
  synth->add_option("--seed", spec.seed);
  synth->add_option("--pattern", pattern, "bars | dirichlet");
  synth->add_option("--out", out)->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train an AVITM topic model");
  CorpusArgs train_corpus;
  train_corpus.attach(train_cmd);
  TrainConfig cfg;
  std::string preset_name, decoder_name, prior_name;
  double test_fraction = 0.0;
  add_train_flags(train_cmd, cfg, preset_name, decoder_name, prior_name);
  train_cmd->add_option("--test-fraction", test_fraction, "held-out fraction (0 = none)");
  train_cmd->add_option("--out", out)->required();

  // gibbs
  auto* gibbs_cmd = app.add_subcommand("gibbs", "collapsed Gibbs LDA baseline");
  CorpusArgs gibbs_corpus;
  gibbs_corpus.attach(gibbs_cmd);
  std::uint32_t g_topics = 50, g_burnin = 200, g_samples = 5, g_thinning = 5;
  double g_alpha = 0.02, g_eta = 0.01;
  std::uint64_t g_seed = 0;
  gibbs_cmd->add_option("--topics,-k", g_topics);
  gibbs_cmd->add_option("--alpha", g_alpha);
  gibbs_cmd->add_option("--eta", g_eta);
  gibbs_cmd->add_option("--burnin", g_burnin);
  gibbs_cmd->add_option("--samples", g_samples);
  gibbs_cmd->add_option("--thinning", g_thinning);
  gibbs_cmd->add_option("--seed", g_seed);
  gibbs_cmd->add_option("--out", out)->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model or exported topic matrix");
  CorpusArgs eval_corpus;
  eval_corpus.attach(eval_cmd);
  std::string model_path, beta_path, mode = "coherence";
  int e_samples = 1;
  std::size_t top_n = 10;
  std::uint64_t e_seed = 0;
  eval_cmd->add_option("--model", model_path, "model.bin from train");
  eval_cmd->add_option("--beta", beta_path, "topic matrix (e.g. gibbs export)");
  eval_cmd->add_option("--mode", mode, "perplexity | coherence | sparsity | compare-inference");
  eval_cmd->add_option("--samples", e_samples, "ELBO Monte Carlo samples");
  eval_cmd->add_option("--top-n", top_n, "words per topic for coherence");
  eval_cmd->add_option("--seed", e_seed);
  eval_cmd->add_option("--out", out)->required();

  // topics
  auto* topics_cmd = app.add_subcommand("topics", "print top words per topic");
  std::string t_model, t_beta, t_vocab;
  std::size_t t_top_n = 10;
  topics_cmd->add_option("--model", t_model);
  topics_cmd->add_option("--beta", t_beta);
  topics_cmd->add_option("--vocab", t_vocab)->required();
  topics_cmd->add_option("--top-n", t_top_n);

  // collapse-demo
  auto* collapse_cmd = app.add_subcommand(
      "collapse-demo", "paired runs showing component collapse vs the anti-collapse regime");
  CorpusArgs collapse_corpus;
  collapse_corpus.attach(collapse_cmd);
  std::uint32_t c_topics = 5, c_epochs = 200;
  std::size_t c_top_n = 10;
  std::uint64_t c_seed = 0;
  collapse_cmd->add_option("--topics,-k", c_topics);
  collapse_cmd->add_option("--epochs", c_epochs);
  collapse_cmd->add_option("--top-n", c_top_n, "words per topic for the diversity score");
  collapse_cmd->add_option("--seed", c_seed);
  collapse_cmd->add_option("--out", out)->required();

  // ablate
  auto* ablate_cmd =
      app.add_subcommand("ablate", "prior x learning-rate grid over the four presets");
  CorpusArgs ablate_corpus;
  ablate_corpus.attach(ablate_cmd);
  std::uint32_t a_topics = 50, a_epochs = 100;
  double a_test_fraction = 0.0;
  std::uint64_t a_seed = 0;
  ablate_cmd->add_option("--topics,-k", a_topics);
  ablate_cmd->add_option("--epochs", a_epochs);
  ablate_cmd->add_option("--test-fraction", a_test_fraction);
  ablate_cmd->add_option("--seed", a_seed);
  ablate_cmd->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest) return cmd_ingest(in_dir, stopword_path, min_df, max_vocab, out);
    if (*synth) return cmd_synth(spec, pattern, out);
    if (*train_cmd) {
      resolve_train_config(cfg, preset_name, decoder_name, prior_name, train_cmd);
      return cmd_train(train_corpus, cfg, test_fraction, out);
    }
    if (*gibbs_cmd) {
      return cmd_gibbs(gibbs_corpus, g_topics, g_alpha, g_eta, g_burnin, g_samples, g_thinning,
                       g_seed, out);
    }
    if (*eval_cmd) {
      return cmd_eval(eval_corpus, model_path, beta_path, mode, e_samples, top_n, e_seed, out);
    }
    if (*topics_cmd) return cmd_topics(t_model, t_beta, t_vocab, t_top_n);
    if (*collapse_cmd) {
      return cmd_collapse_demo(collapse_corpus, c_topics, c_epochs, c_top_n, c_seed, out);
    }
    if (*ablate_cmd) {
      return cmd_ablate(ablate_corpus, a_topics, a_epochs, a_test_fraction, a_seed, out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
