#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ntm/corpus.hpp"
#include "ntm/error.hpp"
#include "ntm/model.hpp"
#include "ntm/neuralnet.hpp"

namespace ntm {

struct TrainConfig {
  std::uint32_t topics = 50;
  std::uint32_t hidden1 = 100;
  std::uint32_t hidden2 = 100;
  std::uint32_t epochs = 100;
  std::uint32_t batch_size = 256;
  double lr = 0.002;
  double adam_beta1 = 0.99;
  double adam_beta2 = 0.999;
  bool use_batch_norm = true;
  double dropout = 0.2;
  PriorKind prior = PriorKind::Dirichlet;
  double prior_alpha = 0.02;
  DecoderKind decoder = DecoderKind::ProdLda;
  std::uint64_t seed = 0;
  std::uint32_t eval_every = 10;       // held-out perplexity + checkpoint cadence
  std::uint32_t kl_warmup_steps = 0;   // 0 = off; else KL weight ramps 0 -> 1
  double clip_norm = 0.0;              // 0 = off
  int eval_samples = 1;
  std::string checkpoint_path;  // empty = no checkpoints

  ModelConfig model_config(std::uint32_t vocab_size) const;
  void validate() const;
};

// Named optimization regimes for the prior/learning-rate grid:
//   high-lr-bn     beta1=0.99 lr=0.002  batch norm on
//   low-lr-no-bn   beta1=0.99 lr=0.0002 batch norm off
//   gaussian-high  as high-lr-bn with a standard Gaussian prior
//   gaussian-low   as low-lr-no-bn with a standard Gaussian prior
TrainConfig preset(std::string_view name);

struct TraceRow {
  std::uint32_t epoch = 0;
  double elbo_per_doc = 0.0;  // train objective seen during the epoch
  double perplexity = 0.0;    // NaN on epochs where it was not evaluated
  double diversity = 0.0;
  double seconds = 0.0;
};

struct TrainTrace {
  std::vector<TraceRow> rows;
  void write(std::ostream& os) const;
  void write_file(const std::string& path) const;
};

struct TrainResult {
  TopicModel model;
  TrainTrace trace;
};

struct TrainingDiverged : Error {
  TrainingDiverged(const std::string& msg, std::string checkpoint)
      : Error(msg), last_checkpoint(std::move(checkpoint)) {}
  std::string last_checkpoint;  // empty when no checkpoint was written
};

// Minibatch optimization of the negative ELBO with per-epoch reshuffling.
// Deterministic for a fixed seed: every random stream is derived from
// (config.seed, purpose label, epoch, step). heldout drives the trace
// perplexity; when null the training corpus is used.
TrainResult train(const Corpus& corpus, const TrainConfig& cfg,
                  const Corpus* heldout = nullptr);

// Continues from a checkpoint; equivalent to the uninterrupted run.
// override_epochs (when nonzero) replaces the checkpointed epoch horizon,
// e.g. to extend training.
TrainResult train_resume(const std::string& checkpoint_path, const Corpus& corpus,
                         const Corpus* heldout = nullptr,
                         std::uint32_t override_epochs = 0);

void save_checkpoint(const std::string& path, TopicModel& model, nn::AdamState& adam,
                     const TrainConfig& cfg, std::uint32_t next_epoch);

// Mean over topic pairs of (1 - |top_n(i) & top_n(j)| / n); 0 when every
// topic ranks the same words on top, 1 when all top lists are disjoint.
double detect_collapse(TopicModel& model, std::size_t top_n = 10);

}  // namespace ntm
