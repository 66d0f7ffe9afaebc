#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ntm/corpus.hpp"
#include "ntm/neuralnet.hpp"
#include "ntm/prior.hpp"
#include "ntm/rng.hpp"
#include "ntm/tensor.hpp"

namespace ntm {

// The LDA decoder mixes row-softmaxed topics on the simplex; ProdLDA mixes
// the unnormalized logits and softmaxes the result (a weighted product of
// experts). Everything else - encoder, sampler, KL - is shared.
enum class DecoderKind : std::uint32_t { LdaMixture = 0, ProdLda = 1 };
enum class PriorKind : std::uint32_t { Dirichlet = 0, Gaussian = 1 };

const char* to_string(DecoderKind k);
const char* to_string(PriorKind k);
DecoderKind decoder_from_string(const std::string& s);
PriorKind prior_from_string(const std::string& s);

struct ModelConfig {
  std::uint32_t topics = 50;
  std::uint32_t vocab_size = 0;
  std::uint32_t hidden1 = 100;
  std::uint32_t hidden2 = 100;
  double theta_dropout = 0.2;
  DecoderKind decoder = DecoderKind::ProdLda;
  PriorKind prior_kind = PriorKind::Dirichlet;
  double prior_alpha = 0.02;
  bool use_batch_norm = true;
  double bn_momentum = 0.99;
  double bn_eps = 1e-5;
};

// Inference network: two softplus layers shared by a mu head and a
// log-variance head, each head followed by batch norm.
struct EncoderNet {
  nn::Affine fc1, fc2, head_mu, head_logvar;
  nn::BatchNorm bn_mu, bn_logvar;
};

struct TopicModel {
  ModelConfig cfg;
  EncoderNet enc;
  Tensor2 beta;  // K x V, unnormalized
  // Over the V decoder logits: normalizes mixed logits (ProdLDA) or the
  // topic rows of beta (LDA mixture) in train mode.
  nn::BatchNorm bn_dec;
  LogisticNormalParams prior;

  std::size_t k() const { return cfg.topics; }
  std::size_t v() const { return cfg.vocab_size; }

  struct Block {
    std::string name;
    std::span<double> data;
  };
  // Trainable parameters in declared (= serialized) order.
  std::vector<Block> param_blocks();
  // Non-trainable state (batch-norm running stats, prior), serialized after
  // the parameter blocks.
  std::vector<Block> state_blocks();
};

TopicModel make_model(const ModelConfig& cfg, std::uint64_t seed);

// ---- forward/backward ----------------------------------------------------

struct EncodeOut {
  Tensor2 mu;      // batch x K
  Tensor2 logvar;  // batch x K
};

// Rows of bow are raw counts. Train mode uses batch statistics in the head
// batch norms (and updates running stats when update_running is set).
EncodeOut encode(TopicModel& model, const Tensor2& bow, nn::Mode mode,
                 bool update_running = false);

// theta = softmax(mu + exp(logvar/2) .* eps); in train mode a dropout mask
// is applied to theta followed by renormalization onto the simplex.
Tensor2 sample_theta(const Tensor2& mu, const Tensor2& logvar, const Tensor2& eps,
                     double dropout_rate, nn::Mode mode, Rng* rng);

// Per-word distribution (batch x V); rows sum to 1.
Tensor2 decode(TopicModel& model, const Tensor2& theta, nn::Mode mode,
               bool update_running = false);

// Effective per-topic word distributions: decode of one-hot topic weights in
// inference mode (K x V). This is what listings, coherence and recovery
// metrics consume.
Tensor2 topic_distributions(TopicModel& model);

struct ElboOptions {
  nn::Mode mode = nn::Mode::Train;
  int samples = 1;          // Monte Carlo samples for the reconstruction term
  double kl_weight = 1.0;   // warm-up support; 1 = Eq. objective
  bool update_running = true;
};

struct ElboResult {
  double total = 0.0;  // sum over the batch
  std::vector<double> per_doc;
  double kl = 0.0;     // summed KL term
  double recon = 0.0;  // summed reconstruction term
};

// Draws eps (and the dropout mask in train mode) from `noise`.
ElboResult elbo(TopicModel& model, const Tensor2& bow, Rng& noise,
                const ElboOptions& opts);

// Gradient container mirroring param_blocks() order.
struct ModelGrads {
  std::vector<std::vector<double>> g;
  void init_like(TopicModel& model);
  void zero();
  std::vector<std::span<const double>> spans() const;
};

// Single-sample ELBO with gradients of the scalar loss
//   L = -(1/batch) * sum_d elbo_d
// with eps and the dropout mask supplied by the caller (mask may be null for
// no dropout). update_running=false keeps the call side-effect free, which
// the finite-difference checks rely on.
ElboResult elbo_with_grad(TopicModel& model, const Tensor2& bow, const Tensor2& eps,
                          const Tensor2* drop_mask, nn::Mode mode, double kl_weight,
                          bool update_running, ModelGrads& grads);

// Mean path: softmax(mu) in inference mode, deterministic.
Tensor2 infer_theta(TopicModel& model, const Tensor2& bow);
std::vector<double> infer_theta(TopicModel& model, const Document& doc);

// ---- serialization ---------------------------------------------------------

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Versioned flat binary (64-bit little-endian floats) plus a textual manifest
// of the block layout at <path>.manifest.txt.
void save_model(TopicModel& model, const std::string& path);
TopicModel load_model(const std::string& path);

// Stream forms, used by checkpoints.
void save_model_to(TopicModel& model, std::ostream& os);
TopicModel load_model_from(std::istream& is);

}  // namespace ntm
