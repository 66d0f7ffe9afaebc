#include "ntm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "ntm/eval.hpp"
#include "ntm/kernels.hpp"
#include "ntm/serialize.hpp"

namespace ntm {

ModelConfig TrainConfig::model_config(std::uint32_t vocab_size) const {
  ModelConfig mc;
  mc.topics = topics;
  mc.vocab_size = vocab_size;
  mc.hidden1 = hidden1;
  mc.hidden2 = hidden2;
  mc.theta_dropout = dropout;
  mc.decoder = decoder;
  mc.prior_kind = prior;
  mc.prior_alpha = prior_alpha;
  mc.use_batch_norm = use_batch_norm;
  return mc;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw Error("train config: learning rate must be > 0");
  if (use_batch_norm && batch_size < 2) {
    throw Error("train config: batch size must be >= 2 when batch norm is enabled");
  }
  if (batch_size < 1) throw Error("train config: batch size must be >= 1");
  if (epochs < 1) throw Error("train config: epochs must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw Error("train config: adam betas must be in [0, 1)");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw Error("train config: dropout must be in [0, 1)");
}

TrainConfig preset(std::string_view name) {
  TrainConfig cfg;
  if (name == "high-lr-bn") {
    cfg.adam_beta1 = 0.99;
    cfg.lr = 0.002;
    cfg.use_batch_norm = true;
  } else if (name == "low-lr-no-bn") {
    cfg.adam_beta1 = 0.99;
    cfg.lr = 0.0002;
    cfg.use_batch_norm = false;
  } else if (name == "gaussian-high") {
    cfg.adam_beta1 = 0.99;
    cfg.lr = 0.002;
    cfg.use_batch_norm = true;
    cfg.prior = PriorKind::Gaussian;
  } else if (name == "gaussian-low") {
    cfg.adam_beta1 = 0.99;
    cfg.lr = 0.0002;
    cfg.use_batch_norm = false;
    cfg.prior = PriorKind::Gaussian;
  } else {
    throw Error("unknown preset: " + std::string(name));
  }
  return cfg;
}

void TrainTrace::write(std::ostream& os) const {
  for (const auto& r : rows) {
    os << "epoch=" << r.epoch << " elbo_per_doc=" << r.elbo_per_doc
       << " perplexity=" << r.perplexity << " diversity=" << r.diversity
       << " seconds=" << r.seconds << "\n";
  }
}

void TrainTrace::write_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw Error("cannot write trace: " + path);
  write(os);
}

double detect_collapse(TopicModel& model, std::size_t top_n) {
  const Tensor2 topics = topic_distributions(model);
  const std::size_t k = topics.rows();
  const std::size_t n = std::min(top_n, topics.cols());
  std::vector<std::vector<std::uint32_t>> tops(k);
  std::vector<std::uint32_t> order(topics.cols());
  for (std::size_t t = 0; t < k; ++t) {
    std::iota(order.begin(), order.end(), 0);
    const double* row = topics.row(t);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;
                      });
    tops[t].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(tops[t].begin(), tops[t].end());
  }
  double acc = 0.0;
  std::size_t pairs = 0;
  std::vector<std::uint32_t> inter;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      inter.clear();
      std::set_intersection(tops[i].begin(), tops[i].end(), tops[j].begin(), tops[j].end(),
                            std::back_inserter(inter));
      acc += 1.0 - static_cast<double>(inter.size()) / static_cast<double>(n);
      ++pairs;
    }
  }
  return pairs == 0 ? 1.0 : acc / static_cast<double>(pairs);
}

// ---- checkpoints -----------------------------------------------------------

namespace {

constexpr char kCkptMagic[9] = "NTMCKPT1";

void write_config(std::ostream& os, const TrainConfig& cfg) {
  io::write_u64(os, cfg.topics);
  io::write_u64(os, cfg.hidden1);
  io::write_u64(os, cfg.hidden2);
  io::write_u64(os, cfg.epochs);
  io::write_u64(os, cfg.batch_size);
  io::write_f64(os, cfg.lr);
  io::write_f64(os, cfg.adam_beta1);
  io::write_f64(os, cfg.adam_beta2);
  io::write_u64(os, cfg.use_batch_norm ? 1 : 0);
  io::write_f64(os, cfg.dropout);
  io::write_u64(os, static_cast<std::uint64_t>(cfg.prior));
  io::write_f64(os, cfg.prior_alpha);
  io::write_u64(os, static_cast<std::uint64_t>(cfg.decoder));
  io::write_u64(os, cfg.seed);
  io::write_u64(os, cfg.eval_every);
  io::write_u64(os, cfg.kl_warmup_steps);
  io::write_f64(os, cfg.clip_norm);
  io::write_u64(os, static_cast<std::uint64_t>(cfg.eval_samples));
}

TrainConfig read_config(std::istream& is) {
  TrainConfig cfg;
  cfg.topics = static_cast<std::uint32_t>(io::read_u64(is));
  cfg.hidden1 = static_cast<std::uint32_t>(io::read_u64(is));
  cfg.hidden2 = static_cast<std::uint32_t>(io::read_u64(is));
  cfg.epochs = static_cast<std::uint32_t>(io::read_u64(is));
  cfg.batch_size = static_cast<std::uint32_t>(io::read_u64(is));
  cfg.lr = io::read_f64(is);
  cfg.adam_beta1 = io::read_f64(is);
  cfg.adam_beta2 = io::read_f64(is);
  cfg.use_batch_norm = io::read_u64(is) != 0;
  cfg.dropout = io::read_f64(is);
  cfg.prior = static_cast<PriorKind>(io::read_u64(is));
  cfg.prior_alpha = io::read_f64(is);
  cfg.decoder = static_cast<DecoderKind>(io::read_u64(is));
  cfg.seed = io::read_u64(is);
  cfg.eval_every = static_cast<std::uint32_t>(io::read_u64(is));
  cfg.kl_warmup_steps = static_cast<std::uint32_t>(io::read_u64(is));
  cfg.clip_norm = io::read_f64(is);
  cfg.eval_samples = static_cast<int>(io::read_u64(is));
  return cfg;
}

}  // namespace

void save_checkpoint(const std::string& path, TopicModel& model, nn::AdamState& adam,
                     const TrainConfig& cfg, std::uint32_t next_epoch) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write checkpoint: " + path);
  io::write_tag(os, kCkptMagic);
  io::write_u64(os, next_epoch);
  write_config(os, cfg);
  save_model_to(model, os);
  io::write_u64(os, static_cast<std::uint64_t>(adam.t()));
  io::write_u64(os, adam.moments1().size());
  for (const auto& m : adam.moments1()) {
    io::write_u64(os, m.size());
    io::write_f64_block(os, m);
  }
  for (const auto& v : adam.moments2()) {
    io::write_u64(os, v.size());
    io::write_f64_block(os, v);
  }
  if (!os) throw Error("short write while saving checkpoint " + path);
}

namespace {

struct CheckpointData {
  std::uint32_t next_epoch = 0;
  TrainConfig cfg;
  TopicModel model;
  nn::AdamState adam;
};

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint: " + path);
  io::expect_tag(is, kCkptMagic, path);
  CheckpointData data;
  data.next_epoch = static_cast<std::uint32_t>(io::read_u64(is));
  data.cfg = read_config(is);
  data.model = load_model_from(is);
  data.adam = nn::AdamState(data.cfg.lr, data.cfg.adam_beta1, data.cfg.adam_beta2);
  const auto t = static_cast<std::int64_t>(io::read_u64(is));
  const std::uint64_t blocks = io::read_u64(is);
  auto read_blocks = [&](std::vector<std::vector<double>>& dst) {
    dst.resize(blocks);
    for (auto& blk : dst) {
      blk.resize(io::read_u64(is));
      io::read_f64_block(is, blk);
    }
  };
  read_blocks(data.adam.moments1());
  read_blocks(data.adam.moments2());
  data.adam.set_t(t);
  return data;
}

TrainResult train_loop(const Corpus& corpus, const TrainConfig& cfg, TopicModel model,
                       nn::AdamState adam, std::uint32_t start_epoch, const Corpus* heldout) {
  if (corpus.d() == 0) throw Error("train: empty corpus");
  const Corpus& eval_corpus = heldout != nullptr ? *heldout : corpus;

  TrainResult result{std::move(model), {}};
  std::vector<std::span<double>> params;
  std::vector<std::string> names;
  for (auto& blk : result.model.param_blocks()) {
    params.push_back(blk.data);
    names.push_back(blk.name);
  }
  if (!adam.attached()) adam.attach(params);

  ModelGrads grads;
  grads.init_like(result.model);

  std::string last_checkpoint;
  std::vector<std::size_t> order(corpus.d());
  std::iota(order.begin(), order.end(), 0);

  for (std::uint32_t epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    // The epoch order is a pure function of (seed, epoch) so a resumed run
    // sees exactly the batches the uninterrupted one would.
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(cfg.seed, "trainer.shuffle", epoch));
    shuffle_rng.shuffle(order);

    // Batch boundaries; a trailing single document is folded into the
    // previous batch so batch norm always sees >= 2 rows.
    std::vector<std::pair<std::size_t, std::size_t>> batches;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      batches.emplace_back(lo, std::min(lo + cfg.batch_size, order.size()));
    }
    if (batches.size() >= 2 && batches.back().second - batches.back().first == 1) {
      batches[batches.size() - 2].second = batches.back().second;
      batches.pop_back();
    }

    double epoch_elbo = 0.0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const auto [lo, hi] = batches[bi];
      const std::vector<std::size_t> ids(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                         order.begin() + static_cast<std::ptrdiff_t>(hi));
      const Tensor2 x = corpus.dense_batch(ids);
      Rng noise(derive_seed(cfg.seed, "trainer.noise", epoch, bi));
      Tensor2 eps(x.rows(), result.model.k());
      for (std::size_t i = 0; i < eps.size(); ++i) eps.data()[i] = noise.normal();

      const std::uint64_t step = adam.t();
      const double klw = cfg.kl_warmup_steps == 0
                             ? 1.0
                             : std::min(1.0, static_cast<double>(step + 1) /
                                                 static_cast<double>(cfg.kl_warmup_steps));
      try {
        ElboResult res;
        if (cfg.dropout > 0.0) {
          Tensor2 mask(x.rows(), result.model.k());
          {
            const double keep = 1.0 / (1.0 - cfg.dropout);
            for (std::size_t r = 0; r < mask.rows(); ++r) {
              bool any = false;
              for (std::size_t c = 0; c < mask.cols(); ++c) {
                const bool kept = noise.uniform() >= cfg.dropout;
                any = any || kept;
                mask(r, c) = kept ? keep : 0.0;
              }
              if (!any) {
                for (std::size_t c = 0; c < mask.cols(); ++c) mask(r, c) = keep;
              }
            }
          }
          res = elbo_with_grad(result.model, x, eps, &mask, nn::Mode::Train, klw, true, grads);
        } else {
          res = elbo_with_grad(result.model, x, eps, nullptr, nn::Mode::Train, klw, true, grads);
        }
        epoch_elbo += res.recon - res.kl;

        if (cfg.clip_norm > 0.0) {
          double sq = 0.0;
          for (const auto& g : grads.g) sq += kern::ops().dot(g.data(), g.data(), g.size());
          const double norm = std::sqrt(sq);
          if (norm > cfg.clip_norm) {
            const double s = cfg.clip_norm / norm;
            for (auto& g : grads.g) kern::ops().scale(s, g.data(), g.size());
          }
        }
        adam.step(params, grads.spans(), names);
      } catch (const Error& e) {
        throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) +
                                   " step " + std::to_string(bi) + ": " + e.what() +
                                   (last_checkpoint.empty()
                                        ? " (no checkpoint written)"
                                        : " (last good checkpoint: " + last_checkpoint + ")"),
                               last_checkpoint);
      }
    }

    TraceRow row;
    row.epoch = epoch;
    row.elbo_per_doc = epoch_elbo / static_cast<double>(corpus.d());
    row.diversity = detect_collapse(result.model);
    const bool eval_now =
        (cfg.eval_every != 0 && (epoch + 1) % cfg.eval_every == 0) || epoch + 1 == cfg.epochs;
    row.perplexity = eval_now ? eval::perplexity(result.model, eval_corpus, cfg.eval_samples,
                                                 derive_seed(cfg.seed, "trainer.eval", epoch))
                              : std::nan("");
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.trace.rows.push_back(row);

    if (!cfg.checkpoint_path.empty() && eval_now) {
      save_checkpoint(cfg.checkpoint_path, result.model, adam, cfg, epoch + 1);
      last_checkpoint = cfg.checkpoint_path;
    }
  }
  return result;
}

}  // namespace

TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const Corpus* heldout) {
  cfg.validate();
  TopicModel model = make_model(cfg.model_config(static_cast<std::uint32_t>(corpus.v())),
                                derive_seed(cfg.seed, "trainer.init"));
  nn::AdamState adam(cfg.lr, cfg.adam_beta1, cfg.adam_beta2);
  return train_loop(corpus, cfg, std::move(model), std::move(adam), 0, heldout);
}

TrainResult train_resume(const std::string& checkpoint_path, const Corpus& corpus,
                         const Corpus* heldout, std::uint32_t override_epochs) {
  CheckpointData data = load_checkpoint(checkpoint_path);
  if (data.model.v() != corpus.v()) {
    throw Error("train_resume: corpus vocabulary does not match the checkpointed model");
  }
  if (override_epochs != 0) data.cfg.epochs = override_epochs;
  return train_loop(corpus, data.cfg, std::move(data.model), std::move(data.adam),
                    data.next_epoch, heldout);
}

}  // namespace ntm
