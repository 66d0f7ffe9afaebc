#include "ntm/model.hpp"

#include <cassert>
#include <cmath>
#include <fstream>

#include "ntm/error.hpp"
#include "ntm/kernels.hpp"
#include "ntm/serialize.hpp"

namespace ntm {

const char* to_string(DecoderKind k) {
  return k == DecoderKind::ProdLda ? "prodlda" : "lda";
}
const char* to_string(PriorKind k) {
  return k == PriorKind::Gaussian ? "gaussian" : "dirichlet";
}
DecoderKind decoder_from_string(const std::string& s) {
  if (s == "lda") return DecoderKind::LdaMixture;
  if (s == "prodlda") return DecoderKind::ProdLda;
  throw Error("unknown decoder kind: " + s);
}
PriorKind prior_from_string(const std::string& s) {
  if (s == "dirichlet") return PriorKind::Dirichlet;
  if (s == "gaussian") return PriorKind::Gaussian;
  throw Error("unknown prior kind: " + s);
}

std::vector<TopicModel::Block> TopicModel::param_blocks() {
  return {
      {"enc.fc1.W", enc.fc1.W.flat()},
      {"enc.fc1.b", enc.fc1.b},
      {"enc.fc2.W", enc.fc2.W.flat()},
      {"enc.fc2.b", enc.fc2.b},
      {"enc.mu.W", enc.head_mu.W.flat()},
      {"enc.mu.b", enc.head_mu.b},
      {"enc.bn_mu.gamma", enc.bn_mu.gamma},
      {"enc.bn_mu.shift", enc.bn_mu.shift},
      {"enc.logvar.W", enc.head_logvar.W.flat()},
      {"enc.logvar.b", enc.head_logvar.b},
      {"enc.bn_logvar.gamma", enc.bn_logvar.gamma},
      {"enc.bn_logvar.shift", enc.bn_logvar.shift},
      {"dec.beta", beta.flat()},
      {"dec.bn.gamma", bn_dec.gamma},
      {"dec.bn.shift", bn_dec.shift},
  };
}

std::vector<TopicModel::Block> TopicModel::state_blocks() {
  return {
      {"enc.bn_mu.running_mean", enc.bn_mu.running_mean},
      {"enc.bn_mu.running_var", enc.bn_mu.running_var},
      {"enc.bn_logvar.running_mean", enc.bn_logvar.running_mean},
      {"enc.bn_logvar.running_var", enc.bn_logvar.running_var},
      {"dec.bn.running_mean", bn_dec.running_mean},
      {"dec.bn.running_var", bn_dec.running_var},
      {"prior.mu", prior.mu},
      {"prior.diag_var", prior.diag_var},
  };
}

namespace {

void xavier_init(Tensor2& w, Rng& rng) {
  const double s = std::sqrt(2.0 / static_cast<double>(w.rows() + w.cols()));
  for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = s * rng.normal();
}

}  // namespace

TopicModel make_model(const ModelConfig& cfg, std::uint64_t seed) {
  if (cfg.vocab_size < 2) throw Error("make_model: vocab_size must be >= 2");
  if (cfg.topics < 2) throw Error("make_model: topics must be >= 2");
  TopicModel m;
  m.cfg = cfg;
  m.enc.fc1 = nn::Affine(cfg.hidden1, cfg.vocab_size);
  m.enc.fc2 = nn::Affine(cfg.hidden2, cfg.hidden1);
  m.enc.head_mu = nn::Affine(cfg.topics, cfg.hidden2);
  m.enc.head_logvar = nn::Affine(cfg.topics, cfg.hidden2);
  m.enc.bn_mu = nn::BatchNorm(cfg.topics, cfg.bn_momentum, cfg.bn_eps);
  m.enc.bn_logvar = nn::BatchNorm(cfg.topics, cfg.bn_momentum, cfg.bn_eps);
  m.beta = Tensor2(cfg.topics, cfg.vocab_size);
  m.bn_dec = nn::BatchNorm(cfg.vocab_size, cfg.bn_momentum, cfg.bn_eps);

  Rng rng(derive_seed(seed, "model.init"));
  xavier_init(m.enc.fc1.W, rng);
  xavier_init(m.enc.fc2.W, rng);
  xavier_init(m.enc.head_mu.W, rng);
  xavier_init(m.enc.head_logvar.W, rng);
  // Near-flat topics at the start; structure comes from training.
  for (std::size_t i = 0; i < m.beta.size(); ++i) m.beta.data()[i] = 0.02 * rng.normal();

  m.prior = cfg.prior_kind == PriorKind::Gaussian
                ? LogisticNormalParams::standard_gaussian(cfg.topics)
                : laplace_approximation(DirichletPrior::symmetric(cfg.topics, cfg.prior_alpha));
  return m;
}

// ---- forward pieces --------------------------------------------------------

namespace {

struct Forward {
  Tensor2 a1, h1, a2, h2, mu_raw, lv_raw;
  nn::BatchNormCache bn_mu, bn_lv;
  Tensor2 mu, logvar;
  Tensor2 sigma;
  Tensor2 theta0;  // softmax(mu + sigma.*eps) before dropout
  Tensor2 theta;
  Tensor2 mask;    // effective dropout multipliers actually applied
  std::vector<double> drop_rowsum;
  Tensor2 dec_logits;  // ProdLDA: theta*beta before batch norm
  nn::BatchNormCache bn_dec;
  Tensor2 topics;  // LDA: row-softmaxed (normalized) beta
  Tensor2 p;       // batch x V word distributions
};

void encode_forward(TopicModel& m, const Tensor2& x, nn::Mode mode, bool update_running,
                    Forward& f) {
  f.a1 = nn::affine_forward(m.enc.fc1, x);
  f.h1 = nn::softplus(f.a1);
  f.a2 = nn::affine_forward(m.enc.fc2, f.h1);
  f.h2 = nn::softplus(f.a2);
  f.mu_raw = nn::affine_forward(m.enc.head_mu, f.h2);
  f.lv_raw = nn::affine_forward(m.enc.head_logvar, f.h2);
  if (m.cfg.use_batch_norm) {
    f.mu = nn::batchnorm_forward(m.enc.bn_mu, f.mu_raw, mode, &f.bn_mu, update_running);
    f.logvar = nn::batchnorm_forward(m.enc.bn_logvar, f.lv_raw, mode, &f.bn_lv, update_running);
  } else {
    f.mu = f.mu_raw;
    f.logvar = f.lv_raw;
  }
}

// mask entries are the applied multipliers (0 or 1/(1-rate)); null = no dropout.
void sample_forward(const Tensor2& mu, const Tensor2& logvar, const Tensor2& eps,
                    const Tensor2* mask, Forward& f) {
  const std::size_t b = mu.rows(), k = mu.cols();
  assert(eps.rows() == b && eps.cols() == k);
  f.sigma = Tensor2(b, k);
  f.theta0 = Tensor2(b, k);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    f.sigma.data()[i] = std::exp(0.5 * logvar.data()[i]);
    f.theta0.data()[i] = mu.data()[i] + f.sigma.data()[i] * eps.data()[i];
  }
  nn::softmax_rows_inplace(f.theta0);
  if (mask == nullptr) {
    f.theta = f.theta0;
    return;
  }
  f.theta = Tensor2(b, k);
  f.mask = *mask;
  f.drop_rowsum.assign(b, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) total += f.theta0(i, j) * f.mask(i, j);
    if (total <= 0.0) {
      // The mask wiped out all the mass theta0 had (its other components
      // underflowed to exact zeros). Pass the row through unchanged.
      for (std::size_t j = 0; j < k; ++j) f.mask(i, j) = 1.0;
      total = 1.0;
    }
    f.drop_rowsum[i] = total;
    for (std::size_t j = 0; j < k; ++j) {
      f.theta(i, j) = f.theta0(i, j) * f.mask(i, j) / total;
    }
  }
}

void decode_forward(TopicModel& m, const Tensor2& theta, nn::Mode mode, bool update_running,
                    Forward& f) {
  const std::size_t b = theta.rows();
  if (m.cfg.decoder == DecoderKind::ProdLda) {
    f.dec_logits = Tensor2(b, m.v());
    matmul_nn(theta, m.beta, f.dec_logits);
    if (m.cfg.use_batch_norm) {
      f.p = nn::batchnorm_forward(m.bn_dec, f.dec_logits, mode, &f.bn_dec, update_running);
    } else {
      f.p = f.dec_logits;
    }
    nn::softmax_rows_inplace(f.p);
  } else {
    // The topic rows themselves go through batch norm (K acts as the batch).
    Tensor2 beta_n = m.cfg.use_batch_norm
                         ? nn::batchnorm_forward(m.bn_dec, m.beta, mode, &f.bn_dec, update_running)
                         : m.beta;
    nn::softmax_rows_inplace(beta_n);
    f.topics = std::move(beta_n);
    f.p = Tensor2(b, m.v());
    matmul_nn(theta, f.topics, f.p);
  }
}

double kl_row(const double* mu, const double* lv, const LogisticNormalParams& prior,
              std::size_t k) {
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double v0 = std::exp(lv[j]);
    const double v1 = prior.diag_var[j];
    const double dmu = prior.mu[j] - mu[j];
    total += v0 / v1 + dmu * dmu / v1 - 1.0 + std::log(v1) - lv[j];
  }
  return 0.5 * total;
}

double recon_row(const double* x, const double* p, std::size_t v) {
  double total = 0.0;
  for (std::size_t j = 0; j < v; ++j) {
    if (x[j] != 0.0) total += x[j] * std::log(p[j]);
  }
  return total;
}

Tensor2 draw_normal(Rng& rng, std::size_t rows, std::size_t cols) {
  Tensor2 t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.normal();
  return t;
}

// Zero-dropout rows are re-kept wholesale so theta stays on the simplex.
Tensor2 draw_mask(Rng& rng, std::size_t rows, std::size_t cols, double rate) {
  const double keep = 1.0 / (1.0 - rate);
  Tensor2 mask(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < cols; ++j) {
      const bool kept = rng.uniform() >= rate;
      any = any || kept;
      mask(i, j) = kept ? keep : 0.0;
    }
    if (!any) {
      for (std::size_t j = 0; j < cols; ++j) mask(i, j) = keep;
    }
  }
  return mask;
}

}  // namespace

EncodeOut encode(TopicModel& model, const Tensor2& bow, nn::Mode mode, bool update_running) {
  Forward f;
  encode_forward(model, bow, mode, update_running, f);
  return {std::move(f.mu), std::move(f.logvar)};
}

Tensor2 sample_theta(const Tensor2& mu, const Tensor2& logvar, const Tensor2& eps,
                     double dropout_rate, nn::Mode mode, Rng* rng) {
  Forward f;
  if (mode == nn::Mode::Train && dropout_rate > 0.0) {
    if (rng == nullptr) throw Error("sample_theta: dropout in train mode needs an rng");
    const Tensor2 mask = draw_mask(*rng, mu.rows(), mu.cols(), dropout_rate);
    sample_forward(mu, logvar, eps, &mask, f);
  } else {
    sample_forward(mu, logvar, eps, nullptr, f);
  }
  return std::move(f.theta);
}

Tensor2 decode(TopicModel& model, const Tensor2& theta, nn::Mode mode, bool update_running) {
  Forward f;
  decode_forward(model, theta, mode, update_running, f);
  return std::move(f.p);
}

Tensor2 topic_distributions(TopicModel& model) {
  Tensor2 onehot(model.k(), model.k());
  for (std::size_t i = 0; i < model.k(); ++i) onehot(i, i) = 1.0;
  return decode(model, onehot, nn::Mode::Infer);
}

ElboResult elbo(TopicModel& model, const Tensor2& bow, Rng& noise, const ElboOptions& opts) {
  if (bow.cols() != model.v()) throw Error("elbo: bow width does not match vocabulary");
  const std::size_t b = bow.rows();
  const int samples = opts.samples < 1 ? 1 : opts.samples;

  Forward f;
  encode_forward(model, bow, opts.mode, opts.mode == nn::Mode::Train && opts.update_running, f);

  ElboResult result;
  result.per_doc.assign(b, 0.0);
  std::vector<double> kl(b), recon(b, 0.0);
  for (std::size_t d = 0; d < b; ++d) {
    kl[d] = kl_row(f.mu.row(d), f.logvar.row(d), model.prior, model.k());
    if (!std::isfinite(kl[d])) {
      throw Error("elbo: non-finite KL term for document " + std::to_string(d));
    }
  }

  for (int s = 0; s < samples; ++s) {
    const Tensor2 eps = draw_normal(noise, b, model.k());
    Tensor2 mask;
    const bool use_mask = opts.mode == nn::Mode::Train && model.cfg.theta_dropout > 0.0;
    if (use_mask) mask = draw_mask(noise, b, model.k(), model.cfg.theta_dropout);
    sample_forward(f.mu, f.logvar, eps, use_mask ? &mask : nullptr, f);
    decode_forward(model, f.theta, opts.mode, opts.mode == nn::Mode::Train && opts.update_running, f);
    for (std::size_t d = 0; d < b; ++d) {
      const double r = recon_row(bow.row(d), f.p.row(d), model.v());
      if (!std::isfinite(r)) {
        throw Error("elbo: non-finite reconstruction term for document " + std::to_string(d));
      }
      recon[d] += r;
    }
  }

  for (std::size_t d = 0; d < b; ++d) {
    recon[d] /= static_cast<double>(samples);
    result.per_doc[d] = recon[d] - opts.kl_weight * kl[d];
    result.total += result.per_doc[d];
    result.kl += kl[d];
    result.recon += recon[d];
  }
  return result;
}

void ModelGrads::init_like(TopicModel& model) {
  g.clear();
  for (const auto& blk : model.param_blocks()) g.emplace_back(blk.data.size(), 0.0);
}

void ModelGrads::zero() {
  for (auto& blk : g) std::fill(blk.begin(), blk.end(), 0.0);
}

std::vector<std::span<const double>> ModelGrads::spans() const {
  std::vector<std::span<const double>> out;
  out.reserve(g.size());
  for (const auto& blk : g) out.emplace_back(blk);
  return out;
}

namespace {

enum BlockIdx {
  kFc1W = 0, kFc1B, kFc2W, kFc2B, kMuW, kMuB, kBnMuGamma, kBnMuShift,
  kLvW, kLvB, kBnLvGamma, kBnLvShift, kBeta, kBnDecGamma, kBnDecShift,
  kBlockCount
};

void add_scaled(std::vector<double>& dst, std::span<const double> src, double scale) {
  assert(dst.size() == src.size());
  kern::ops().axpy(scale, src.data(), dst.data(), src.size());
}

}  // namespace

ElboResult elbo_with_grad(TopicModel& model, const Tensor2& bow, const Tensor2& eps,
                          const Tensor2* drop_mask, nn::Mode mode, double kl_weight,
                          bool update_running, ModelGrads& grads) {
  const std::size_t b = bow.rows(), k = model.k(), v = model.v();
  if (grads.g.size() != static_cast<std::size_t>(kBlockCount)) grads.init_like(model);
  grads.zero();

  Forward f;
  encode_forward(model, bow, mode, mode == nn::Mode::Train && update_running, f);
  sample_forward(f.mu, f.logvar, eps, drop_mask, f);
  decode_forward(model, f.theta, mode, mode == nn::Mode::Train && update_running, f);

  ElboResult result;
  result.per_doc.assign(b, 0.0);
  for (std::size_t d = 0; d < b; ++d) {
    const double kl = kl_row(f.mu.row(d), f.logvar.row(d), model.prior, k);
    const double recon = recon_row(bow.row(d), f.p.row(d), v);
    if (!std::isfinite(kl)) throw Error("elbo: non-finite KL term for document " + std::to_string(d));
    if (!std::isfinite(recon)) {
      throw Error("elbo: non-finite reconstruction term for document " + std::to_string(d));
    }
    result.per_doc[d] = recon - kl_weight * kl;
    result.total += result.per_doc[d];
    result.kl += kl;
    result.recon += recon;
  }

  // Everything below accumulates d(elbo_total)/d(param); the final loss scale
  // -1/b is applied when writing into the block gradients.
  Tensor2 dmu(b, k), dlv(b, k);
  for (std::size_t d = 0; d < b; ++d) {
    for (std::size_t j = 0; j < k; ++j) {
      const double v1 = model.prior.diag_var[j];
      dmu(d, j) = -kl_weight * (f.mu(d, j) - model.prior.mu[j]) / v1;
      dlv(d, j) = -kl_weight * 0.5 * (std::exp(f.logvar(d, j)) / v1 - 1.0);
    }
  }

  Tensor2 dtheta(b, k);
  Tensor2 dbeta(k, v);
  std::vector<double> dgamma_dec, dshift_dec;
  if (model.cfg.decoder == DecoderKind::ProdLda) {
    Tensor2 dlogits(b, v);
    for (std::size_t d = 0; d < b; ++d) {
      const double n_d = kern::ops().sum(bow.row(d), v);
      const double* x = bow.row(d);
      const double* p = f.p.row(d);
      double* g = dlogits.row(d);
      for (std::size_t w = 0; w < v; ++w) g[w] = x[w] - n_d * p[w];
    }
    Tensor2 dg = model.cfg.use_batch_norm
                     ? nn::batchnorm_backward(model.bn_dec, f.bn_dec, dlogits, dgamma_dec, dshift_dec)
                     : std::move(dlogits);
    matmul_nt(dg, model.beta, dtheta);
    matmul_tn_acc(f.theta, dg, dbeta);
  } else {
    Tensor2 ratio(b, v);
    for (std::size_t d = 0; d < b; ++d) {
      const double* x = bow.row(d);
      const double* p = f.p.row(d);
      double* r = ratio.row(d);
      for (std::size_t w = 0; w < v; ++w) r[w] = x[w] != 0.0 ? x[w] / p[w] : 0.0;
    }
    matmul_nt(ratio, f.topics, dtheta);
    Tensor2 dtopics(k, v);
    matmul_tn_acc(f.theta, ratio, dtopics);
    Tensor2 dbeta_n = nn::softmax_rows_backward(f.topics, dtopics);
    dbeta = model.cfg.use_batch_norm
                ? nn::batchnorm_backward(model.bn_dec, f.bn_dec, dbeta_n, dgamma_dec, dshift_dec)
                : std::move(dbeta_n);
  }

  Tensor2 dtheta0(b, k);
  if (drop_mask != nullptr) {
    for (std::size_t d = 0; d < b; ++d) {
      double inner = 0.0;
      for (std::size_t j = 0; j < k; ++j) inner += dtheta(d, j) * f.theta(d, j);
      const double t = f.drop_rowsum[d];
      for (std::size_t j = 0; j < k; ++j) {
        dtheta0(d, j) = (dtheta(d, j) - inner) / t * f.mask(d, j);
      }
    }
  } else {
    dtheta0 = dtheta;
  }
  const Tensor2 dz = nn::softmax_rows_backward(f.theta0, dtheta0);
  for (std::size_t i = 0; i < dz.size(); ++i) {
    dmu.data()[i] += dz.data()[i];
    dlv.data()[i] += dz.data()[i] * eps.data()[i] * 0.5 * f.sigma.data()[i];
  }

  std::vector<double> dgamma_mu, dshift_mu, dgamma_lv, dshift_lv;
  Tensor2 dmu_raw = model.cfg.use_batch_norm
                        ? nn::batchnorm_backward(model.enc.bn_mu, f.bn_mu, dmu, dgamma_mu, dshift_mu)
                        : std::move(dmu);
  Tensor2 dlv_raw =
      model.cfg.use_batch_norm
          ? nn::batchnorm_backward(model.enc.bn_logvar, f.bn_lv, dlv, dgamma_lv, dshift_lv)
          : std::move(dlv);

  nn::AffineGrads g_mu, g_lv, g_fc2, g_fc1;
  Tensor2 dh2 = nn::affine_backward(model.enc.head_mu, f.h2, dmu_raw, g_mu);
  {
    const Tensor2 dh2b = nn::affine_backward(model.enc.head_logvar, f.h2, dlv_raw, g_lv);
    for (std::size_t i = 0; i < dh2.size(); ++i) dh2.data()[i] += dh2b.data()[i];
  }
  const Tensor2 da2 = nn::softplus_backward(f.a2, dh2);
  const Tensor2 dh1 = nn::affine_backward(model.enc.fc2, f.h1, da2, g_fc2);
  const Tensor2 da1 = nn::softplus_backward(f.a1, dh1);
  nn::affine_param_grads(model.enc.fc1, bow, da1, g_fc1);

  const double scale = -1.0 / static_cast<double>(b);
  add_scaled(grads.g[kFc1W], g_fc1.dW.flat(), scale);
  add_scaled(grads.g[kFc1B], g_fc1.db, scale);
  add_scaled(grads.g[kFc2W], g_fc2.dW.flat(), scale);
  add_scaled(grads.g[kFc2B], g_fc2.db, scale);
  add_scaled(grads.g[kMuW], g_mu.dW.flat(), scale);
  add_scaled(grads.g[kMuB], g_mu.db, scale);
  add_scaled(grads.g[kLvW], g_lv.dW.flat(), scale);
  add_scaled(grads.g[kLvB], g_lv.db, scale);
  add_scaled(grads.g[kBeta], dbeta.flat(), scale);
  if (model.cfg.use_batch_norm) {
    add_scaled(grads.g[kBnMuGamma], dgamma_mu, scale);
    add_scaled(grads.g[kBnMuShift], dshift_mu, scale);
    add_scaled(grads.g[kBnLvGamma], dgamma_lv, scale);
    add_scaled(grads.g[kBnLvShift], dshift_lv, scale);
    add_scaled(grads.g[kBnDecGamma], dgamma_dec, scale);
    add_scaled(grads.g[kBnDecShift], dshift_dec, scale);
  }
  return result;
}

Tensor2 infer_theta(TopicModel& model, const Tensor2& bow) {
  Forward f;
  encode_forward(model, bow, nn::Mode::Infer, false, f);
  nn::softmax_rows_inplace(f.mu);
  return std::move(f.mu);
}

std::vector<double> infer_theta(TopicModel& model, const Document& doc) {
  Tensor2 bow(1, model.v());
  for (const auto& [w, c] : doc) bow(0, w) = static_cast<double>(c);
  const Tensor2 theta = infer_theta(model, bow);
  return {theta.row(0), theta.row(0) + theta.cols()};
}

// ---- serialization ---------------------------------------------------------

namespace {
constexpr char kModelMagic[9] = "NTMTOPIC";
}

void save_model_to(TopicModel& model, std::ostream& os) {
  io::write_tag(os, kModelMagic);
  io::write_u64(os, kModelFormatVersion);
  io::write_u64(os, model.cfg.topics);
  io::write_u64(os, model.cfg.vocab_size);
  io::write_u64(os, model.cfg.hidden1);
  io::write_u64(os, model.cfg.hidden2);
  io::write_f64(os, model.cfg.theta_dropout);
  io::write_u64(os, static_cast<std::uint64_t>(model.cfg.decoder));
  io::write_u64(os, static_cast<std::uint64_t>(model.cfg.prior_kind));
  io::write_f64(os, model.cfg.prior_alpha);
  io::write_u64(os, model.cfg.use_batch_norm ? 1 : 0);
  io::write_f64(os, model.cfg.bn_momentum);
  io::write_f64(os, model.cfg.bn_eps);
  for (const auto& blk : model.param_blocks()) io::write_f64_block(os, blk.data);
  for (const auto& blk : model.state_blocks()) io::write_f64_block(os, blk.data);
}

TopicModel load_model_from(std::istream& is) {
  io::expect_tag(is, kModelMagic, "model stream");
  const std::uint64_t version = io::read_u64(is);
  if (version != kModelFormatVersion) {
    throw Error("unsupported model format version " + std::to_string(version));
  }
  ModelConfig cfg;
  cfg.topics = static_cast<std::uint32_t>(io::read_u64(is));
  cfg.vocab_size = static_cast<std::uint32_t>(io::read_u64(is));
  cfg.hidden1 = static_cast<std::uint32_t>(io::read_u64(is));
  cfg.hidden2 = static_cast<std::uint32_t>(io::read_u64(is));
  cfg.theta_dropout = io::read_f64(is);
  cfg.decoder = static_cast<DecoderKind>(io::read_u64(is));
  cfg.prior_kind = static_cast<PriorKind>(io::read_u64(is));
  cfg.prior_alpha = io::read_f64(is);
  cfg.use_batch_norm = io::read_u64(is) != 0;
  cfg.bn_momentum = io::read_f64(is);
  cfg.bn_eps = io::read_f64(is);

  TopicModel model = make_model(cfg, 0);
  for (auto& blk : model.param_blocks()) io::read_f64_block(is, blk.data);
  for (auto& blk : model.state_blocks()) io::read_f64_block(is, blk.data);
  return model;
}

void save_model(TopicModel& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write model file: " + path);
  save_model_to(model, os);
  if (!os) throw Error("short write while saving model to " + path);

  std::ofstream manifest(path + ".manifest.txt");
  if (!manifest) throw Error("cannot write model manifest for " + path);
  manifest << "format: ntm-topic-model\n";
  manifest << "version: " << kModelFormatVersion << "\n";
  manifest << "topics: " << model.cfg.topics << "\n";
  manifest << "vocab_size: " << model.cfg.vocab_size << "\n";
  manifest << "hidden: " << model.cfg.hidden1 << " " << model.cfg.hidden2 << "\n";
  manifest << "decoder: " << to_string(model.cfg.decoder) << "\n";
  manifest << "prior: " << to_string(model.cfg.prior_kind) << "\n";
  manifest << "prior_alpha: " << model.cfg.prior_alpha << "\n";
  manifest << "theta_dropout: " << model.cfg.theta_dropout << "\n";
  manifest << "batch_norm: " << (model.cfg.use_batch_norm ? "on" : "off") << "\n";
  manifest << "blocks:\n";
  for (const auto& blk : model.param_blocks()) {
    manifest << "  " << blk.name << " count=" << blk.data.size() << "\n";
  }
  for (const auto& blk : model.state_blocks()) {
    manifest << "  " << blk.name << " count=" << blk.data.size() << " (state)\n";
  }
}

TopicModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open model file: " + path);
  return load_model_from(is);
}

}  // namespace ntm
