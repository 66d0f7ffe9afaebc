#include "ntm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "ntm/error.hpp"
#include "ntm/kernels.hpp"
#include "ntm/neuralnet.hpp"

namespace ntm::eval {

TopWords top_words(const Tensor2& beta_like, const Vocabulary& vocab, std::size_t n) {
  const std::size_t v = beta_like.cols();
  if (v != vocab.size()) throw Error("top_words: matrix width does not match vocabulary");
  if (n > v) throw Error("top_words: n exceeds vocabulary size");
  TopWords out;
  std::vector<std::uint32_t> order(v);
  for (std::size_t t = 0; t < beta_like.rows(); ++t) {
    std::iota(order.begin(), order.end(), 0);
    const double* row = beta_like.row(t);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n),
                      order.end(), [&](std::uint32_t a, std::uint32_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return vocab.token(a) < vocab.token(b);
                      });
    std::vector<std::uint32_t> ids(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<std::string> words;
    words.reserve(n);
    for (auto id : ids) words.push_back(vocab.token(id));
    out.ids.push_back(std::move(ids));
    out.words.push_back(std::move(words));
  }
  return out;
}

double npmi_pair(std::size_t joint_docs, std::size_t docs_i, std::size_t docs_j,
                 std::size_t total_docs) {
  const double d = static_cast<double>(total_docs);
  const double eps = 1.0 / (d + 1.0);
  const double pij = static_cast<double>(joint_docs) / d + eps;
  const double pi = std::max(static_cast<double>(docs_i) / d, eps);
  const double pj = std::max(static_cast<double>(docs_j) / d, eps);
  const double denom = -std::log(pij);
  if (denom <= 0.0) {
    // The smoothed joint reached 1: the pair co-occurs in essentially every
    // document, which is perfect association.
    return pij >= pi * pj ? 1.0 : -1.0;
  }
  const double val = std::log(pij / (pi * pj)) / denom;
  return std::clamp(val, -1.0, 1.0);
}

NpmiResult npmi_coherence(const std::vector<std::vector<std::string>>& topics,
                          const Corpus& reference) {
  if (reference.d() == 0) throw Error("npmi_coherence: empty reference corpus");
  for (const auto& t : topics) {
    if (t.size() < 2) throw Error("npmi_coherence: topic lists need at least 2 words");
  }

  // Distinct tokens across all topic lists, mapped to reference vocab ids.
  std::vector<std::string> distinct;
  std::unordered_map<std::string, std::size_t> pos;
  for (const auto& t : topics) {
    for (const auto& w : t) {
      if (pos.emplace(w, distinct.size()).second) distinct.push_back(w);
    }
  }
  const std::size_t nt = distinct.size();
  std::vector<std::int64_t> vocab_id(nt);
  std::unordered_map<std::uint32_t, std::size_t> by_vocab;
  for (std::size_t i = 0; i < nt; ++i) {
    vocab_id[i] = reference.vocab.id_of(distinct[i]);
    if (vocab_id[i] >= 0) by_vocab.emplace(static_cast<std::uint32_t>(vocab_id[i]), i);
  }

  std::vector<std::size_t> occur(nt, 0);
  std::vector<std::uint32_t> joint(nt * nt, 0);  // upper triangle used
  std::vector<std::size_t> present;
  for (const auto& doc : reference.docs) {
    present.clear();
    for (const auto& [w, c] : doc) {
      auto it = by_vocab.find(w);
      if (it != by_vocab.end()) present.push_back(it->second);
    }
    for (std::size_t a : present) ++occur[a];
    for (std::size_t x = 0; x < present.size(); ++x) {
      for (std::size_t y = x + 1; y < present.size(); ++y) {
        const std::size_t a = std::min(present[x], present[y]);
        const std::size_t b = std::max(present[x], present[y]);
        ++joint[a * nt + b];
      }
    }
  }

  NpmiResult result;
  for (const auto& t : topics) {
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t x = 0; x < t.size(); ++x) {
      for (std::size_t y = x + 1; y < t.size(); ++y) {
        const std::size_t a0 = pos[t[x]], b0 = pos[t[y]];
        const std::size_t a = std::min(a0, b0), b = std::max(a0, b0);
        const std::size_t j = a == b ? occur[a] : joint[a * nt + b];
        acc += npmi_pair(j, occur[a], occur[b], reference.d());
        ++pairs;
      }
    }
    result.per_topic.push_back(acc / static_cast<double>(pairs));
  }
  result.mean = std::accumulate(result.per_topic.begin(), result.per_topic.end(), 0.0) /
                static_cast<double>(result.per_topic.size());
  return result;
}

double perplexity(TopicModel& model, const Corpus& corpus, int samples, std::uint64_t seed) {
  if (corpus.d() == 0) throw Error("perplexity: empty corpus");
  Rng rng(derive_seed(seed, "eval.perplexity"));
  ElboOptions opts;
  opts.mode = nn::Mode::Infer;
  opts.samples = samples;
  double elbo_total = 0.0;
  const std::size_t batch = 256;
  std::vector<std::size_t> ids;
  for (std::size_t lo = 0; lo < corpus.d(); lo += batch) {
    const std::size_t hi = std::min(lo + batch, corpus.d());
    ids.resize(hi - lo);
    std::iota(ids.begin(), ids.end(), lo);
    const Tensor2 x = corpus.dense_batch(ids);
    elbo_total += elbo(model, x, rng, opts).total;
  }
  return std::exp(-elbo_total / static_cast<double>(corpus.total_tokens));
}

SparsityProfile sparsity_profile(const LogisticNormalParams& params, std::size_t samples,
                                 Rng& rng) {
  const Tensor2 theta = sample_logistic_normal(params, rng, samples);
  const std::size_t k = params.k();
  const std::size_t top = std::min<std::size_t>(5, k);
  SparsityProfile out;
  std::vector<double> row(k);
  for (std::size_t i = 0; i < samples; ++i) {
    const double* t = theta.row(i);
    double h = 0.0;
    for (std::size_t j = 0; j < k; ++j) h -= t[j] * std::log(t[j]);
    out.mean_entropy += h;
    std::copy(t, t + k, row.begin());
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(top - 1),
                     row.end(), std::greater<>());
    double mass = 0.0;
    for (std::size_t j = 0; j < top; ++j) mass += row[j];
    out.mean_top5_mass += mass;
  }
  out.mean_entropy /= static_cast<double>(samples);
  out.mean_top5_mass /= static_cast<double>(samples);
  return out;
}

namespace {

// ELBO of a batch as a function of explicit variational parameters (mu, lv),
// decoder and batch norms in inference mode, no dropout. Reconstruction is
// averaged over the given eps draws. When dmu/dlv are supplied they receive
// d(elbo_d)/d(mu_d, lv_d); the network itself stays untouched.
void variational_elbo(TopicModel& model, const Tensor2& bow, const Tensor2& mu,
                      const Tensor2& lv, const std::vector<Tensor2>& eps_samples,
                      std::vector<double>& per_doc, Tensor2* dmu, Tensor2* dlv) {
  const std::size_t b = bow.rows(), k = model.k(), v = model.v();
  const double s_inv = 1.0 / static_cast<double>(eps_samples.size());
  per_doc.assign(b, 0.0);
  if (dmu != nullptr) {
    *dmu = Tensor2(b, k);
    *dlv = Tensor2(b, k);
  }

  // Constant pieces of the inference-mode decoder.
  Tensor2 lda_topics;  // LDA: softmax of the running-stat-normalized beta
  std::vector<double> dec_col_scale(v, 1.0);
  if (model.cfg.decoder == DecoderKind::LdaMixture) {
    lda_topics = nn::softmax_rows(model.cfg.use_batch_norm
                                      ? nn::batchnorm_forward(model.bn_dec, model.beta,
                                                              nn::Mode::Infer)
                                      : model.beta);
  } else if (model.cfg.use_batch_norm) {
    for (std::size_t j = 0; j < v; ++j) {
      dec_col_scale[j] =
          model.bn_dec.gamma[j] / std::sqrt(model.bn_dec.running_var[j] + model.bn_dec.eps);
    }
  }

  Tensor2 sigma(b, k), theta(b, k);
  for (const Tensor2& eps : eps_samples) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      sigma.data()[i] = std::exp(0.5 * lv.data()[i]);
      theta.data()[i] = mu.data()[i] + sigma.data()[i] * eps.data()[i];
    }
    nn::softmax_rows_inplace(theta);

    Tensor2 p;
    if (model.cfg.decoder == DecoderKind::ProdLda) {
      p = Tensor2(b, v);
      matmul_nn(theta, model.beta, p);
      if (model.cfg.use_batch_norm) {
        p = nn::batchnorm_forward(model.bn_dec, p, nn::Mode::Infer);
      }
      nn::softmax_rows_inplace(p);
    } else {
      p = Tensor2(b, v);
      matmul_nn(theta, lda_topics, p);
    }

    for (std::size_t d = 0; d < b; ++d) {
      double r = 0.0;
      const double* x = bow.row(d);
      const double* pd = p.row(d);
      for (std::size_t w = 0; w < v; ++w) {
        if (x[w] != 0.0) r += x[w] * std::log(pd[w]);
      }
      per_doc[d] += s_inv * r;
    }

    if (dmu == nullptr) continue;
    Tensor2 dtheta(b, k);
    if (model.cfg.decoder == DecoderKind::ProdLda) {
      Tensor2 dlogits(b, v);
      for (std::size_t d = 0; d < b; ++d) {
        const double n_d = kern::ops().sum(bow.row(d), v);
        const double* x = bow.row(d);
        const double* pd = p.row(d);
        double* g = dlogits.row(d);
        for (std::size_t w = 0; w < v; ++w) {
          g[w] = s_inv * (x[w] - n_d * pd[w]) * dec_col_scale[w];
        }
      }
      matmul_nt(dlogits, model.beta, dtheta);
    } else {
      Tensor2 ratio(b, v);
      for (std::size_t d = 0; d < b; ++d) {
        const double* x = bow.row(d);
        const double* pd = p.row(d);
        double* r = ratio.row(d);
        for (std::size_t w = 0; w < v; ++w) {
          r[w] = x[w] != 0.0 ? s_inv * x[w] / pd[w] : 0.0;
        }
      }
      matmul_nt(ratio, lda_topics, dtheta);
    }
    const Tensor2 dz = nn::softmax_rows_backward(theta, dtheta);
    for (std::size_t i = 0; i < dz.size(); ++i) {
      dmu->data()[i] += dz.data()[i];
      dlv->data()[i] += dz.data()[i] * eps.data()[i] * 0.5 * sigma.data()[i];
    }
  }

  for (std::size_t d = 0; d < b; ++d) {
    double kl = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double v0 = std::exp(lv(d, j));
      const double v1 = model.prior.diag_var[j];
      const double dm = model.prior.mu[j] - mu(d, j);
      kl += v0 / v1 + dm * dm / v1 - 1.0 + std::log(v1) - lv(d, j);
      if (dmu != nullptr) {
        (*dmu)(d, j) -= (mu(d, j) - model.prior.mu[j]) / v1;
        (*dlv)(d, j) -= 0.5 * (v0 / v1 - 1.0);
      }
    }
    per_doc[d] -= 0.5 * kl;
  }
}

}  // namespace

CompareInferenceResult compare_inference(TopicModel& model, const Corpus& test,
                                         const CompareInferenceOptions& opts) {
  if (test.d() == 0) throw Error("compare_inference: empty corpus");
  CompareInferenceResult result;
  std::vector<std::size_t> ids;
  for (std::size_t lo = 0, batch_idx = 0; lo < test.d(); lo += opts.batch_size, ++batch_idx) {
    const std::size_t hi = std::min(lo + opts.batch_size, test.d());
    ids.resize(hi - lo);
    std::iota(ids.begin(), ids.end(), lo);
    const Tensor2 x = test.dense_batch(ids);
    const std::size_t b = x.rows(), k = model.k();

    EncodeOut enc = encode(model, x, nn::Mode::Infer);
    std::vector<Tensor2> eps;
    Rng rng(derive_seed(opts.seed, "eval.compare", batch_idx));
    for (int s = 0; s < opts.samples; ++s) {
      Tensor2 e(b, k);
      for (std::size_t i = 0; i < e.size(); ++i) e.data()[i] = rng.normal();
      eps.push_back(std::move(e));
    }

    std::vector<double> per_doc;
    variational_elbo(model, x, enc.mu, enc.logvar, eps, per_doc, nullptr, nullptr);
    for (double e : per_doc) result.elbo_network_only += e;

    // Direct optimization of the variational parameters, topics frozen. The
    // eps draws are shared with arm 1, so the starting objective equals the
    // network-only score; each document keeps its best iterate.
    std::vector<double> best = per_doc;
    Tensor2 mu = enc.mu, lv = enc.logvar;
    nn::AdamState adam(opts.lr, 0.9, 0.999);
    adam.attach({mu.flat(), lv.flat()});
    Tensor2 dmu, dlv;
    for (int step = 0; step < opts.steps; ++step) {
      variational_elbo(model, x, mu, lv, eps, per_doc, &dmu, &dlv);
      for (std::size_t d = 0; d < b; ++d) best[d] = std::max(best[d], per_doc[d]);
      // Adam minimizes, so feed the negative ELBO gradient.
      kern::ops().scale(-1.0, dmu.data(), dmu.size());
      kern::ops().scale(-1.0, dlv.data(), dlv.size());
      adam.step({mu.flat(), lv.flat()}, {dmu.flat(), dlv.flat()}, {"mu", "logvar"});
    }
    variational_elbo(model, x, mu, lv, eps, per_doc, nullptr, nullptr);
    for (std::size_t d = 0; d < b; ++d) {
      result.elbo_optimized += std::max(best[d], per_doc[d]);
    }
  }
  const double tokens = static_cast<double>(test.total_tokens);
  result.perplexity_network_only = std::exp(-result.elbo_network_only / tokens);
  result.perplexity_optimized = std::exp(-result.elbo_optimized / tokens);
  return result;
}

void write_report(std::ostream& os, const EvalReport& report) {
  os << std::setprecision(6);
  os << "coherence_npmi_mean: " << report.coherence << "\n";
  os << "perplexity: " << report.perplexity << "\n";
  os << "sparsity_mean_entropy_nats: " << report.mean_entropy << "\n";
  os << "sparsity_mean_top5_mass: " << report.mean_top5_mass << "\n";
  os << "topic_diversity: " << report.diversity << "\n";
  os << "per_topic_npmi:";
  for (double x : report.per_topic_npmi) os << " " << x;
  os << "\n";
  if (!report.top_words.empty()) {
    os << "topics:\n";
    for (std::size_t t = 0; t < report.top_words.size(); ++t) {
      os << "  topic " << std::setw(3) << t << " |";
      for (const auto& w : report.top_words[t]) os << " " << w;
      os << "\n";
    }
  }
}

void write_topic_matrix(const Tensor2& beta, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write topic matrix: " + path);
  os << std::setprecision(17);
  for (std::size_t t = 0; t < beta.rows(); ++t) {
    const double* row = beta.row(t);
    for (std::size_t w = 0; w < beta.cols(); ++w) {
      if (w != 0) os << " ";
      os << row[w];
    }
    os << "\n";
  }
}

Tensor2 read_topic_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open topic matrix: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<double> row;
    double x;
    while (ss >> x) row.push_back(x);
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(path + ": ragged topic matrix at line " + std::to_string(rows.size() + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(path + ": empty topic matrix");
  Tensor2 beta(rows.size(), rows.front().size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    std::copy(rows[t].begin(), rows[t].end(), beta.row(t));
  }
  return beta;
}

}  // namespace ntm::eval
