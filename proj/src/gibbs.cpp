#include "ntm/gibbs.hpp"

#include <cstring>

#include "ntm/error.hpp"

namespace ntm::gibbs {

State init(const Corpus& corpus, std::uint32_t k, double alpha, double eta,
           std::uint64_t seed) {
  if (k < 2) throw Error("gibbs: K must be >= 2");
  if (!(alpha > 0.0) || !(eta > 0.0)) throw Error("gibbs: alpha and eta must be > 0");
  State s;
  s.k = k;
  s.v = static_cast<std::uint32_t>(corpus.v());
  s.alpha = alpha;
  s.eta = eta;
  s.rng = Rng(derive_seed(seed, "gibbs.chain"));
  s.tokens.resize(corpus.d());
  s.z.resize(corpus.d());
  s.n_dk.assign(corpus.d() * k, 0);
  s.n_kw.assign(static_cast<std::size_t>(k) * s.v, 0);
  s.n_k.assign(k, 0);
  for (std::size_t d = 0; d < corpus.d(); ++d) {
    for (const auto& [w, c] : corpus.docs[d]) {
      for (std::uint32_t i = 0; i < c; ++i) s.tokens[d].push_back(w);
    }
    s.z[d].resize(s.tokens[d].size());
    for (std::size_t pos = 0; pos < s.tokens[d].size(); ++pos) {
      const auto t = static_cast<std::uint32_t>(s.rng.uniform_int(k));
      s.z[d][pos] = t;
      ++s.ndk(d, t);
      ++s.nkw(t, s.tokens[d][pos]);
      ++s.n_k[t];
    }
  }
  return s;
}

std::vector<double> conditional(const State& state, std::size_t doc, std::size_t pos) {
  const std::uint32_t w = state.tokens[doc][pos];
  const std::uint32_t cur = state.z[doc][pos];
  const double veta = static_cast<double>(state.v) * state.eta;
  std::vector<double> p(state.k);
  double total = 0.0;
  for (std::uint32_t t = 0; t < state.k; ++t) {
    const double excl = t == cur ? 1.0 : 0.0;
    const double nkw = static_cast<double>(state.nkw(t, w)) - excl;
    const double nk = static_cast<double>(state.n_k[t]) - excl;
    const double ndk = static_cast<double>(state.ndk(doc, t)) - excl;
    p[t] = (nkw + state.eta) / (nk + veta) * (ndk + state.alpha);
    total += p[t];
  }
  for (double& x : p) x /= total;
  return p;
}

void sweep(State& state) {
  const double veta = static_cast<double>(state.v) * state.eta;
  std::vector<double> weights(state.k);
  for (std::size_t d = 0; d < state.tokens.size(); ++d) {
    for (std::size_t pos = 0; pos < state.tokens[d].size(); ++pos) {
      const std::uint32_t w = state.tokens[d][pos];
      const std::uint32_t old = state.z[d][pos];
      --state.ndk(d, old);
      --state.nkw(old, w);
      --state.n_k[old];
      for (std::uint32_t t = 0; t < state.k; ++t) {
        weights[t] = (static_cast<double>(state.nkw(t, w)) + state.eta) /
                     (static_cast<double>(state.n_k[t]) + veta) *
                     (static_cast<double>(state.ndk(d, t)) + state.alpha);
      }
      const auto next = static_cast<std::uint32_t>(state.rng.categorical(weights));
      state.z[d][pos] = next;
      ++state.ndk(d, next);
      ++state.nkw(next, w);
      ++state.n_k[next];
    }
  }
}

bool audit(const State& state) {
  std::vector<std::uint32_t> ndk(state.n_dk.size(), 0), nkw(state.n_kw.size(), 0),
      nk(state.n_k.size(), 0);
  for (std::size_t d = 0; d < state.tokens.size(); ++d) {
    if (state.z[d].size() != state.tokens[d].size()) return false;
    for (std::size_t pos = 0; pos < state.tokens[d].size(); ++pos) {
      const std::uint32_t t = state.z[d][pos];
      if (t >= state.k) return false;
      ++ndk[d * state.k + t];
      ++nkw[static_cast<std::size_t>(t) * state.v + state.tokens[d][pos]];
      ++nk[t];
    }
  }
  return ndk == state.n_dk && nkw == state.n_kw && nk == state.n_k;
}

Estimate estimate(State& state, std::uint32_t burnin, std::uint32_t samples,
                  std::uint32_t thinning) {
  if (samples < 1) throw Error("gibbs::estimate: samples must be >= 1");
  if (thinning < 1) throw Error("gibbs::estimate: thinning must be >= 1");
  for (std::uint32_t i = 0; i < burnin; ++i) sweep(state);

  const std::size_t d = state.tokens.size();
  Estimate est{Tensor2(state.k, state.v), Tensor2(d, state.k)};
  const double veta = static_cast<double>(state.v) * state.eta;
  const double kalpha = static_cast<double>(state.k) * state.alpha;
  for (std::uint32_t s = 0; s < samples; ++s) {
    for (std::uint32_t i = 0; i < thinning; ++i) sweep(state);
    for (std::uint32_t t = 0; t < state.k; ++t) {
      const double denom = static_cast<double>(state.n_k[t]) + veta;
      for (std::uint32_t w = 0; w < state.v; ++w) {
        est.beta(t, w) += (static_cast<double>(state.nkw(t, w)) + state.eta) / denom;
      }
    }
    for (std::size_t di = 0; di < d; ++di) {
      const double denom = static_cast<double>(state.tokens[di].size()) + kalpha;
      for (std::uint32_t t = 0; t < state.k; ++t) {
        est.theta(di, t) += (static_cast<double>(state.ndk(di, t)) + state.alpha) / denom;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(samples);
  for (std::size_t i = 0; i < est.beta.size(); ++i) est.beta.data()[i] *= inv;
  for (std::size_t i = 0; i < est.theta.size(); ++i) est.theta.data()[i] *= inv;
  return est;
}

}  // namespace ntm::gibbs
