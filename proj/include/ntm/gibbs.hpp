#pragma once

#include <cstdint>
#include <vector>

#include "ntm/corpus.hpp"
#include "ntm/rng.hpp"
#include "ntm/tensor.hpp"

// Collapsed Gibbs sampling for standard LDA; the comparison baseline. The
// sampler works on expanded token streams, so z is one topic per token
// occurrence and the count tables are exact marginals of z at all times.

namespace ntm::gibbs {

struct State {
  std::uint32_t k = 0, v = 0;
  double alpha = 0.02;  // doc-topic smoothing
  double eta = 0.01;    // topic-word smoothing
  std::vector<std::vector<std::uint32_t>> tokens;  // word id per token, per doc
  std::vector<std::vector<std::uint32_t>> z;       // aligned topic assignments
  std::vector<std::uint32_t> n_dk;                 // D x K
  std::vector<std::uint32_t> n_kw;                 // K x V
  std::vector<std::uint32_t> n_k;                  // K
  Rng rng{0};

  std::uint32_t& ndk(std::size_t d, std::size_t t) { return n_dk[d * k + t]; }
  std::uint32_t& nkw(std::size_t t, std::size_t w) { return n_kw[t * v + w]; }
  std::uint32_t ndk(std::size_t d, std::size_t t) const { return n_dk[d * k + t]; }
  std::uint32_t nkw(std::size_t t, std::size_t w) const { return n_kw[t * v + w]; }
};

State init(const Corpus& corpus, std::uint32_t k, double alpha, double eta,
           std::uint64_t seed);

// p(z = t | everything else) for the token at (doc, pos), excluding that
// token's own counts:
//   p(t) ~ (n_kw~ + eta) / (n_k~ + V eta) * (n_dk~ + alpha)
std::vector<double> conditional(const State& state, std::size_t doc, std::size_t pos);

// One full pass resampling every token, tables updated incrementally.
void sweep(State& state);

// True when every count table equals the marginal recomputed from z.
bool audit(const State& state);

struct Estimate {
  Tensor2 beta;   // K x V, rows sum to 1
  Tensor2 theta;  // D x K, rows sum to 1
};

// Posterior-mean smoothing averaged over retained samples: after `burnin`
// sweeps, repeats `samples` times (thinning sweeps, then record
// beta_kw ~ n_kw + eta and theta_dk ~ n_dk + alpha, normalized).
Estimate estimate(State& state, std::uint32_t burnin, std::uint32_t samples,
                  std::uint32_t thinning);

}  // namespace ntm::gibbs
