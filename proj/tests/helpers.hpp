#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ntm/rng.hpp"
#include "ntm/tensor.hpp"

namespace test {

inline ntm::Tensor2 random_tensor(ntm::Rng& rng, std::size_t rows, std::size_t cols,
                                  double lo = -1.0, double hi = 1.0) {
  ntm::Tensor2 t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.data()[i] = lo + (hi - lo) * rng.uniform();
  }
  return t;
}

inline std::vector<double> random_vector(ntm::Rng& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

inline double cosine(const double* a, const double* b, std::size_t n) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

// Greedy one-to-one assignment of learned topics to true topics by cosine;
// returns, per true topic, the cosine of its match, plus the permutation.
struct TopicMatch {
  std::vector<double> cosines;        // indexed by true topic
  std::vector<std::size_t> learned;   // true topic -> learned topic
};

inline TopicMatch match_topics(const ntm::Tensor2& learned, const ntm::Tensor2& truth) {
  const std::size_t k = truth.rows();
  TopicMatch match;
  match.cosines.assign(k, 0.0);
  match.learned.assign(k, 0);
  std::vector<bool> used_l(learned.rows(), false), used_t(k, false);
  for (std::size_t round = 0; round < k; ++round) {
    double best = -2.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t t = 0; t < k; ++t) {
      if (used_t[t]) continue;
      for (std::size_t l = 0; l < learned.rows(); ++l) {
        if (used_l[l]) continue;
        const double c = cosine(learned.row(l), truth.row(t), truth.cols());
        if (c > best) {
          best = c;
          bi = l;
          bj = t;
        }
      }
    }
    used_l[bi] = true;
    used_t[bj] = true;
    match.cosines[bj] = best;
    match.learned[bj] = bi;
  }
  return match;
}

// Reference matmuls for the kernel equivalence tests.
inline ntm::Tensor2 naive_nt(const ntm::Tensor2& a, const ntm::Tensor2& b) {
  ntm::Tensor2 c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) acc += a(i, t) * b(j, t);
      c(i, j) = acc;
    }
  }
  return c;
}

inline ntm::Tensor2 naive_nn(const ntm::Tensor2& a, const ntm::Tensor2& b) {
  ntm::Tensor2 c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) acc += a(i, t) * b(t, j);
      c(i, j) = acc;
    }
  }
  return c;
}

}  // namespace test
