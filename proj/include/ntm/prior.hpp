#pragma once

#include <cstddef>
#include <vector>

#include "ntm/rng.hpp"
#include "ntm/tensor.hpp"

namespace ntm {

struct DirichletPrior {
  std::vector<double> alpha;  // all strictly positive
  static DirichletPrior symmetric(std::size_t k, double a) {
    return DirichletPrior{std::vector<double>(k, a)};
  }
};

// Mean and diagonal covariance of a K-dimensional logistic normal. Used both
// for the approximated prior (mu1, Sigma1) and the variational posterior
// (mu0, Sigma0).
struct LogisticNormalParams {
  std::vector<double> mu;
  std::vector<double> diag_var;  // strictly positive
  std::size_t k() const { return mu.size(); }
  static LogisticNormalParams standard_gaussian(std::size_t k) {
    return LogisticNormalParams{std::vector<double>(k, 0.0), std::vector<double>(k, 1.0)};
  }
};

// Gaussian fit to the Dirichlet density in the softmax basis:
//   mu_k    = log a_k - (1/K) sum_i log a_i
//   var_kk  = (1/a_k)(1 - 2/K) + (1/K^2) sum_i (1/a_i)
// Throws on any a_k <= 0.
LogisticNormalParams laplace_approximation(const DirichletPrior& prior);

// n rows of softmax(mu + sqrt(var) .* eps), eps ~ N(0, I). Rows are strictly
// positive and sum to 1 within 1e-12.
Tensor2 sample_logistic_normal(const LogisticNormalParams& params, Rng& rng, std::size_t n);

// KL(q || p) between diagonal Gaussians, closed form:
//   1/2 sum_k [ v0/v1 + (mu1-mu0)^2/v1 - 1 + log v1 - log v0 ]
double kl_diag_gaussians(const LogisticNormalParams& q, const LogisticNormalParams& p);

}  // namespace ntm
