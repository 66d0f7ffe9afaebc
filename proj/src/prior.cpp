#include "ntm/prior.hpp"

#include <cmath>
#include <string>

#include "ntm/error.hpp"
#include "ntm/neuralnet.hpp"

namespace ntm {

LogisticNormalParams laplace_approximation(const DirichletPrior& prior) {
  const std::size_t k = prior.alpha.size();
  if (k < 1) throw Error("laplace_approximation: empty alpha");
  double inv_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double a = prior.alpha[i];
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw Error("laplace_approximation: alpha[" + std::to_string(i) + "] must be > 0");
    }
    inv_sum += 1.0 / a;
  }
  const double kd = static_cast<double>(k);
  LogisticNormalParams out;
  out.mu.resize(k);
  out.diag_var.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    // Centered form of log a_i - mean(log a): identical components cancel
    // exactly instead of accumulating rounding from the shared mean.
    const double li = std::log(prior.alpha[i]);
    double centered = 0.0;
    for (std::size_t j = 0; j < k; ++j) centered += std::log(prior.alpha[j]) - li;
    out.mu[i] = -centered / kd;
    out.diag_var[i] = (1.0 / prior.alpha[i]) * (1.0 - 2.0 / kd) + inv_sum / (kd * kd);
  }
  return out;
}

Tensor2 sample_logistic_normal(const LogisticNormalParams& params, Rng& rng, std::size_t n) {
  const std::size_t k = params.k();
  Tensor2 samples(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = samples.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = params.mu[j] + std::sqrt(params.diag_var[j]) * rng.normal();
    }
  }
  nn::softmax_rows_inplace(samples);
  return samples;
}

double kl_diag_gaussians(const LogisticNormalParams& q, const LogisticNormalParams& p) {
  if (q.k() != p.k()) throw Error("kl_diag_gaussians: dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < q.k(); ++i) {
    const double v0 = q.diag_var[i], v1 = p.diag_var[i];
    const double dmu = p.mu[i] - q.mu[i];
    total += v0 / v1 + dmu * dmu / v1 - 1.0 + std::log(v1) - std::log(v0);
  }
  return 0.5 * total;
}

}  // namespace ntm
