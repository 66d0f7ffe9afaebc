#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ntm/rng.hpp"
#include "ntm/tensor.hpp"

// Minimal dense kernel with hand-derived backward passes. There is no
// autodiff graph: the architecture is small and fixed, and every backward is
// checked against central finite differences.

namespace ntm::nn {

enum class Mode { Train, Infer };

struct Affine {
  Tensor2 W;              // out x in
  std::vector<double> b;  // out
  Affine() = default;
  Affine(std::size_t out, std::size_t in) : W(out, in), b(out, 0.0) {}
  std::size_t in() const { return W.cols(); }
  std::size_t out() const { return W.rows(); }
};

struct AffineGrads {
  Tensor2 dW;
  std::vector<double> db;
};

// Y = X W^T + b, X is batch x in.
Tensor2 affine_forward(const Affine& layer, const Tensor2& x);
// Returns dX; accumulates nothing (grads are overwritten).
Tensor2 affine_backward(const Affine& layer, const Tensor2& x, const Tensor2& dy,
                        AffineGrads& grads);
// Weight/bias gradients only, for the input layer where dX is never used.
void affine_param_grads(const Affine& layer, const Tensor2& x, const Tensor2& dy,
                        AffineGrads& grads);

Tensor2 softplus(const Tensor2& x);
// dA for H = softplus(A): dA = dH .* sigmoid(A)
Tensor2 softplus_backward(const Tensor2& a, const Tensor2& dh);

// Row-stochastic softmax with max subtraction; rows sum to 1 within 1e-12.
void softmax_rows_inplace(Tensor2& x);
Tensor2 softmax_rows(const Tensor2& x);
// dZ for T = softmax(Z) applied row-wise: dZ = T .* (dT - rowsum(dT .* T)).
Tensor2 softmax_rows_backward(const Tensor2& t, const Tensor2& dt);

struct BatchNorm {
  std::vector<double> gamma, shift;
  std::vector<double> running_mean, running_var;
  double momentum = 0.99;
  double eps = 1e-5;
  BatchNorm() = default;
  explicit BatchNorm(std::size_t features, double momentum_ = 0.99, double eps_ = 1e-5)
      : gamma(features, 1.0),
        shift(features, 0.0),
        running_mean(features, 0.0),
        running_var(features, 1.0),
        momentum(momentum_),
        eps(eps_) {}
  std::size_t features() const { return gamma.size(); }
};

struct BatchNormCache {
  Tensor2 xhat;
  std::vector<double> inv_std;
};

// Train mode normalizes by batch statistics (biased variance, 1/B) and, when
// update_running is set, folds them into the running averages. Infer mode
// uses the running statistics. Train mode requires batch >= 2.
Tensor2 batchnorm_forward(BatchNorm& layer, const Tensor2& x, Mode mode,
                          BatchNormCache* cache = nullptr, bool update_running = true);
// Returns dX.
Tensor2 batchnorm_backward(const BatchNorm& layer, const BatchNormCache& cache,
                           const Tensor2& dy, std::vector<double>& dgamma,
                           std::vector<double>& dshift);

// Inverted dropout: train mode zeroes entries with probability rate and
// scales survivors by 1/(1-rate); infer mode is the identity. If mask_out is
// given it receives the applied multiplier per entry.
Tensor2 dropout(const Tensor2& x, double rate, Rng& rng, Mode mode,
                Tensor2* mask_out = nullptr);

// Adam with bias correction over named parameter blocks. Each block keeps its
// own moments; t advances once per step() regardless of block count.
class AdamState {
 public:
  AdamState() = default;
  AdamState(double lr, double beta1, double beta2, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void attach(const std::vector<std::span<double>>& blocks);
  bool attached() const { return !m_.empty(); }

  // Throws ntm::Error naming the offending block on a non-finite gradient.
  void step(const std::vector<std::span<double>>& params,
            const std::vector<std::span<const double>>& grads,
            const std::vector<std::string>& names);

  std::int64_t t() const { return t_; }
  double lr() const { return lr_; }

  // Raw state access for checkpointing.
  std::vector<std::vector<double>>& moments1() { return m_; }
  std::vector<std::vector<double>>& moments2() { return v_; }
  void set_t(std::int64_t t) { t_ = t; }

 private:
  double lr_ = 0.001, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// f evaluates the loss at params; when grad_out is non-empty it must also
// write the analytic gradient. Central differences with step h are compared
// per coordinate; error is |a-n|/(|a|+|n|), or the absolute difference when
// the combined magnitude sits below the finite-difference noise floor.
struct GradCheckResult {
  double max_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0, numeric = 0.0;
};

using LossGradFn =
    std::function<double(std::span<const double> params, std::span<double> grad_out)>;

GradCheckResult gradient_check(const LossGradFn& f, std::vector<double> params, double h);

}  // namespace ntm::nn
