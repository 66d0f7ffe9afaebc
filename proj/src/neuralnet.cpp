#include "ntm/neuralnet.hpp"

#include <cassert>
#include <cmath>

#include "ntm/error.hpp"
#include "ntm/kernels.hpp"

namespace ntm::nn {

Tensor2 affine_forward(const Affine& layer, const Tensor2& x) {
  if (x.cols() != layer.in()) {
    throw Error("affine_forward: input width " + std::to_string(x.cols()) +
                " does not match layer in=" + std::to_string(layer.in()));
  }
  Tensor2 y(x.rows(), layer.out());
  matmul_nt(x, layer.W, y);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double* yi = y.row(i);
    for (std::size_t j = 0; j < y.cols(); ++j) yi[j] += layer.b[j];
  }
  return y;
}

void affine_param_grads(const Affine& layer, const Tensor2& x, const Tensor2& dy,
                        AffineGrads& grads) {
  if (dy.rows() != x.rows() || dy.cols() != layer.out()) {
    throw Error("affine_backward: gradient shape mismatch");
  }
  grads.dW = Tensor2(layer.out(), layer.in());
  grads.db.assign(layer.out(), 0.0);
  matmul_tn_acc(dy, x, grads.dW);
  for (std::size_t i = 0; i < dy.rows(); ++i) {
    const double* di = dy.row(i);
    for (std::size_t j = 0; j < dy.cols(); ++j) grads.db[j] += di[j];
  }
}

Tensor2 affine_backward(const Affine& layer, const Tensor2& x, const Tensor2& dy,
                        AffineGrads& grads) {
  affine_param_grads(layer, x, dy, grads);
  Tensor2 dx(x.rows(), x.cols());
  matmul_nn(dy, layer.W, dx);
  return dx;
}

namespace {
inline double softplus1(double x) {
  // Stable branches: for large x, log(1+e^x) = x + log1p(e^-x).
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}
inline double sigmoid1(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Tensor2 softplus(const Tensor2& x) {
  Tensor2 y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = softplus1(x.data()[i]);
  return y;
}

Tensor2 softplus_backward(const Tensor2& a, const Tensor2& dh) {
  assert(a.same_shape(dh));
  Tensor2 da(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    da.data()[i] = dh.data()[i] * sigmoid1(a.data()[i]);
  }
  return da;
}

void softmax_rows_inplace(Tensor2& x) {
  const auto& k = kern::ops();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double* r = x.row(i);
    const double m = k.max(r, x.cols());
    double total = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      r[j] = std::exp(r[j] - m);
      total += r[j];
    }
    k.scale(1.0 / total, r, x.cols());
  }
}

Tensor2 softmax_rows(const Tensor2& x) {
  Tensor2 y = x;
  softmax_rows_inplace(y);
  return y;
}

Tensor2 softmax_rows_backward(const Tensor2& t, const Tensor2& dt) {
  assert(t.same_shape(dt));
  const auto& k = kern::ops();
  Tensor2 dz(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const double* ti = t.row(i);
    const double* di = dt.row(i);
    double* zi = dz.row(i);
    const double inner = k.dot(ti, di, t.cols());
    for (std::size_t j = 0; j < t.cols(); ++j) zi[j] = ti[j] * (di[j] - inner);
  }
  return dz;
}

Tensor2 batchnorm_forward(BatchNorm& layer, const Tensor2& x, Mode mode,
                          BatchNormCache* cache, bool update_running) {
  const std::size_t b = x.rows(), f = x.cols();
  if (f != layer.features()) throw Error("batchnorm_forward: feature width mismatch");
  Tensor2 y(b, f);
  if (mode == Mode::Infer) {
    std::vector<double> scale(f), offset(f);
    for (std::size_t j = 0; j < f; ++j) {
      scale[j] = layer.gamma[j] / std::sqrt(layer.running_var[j] + layer.eps);
      offset[j] = layer.shift[j] - layer.running_mean[j] * scale[j];
    }
    for (std::size_t i = 0; i < b; ++i) {
      const double* xi = x.row(i);
      double* yi = y.row(i);
      for (std::size_t j = 0; j < f; ++j) yi[j] = scale[j] * xi[j] + offset[j];
    }
    return y;
  }
  if (b < 2) throw Error("batchnorm_forward: train mode requires batch >= 2");
  std::vector<double> mean(f, 0.0), var(f, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < f; ++j) mean[j] += xi[j];
  }
  for (std::size_t j = 0; j < f; ++j) mean[j] /= static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      const double d = xi[j] - mean[j];
      var[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < f; ++j) var[j] /= static_cast<double>(b);

  if (cache != nullptr) {
    cache->xhat = Tensor2(b, f);
    cache->inv_std.assign(f, 0.0);
  }
  std::vector<double> istd(f);
  for (std::size_t j = 0; j < f; ++j) {
    istd[j] = 1.0 / std::sqrt(var[j] + layer.eps);
    if (cache != nullptr) cache->inv_std[j] = istd[j];
  }
  for (std::size_t i = 0; i < b; ++i) {
    const double* xi = x.row(i);
    double* yi = y.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      const double xh = (xi[j] - mean[j]) * istd[j];
      if (cache != nullptr) cache->xhat(i, j) = xh;
      yi[j] = layer.gamma[j] * xh + layer.shift[j];
    }
  }
  if (update_running) {
    for (std::size_t j = 0; j < f; ++j) {
      layer.running_mean[j] = layer.momentum * layer.running_mean[j] + (1.0 - layer.momentum) * mean[j];
      layer.running_var[j] = layer.momentum * layer.running_var[j] + (1.0 - layer.momentum) * var[j];
    }
  }
  return y;
}

Tensor2 batchnorm_backward(const BatchNorm& layer, const BatchNormCache& cache,
                           const Tensor2& dy, std::vector<double>& dgamma,
                           std::vector<double>& dshift) {
  const std::size_t b = dy.rows(), f = dy.cols();
  assert(cache.xhat.rows() == b && cache.xhat.cols() == f);
  dgamma.assign(f, 0.0);
  dshift.assign(f, 0.0);
  std::vector<double> sum_dxhat(f, 0.0), sum_dxhat_xhat(f, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    const double* di = dy.row(i);
    const double* xhi = cache.xhat.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      dgamma[j] += di[j] * xhi[j];
      dshift[j] += di[j];
      const double dxhat = di[j] * layer.gamma[j];
      sum_dxhat[j] += dxhat;
      sum_dxhat_xhat[j] += dxhat * xhi[j];
    }
  }
  Tensor2 dx(b, f);
  const double binv = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double* di = dy.row(i);
    const double* xhi = cache.xhat.row(i);
    double* dxi = dx.row(i);
    for (std::size_t j = 0; j < f; ++j) {
      const double dxhat = di[j] * layer.gamma[j];
      dxi[j] = cache.inv_std[j] * binv *
               (static_cast<double>(b) * dxhat - sum_dxhat[j] - xhi[j] * sum_dxhat_xhat[j]);
    }
  }
  return dx;
}

Tensor2 dropout(const Tensor2& x, double rate, Rng& rng, Mode mode, Tensor2* mask_out) {
  if (rate < 0.0 || rate >= 1.0) throw Error("dropout: rate must be in [0, 1)");
  if (mode == Mode::Infer || rate == 0.0) {
    if (mask_out != nullptr) *mask_out = Tensor2(x.rows(), x.cols(), 1.0);
    return x;
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor2 y(x.rows(), x.cols());
  if (mask_out != nullptr) *mask_out = Tensor2(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = rng.uniform() < rate ? 0.0 : keep_scale;
    y.data()[i] = x.data()[i] * m;
    if (mask_out != nullptr) mask_out->data()[i] = m;
  }
  return y;
}

void AdamState::attach(const std::vector<std::span<double>>& blocks) {
  m_.clear();
  v_.clear();
  for (const auto& blk : blocks) {
    m_.emplace_back(blk.size(), 0.0);
    v_.emplace_back(blk.size(), 0.0);
  }
  t_ = 0;
}

void AdamState::step(const std::vector<std::span<double>>& params,
                     const std::vector<std::span<const double>>& grads,
                     const std::vector<std::string>& names) {
  if (params.size() != grads.size() || params.size() != m_.size()) {
    throw Error("adam: block count mismatch (attach() first)");
  }
  ++t_;
  const double mhat_scale = 1.0 / (1.0 - std::pow(beta1_, static_cast<double>(t_)));
  const double vhat_scale = 1.0 / (1.0 - std::pow(beta2_, static_cast<double>(t_)));
  const auto& k = kern::ops();
  for (std::size_t bidx = 0; bidx < params.size(); ++bidx) {
    const auto g = grads[bidx];
    for (double gv : g) {
      if (!std::isfinite(gv)) {
        throw Error("adam: non-finite gradient in block '" +
                    (bidx < names.size() ? names[bidx] : std::to_string(bidx)) + "'");
      }
    }
    if (g.size() != params[bidx].size() || g.size() != m_[bidx].size()) {
      throw Error("adam: size mismatch in block '" +
                  (bidx < names.size() ? names[bidx] : std::to_string(bidx)) + "'");
    }
    k.adam(params[bidx].data(), g.data(), m_[bidx].data(), v_[bidx].data(), g.size(),
           beta1_, beta2_, mhat_scale, vhat_scale, lr_, eps_);
  }
}

GradCheckResult gradient_check(const LossGradFn& f, std::vector<double> params, double h) {
  std::vector<double> analytic(params.size(), 0.0);
  f(params, analytic);
  GradCheckResult result;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = f(params, {});
    params[i] = saved - h;
    const double dn = f(params, {});
    params[i] = saved;
    const double numeric = (up - dn) / (2.0 * h);
    const double denom = std::abs(analytic[i]) + std::abs(numeric);
    // Central differences carry ~eps*|loss|/h of rounding noise, so below
    // 1e-5 the ratio would measure that noise, not the gradient; such
    // coordinates are compared absolutely instead.
    const double err = denom >= 1e-5 ? std::abs(analytic[i] - numeric) / denom
                                     : std::abs(analytic[i] - numeric);
    if (err > result.max_error) {
      result.max_error = err;
      result.worst_index = i;
      result.analytic = analytic[i];
      result.numeric = numeric;
    }
  }
  return result;
}

}  // namespace ntm::nn
