#include "ntm/kernels.hpp"

#include <cmath>

// Reference kernels. Plain loops, no pragmas: these define the semantics the
// SIMD variants are tested against.

namespace ntm::kern {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double max_scalar(const double* x, std::size_t n) {
  double m = -HUGE_VAL;
  for (std::size_t i = 0; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

void adam_scalar(double* p, const double* g, double* m, double* v, std::size_t n,
                 double beta1, double beta2, double mhat_scale, double vhat_scale,
                 double lr, double eps) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double mhat = m[i] * mhat_scale;
    const double vhat = v[i] * vhat_scale;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

namespace detail {
extern const Ops scalar_table;
const Ops scalar_table = {dot_scalar, axpy_scalar, scale_scalar, mul_scalar,
                          sum_scalar, max_scalar,  adam_scalar};
}

}  // namespace ntm::kern
