#pragma once

#include <cstddef>
#include <string_view>

namespace ntm::kern {

// Contiguous double-precision vector kernels. Every entry has a scalar
// reference implementation and (on x86-64) an AVX2+FMA variant; both must
// agree to rounding. The active table is chosen once at startup from CPUID
// and can be forced with set_backend() or the NTM_KERNELS environment
// variable ("scalar" or "avx2").
struct Ops {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // x *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
  // out = a .* b
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*max)(const double* x, std::size_t n);
  // One fused Adam update over a parameter block. mhat_scale/vhat_scale are
  // the bias corrections 1/(1-beta1^t), 1/(1-beta2^t).
  void (*adam)(double* p, const double* g, double* m, double* v, std::size_t n,
               double beta1, double beta2, double mhat_scale, double vhat_scale,
               double lr, double eps);
};

enum class Backend { Scalar, Avx2 };

bool backend_supported(Backend b);
// Returns false (and leaves the active table unchanged) if unsupported.
bool set_backend(Backend b);
Backend active_backend();
std::string_view backend_name(Backend b);

const Ops& ops();

}  // namespace ntm::kern
