#include "ntm/tensor.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "ntm/error.hpp"
#include "ntm/kernels.hpp"

namespace ntm {

void matmul_nt(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  assert(a.cols() == b.cols());
  assert(c.rows() == a.rows() && c.cols() == b.rows());
  const auto& k = kern::ops();
  const std::size_t inner = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      ci[j] = k.dot(ai, b.row(j), inner);
    }
  }
}

void matmul_nn(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  assert(a.cols() == b.rows());
  assert(c.rows() == a.rows() && c.cols() == b.cols());
  const auto& k = kern::ops();
  c.zero();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (ai[j] != 0.0) k.axpy(ai[j], b.row(j), ci, b.cols());
    }
  }
}

void matmul_tn_acc(const Tensor2& a, const Tensor2& b, Tensor2& c) {
  assert(a.rows() == b.rows());
  assert(c.rows() == a.cols() && c.cols() == b.cols());
  const auto& k = kern::ops();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (ai[j] != 0.0) k.axpy(ai[j], b.row(i), c.row(j), b.cols());
    }
  }
}

void check_finite(std::span<const double> x, std::string_view what) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw Error("non-finite value in " + std::string(what) + " at index " +
                  std::to_string(i));
    }
  }
}

void check_finite(const Tensor2& x, std::string_view what) {
  check_finite(x.flat(), what);
}

}  // namespace ntm
