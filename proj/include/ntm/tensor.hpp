#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ntm {

// Row-major dense matrix of doubles. The whole engine works in 64-bit
// precision so gradient checks are not confounded by rounding.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

  double* row(std::size_t r) { return v_.data() + r * cols_; }
  const double* row(std::size_t r) const { return v_.data() + r * cols_; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::span<double> flat() { return v_; }
  std::span<const double> flat() const { return v_; }

  void zero() { v_.assign(v_.size(), 0.0); }

  bool same_shape(const Tensor2& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

// C = A (m x k) * B^T where B is (n x k); rows-dot-rows keeps both operands
// contiguous for the dot kernel.
void matmul_nt(const Tensor2& a, const Tensor2& b, Tensor2& c);
// C = A (m x k) * B (k x n), accumulated row-wise with axpy.
void matmul_nn(const Tensor2& a, const Tensor2& b, Tensor2& c);
// C (k x n) += A^T (m x k)^T * B (m x n); used for weight gradients.
void matmul_tn_acc(const Tensor2& a, const Tensor2& b, Tensor2& c);

// Throws ntm::Error naming `what` if any element is NaN/Inf.
void check_finite(std::span<const double> x, std::string_view what);
void check_finite(const Tensor2& x, std::string_view what);

}  // namespace ntm
