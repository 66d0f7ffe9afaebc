#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ntm/kernels.hpp"
#include "ntm/rng.hpp"
#include "ntm/error.hpp"
#include "ntm/tensor.hpp"

using namespace ntm;

namespace {

struct BackendGuard {
  kern::Backend saved = kern::active_backend();
  ~BackendGuard() { kern::set_backend(saved); }
};

double rel_diff(double a, double b) {
  const double d = std::abs(a) + std::abs(b);
  return d < 1e-12 ? std::abs(a - b) : std::abs(a - b) / d;
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("scalar and avx2 backends agree on every kernel") {
  if (!kern::backend_supported(kern::Backend::Avx2)) {
    MESSAGE("avx2 not available on this host; dispatch falls back to scalar");
    return;
  }
  BackendGuard guard;
  Rng rng(42);
  // Sizes straddle vector width multiples to hit every tail path.
  for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 31u, 64u, 257u, 1000u}) {
    const auto a = test::random_vector(rng, n, -3.0, 3.0);
    const auto b = test::random_vector(rng, n, -3.0, 3.0);

    REQUIRE(kern::set_backend(kern::Backend::Scalar));
    const double dot_s = kern::ops().dot(a.data(), b.data(), n);
    const double sum_s = kern::ops().sum(a.data(), n);
    const double max_s = kern::ops().max(a.data(), n);
    auto y_s = b;
    kern::ops().axpy(0.37, a.data(), y_s.data(), n);
    auto sc_s = a;
    kern::ops().scale(-1.7, sc_s.data(), n);
    std::vector<double> mul_s(n);
    kern::ops().mul(a.data(), b.data(), mul_s.data(), n);
    auto pm_s = a, gm_s = b, mm_s = std::vector<double>(n, 0.1), vm_s = std::vector<double>(n, 0.2);
    kern::ops().adam(pm_s.data(), gm_s.data(), mm_s.data(), vm_s.data(), n, 0.9, 0.999, 1.5,
                     1.1, 0.01, 1e-8);

    REQUIRE(kern::set_backend(kern::Backend::Avx2));
    const double dot_v = kern::ops().dot(a.data(), b.data(), n);
    const double sum_v = kern::ops().sum(a.data(), n);
    const double max_v = kern::ops().max(a.data(), n);
    auto y_v = b;
    kern::ops().axpy(0.37, a.data(), y_v.data(), n);
    auto sc_v = a;
    kern::ops().scale(-1.7, sc_v.data(), n);
    std::vector<double> mul_v(n);
    kern::ops().mul(a.data(), b.data(), mul_v.data(), n);
    auto pm_v = a, gm_v = b, mm_v = std::vector<double>(n, 0.1), vm_v = std::vector<double>(n, 0.2);
    kern::ops().adam(pm_v.data(), gm_v.data(), mm_v.data(), vm_v.data(), n, 0.9, 0.999, 1.5,
                     1.1, 0.01, 1e-8);

    CHECK(rel_diff(dot_s, dot_v) < 1e-13);
    CHECK(rel_diff(sum_s, sum_v) < 1e-13);
    CHECK(max_s == max_v);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(rel_diff(y_s[i], y_v[i]) < 1e-13);
      CHECK(sc_s[i] == sc_v[i]);
      CHECK(mul_s[i] == mul_v[i]);
      CHECK(rel_diff(pm_s[i], pm_v[i]) < 1e-12);
      CHECK(rel_diff(mm_s[i], mm_v[i]) < 1e-12);
      CHECK(rel_diff(vm_s[i], vm_v[i]) < 1e-12);
    }
  }
}

TEST_CASE("dot/sum/max against plain loops") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(200);
    const auto a = test::random_vector(rng, n);
    const auto b = test::random_vector(rng, n);
    double dot = 0.0, sum = 0.0, mx = a[0];
    for (std::size_t i = 0; i < n; ++i) {
      dot += a[i] * b[i];
      sum += a[i];
      mx = std::max(mx, a[i]);
    }
    CHECK(kern::ops().dot(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-12));
    CHECK(kern::ops().sum(a.data(), n) == doctest::Approx(sum).epsilon(1e-12));
    CHECK(kern::ops().max(a.data(), n) == mx);
  }
}

TEST_CASE("matmul wrappers match naive reference") {
  Rng rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 1 + rng.uniform_int(9);
    const std::size_t k = 1 + rng.uniform_int(9);
    const std::size_t n = 1 + rng.uniform_int(9);
    const Tensor2 a = test::random_tensor(rng, m, k);
    const Tensor2 bt = test::random_tensor(rng, n, k);  // for nt
    const Tensor2 b = test::random_tensor(rng, k, n);   // for nn

    Tensor2 c_nt(m, n);
    matmul_nt(a, bt, c_nt);
    const Tensor2 ref_nt = test::naive_nt(a, bt);
    Tensor2 c_nn(m, n);
    matmul_nn(a, b, c_nn);
    const Tensor2 ref_nn = test::naive_nn(a, b);
    for (std::size_t i = 0; i < c_nt.size(); ++i) {
      CHECK(c_nt.data()[i] == doctest::Approx(ref_nt.data()[i]).epsilon(1e-12));
      CHECK(c_nn.data()[i] == doctest::Approx(ref_nn.data()[i]).epsilon(1e-12));
    }

    // tn accumulates: c (k x n) += a^T(m x k)^T b(m x n)
    const Tensor2 d = test::random_tensor(rng, m, n);
    Tensor2 c_tn(k, n, 0.5);
    matmul_tn_acc(a, d, c_tn);
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        double acc = 0.5;
        for (std::size_t i = 0; i < m; ++i) acc += a(i, r) * d(i, c);
        CHECK(c_tn(r, c) == doctest::Approx(acc).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("check_finite names the offender") {
  Tensor2 t(2, 2, 1.0);
  CHECK_NOTHROW(check_finite(t, "weights"));
  t(1, 1) = std::nan("");
  CHECK_THROWS_WITH_AS(check_finite(t, "weights"),
                       doctest::Contains("weights"), Error);
}

TEST_SUITE_END();
