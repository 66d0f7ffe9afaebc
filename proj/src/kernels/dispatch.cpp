#include "ntm/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace ntm::kern {

namespace detail {
extern const Ops scalar_table;
#if defined(NTM_BUILD_AVX2)
const Ops* avx2_ops();
#else
inline const Ops* avx2_ops() { return nullptr; }
#endif
}  // namespace detail

namespace {

bool cpu_has_avx2_fma() {
#if defined(NTM_BUILD_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

struct Active {
  const Ops* table;
  Backend backend;
};

Active pick_default() {
  const char* env = std::getenv("NTM_KERNELS");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) {
    return {&detail::scalar_table, Backend::Scalar};
  }
  if (detail::avx2_ops() != nullptr && cpu_has_avx2_fma() &&
      (env == nullptr || std::strcmp(env, "avx2") == 0)) {
    return {detail::avx2_ops(), Backend::Avx2};
  }
  return {&detail::scalar_table, Backend::Scalar};
}

Active& active() {
  static Active a = pick_default();
  return a;
}

}  // namespace

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2: return detail::avx2_ops() != nullptr && cpu_has_avx2_fma();
  }
  return false;
}

bool set_backend(Backend b) {
  if (!backend_supported(b)) return false;
  active() = {b == Backend::Avx2 ? detail::avx2_ops() : &detail::scalar_table, b};
  return true;
}

Backend active_backend() { return active().backend; }

std::string_view backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

const Ops& ops() { return *active().table; }

}  // namespace ntm::kern
