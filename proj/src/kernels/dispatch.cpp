#include "itemlab/kernels.hpp"

#include <atomic>

#include "itemlab/errors.hpp"

namespace itemlab::kernels {

namespace {

Impl detect() {
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2()) return Impl::Avx2;
#endif
  return Impl::Scalar;
}

std::atomic<Impl> g_impl{detect()};

LoglikGradFn table_lookup(Impl impl) {
  switch (impl) {
    case Impl::Scalar:
      return &loglik_grad_scalar;
    case Impl::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return &loglik_grad_avx2;
#else
      break;
#endif
  }
  return &loglik_grad_scalar;
}

}  // namespace

const char* to_string(Impl impl) {
  switch (impl) {
    case Impl::Scalar: return "scalar";
    case Impl::Avx2: return "avx2";
  }
  return "?";
}

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Impl active_impl() { return g_impl.load(std::memory_order_relaxed); }

void force_impl(Impl impl) {
  if (impl == Impl::Avx2 && !cpu_has_avx2())
    throw Error("unsupported_impl", "this CPU does not support AVX2+FMA");
  g_impl.store(impl, std::memory_order_relaxed);
}

void reset_impl() { g_impl.store(detect(), std::memory_order_relaxed); }

double loglik_grad(const ObsTable& obs, const double* theta, const double* e, const double* a,
                   double* g_theta, double* g_e, double* g_a) {
  return table_lookup(active_impl())(obs, theta, e, a, g_theta, g_e, g_a);
}

}  // namespace itemlab::kernels
