#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace itemlab::kernels {

/// Observed (participant, item, y) triples grouped by item, CSR style.
/// Skips never appear here. y is stored as 0.0/1.0 for the arithmetic
/// kernels.
struct ObsTable {
  std::vector<std::int32_t> participant;  // size n_obs, grouped by item
  std::vector<double> y;                  // parallel to participant
  std::vector<std::size_t> item_offset;   // size n_items + 1
  std::size_t n_participants = 0;

  std::size_t n_items() const { return item_offset.empty() ? 0 : item_offset.size() - 1; }
  std::size_t n_obs() const { return participant.size(); }
};

/// Bernoulli 2PL log likelihood over the table, with gradient
/// accumulation. With s = a_i (theta_j + e_i) and p = logistic(s):
///   return  sum over obs of  y*s - softplus(s)
///   g_theta[j] += a_i (y - p)
///   g_e[i]     += a_i (y - p)
///   g_a[i]     += (theta_j + e_i) (y - p)
/// g_theta has n_participants entries, g_e/g_a have n_items entries;
/// the caller zeroes them first.
using LoglikGradFn = double (*)(const ObsTable&, const double* theta, const double* e,
                                const double* a, double* g_theta, double* g_e, double* g_a);

enum class Impl { Scalar, Avx2 };

const char* to_string(Impl impl);

/// Implementation picked at first use from CPU features.
Impl active_impl();

/// Overrides the dispatch (tests and benchmarking). Throws
/// Error("unsupported_impl") if the CPU lacks the instruction set.
void force_impl(Impl impl);
void reset_impl();

bool cpu_has_avx2();

/// Dispatched entry point used by the model evaluation.
double loglik_grad(const ObsTable& obs, const double* theta, const double* e, const double* a,
                   double* g_theta, double* g_e, double* g_a);

/// Scalar reference; always available, the ground truth for
/// equivalence tests of the vector variants.
double loglik_grad_scalar(const ObsTable& obs, const double* theta, const double* e,
                          const double* a, double* g_theta, double* g_e, double* g_a);

#if defined(__x86_64__) || defined(_M_X64)
double loglik_grad_avx2(const ObsTable& obs, const double* theta, const double* e,
                        const double* a, double* g_theta, double* g_e, double* g_a);
#endif

}  // namespace itemlab::kernels
