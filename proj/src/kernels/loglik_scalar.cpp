#include <cmath>

#include "itemlab/kernels.hpp"

namespace itemlab::kernels {

namespace {

// log(1 + exp(s)) without overflow for large |s|.
inline double softplus(double s) {
  if (s > 0.0) return s + std::log1p(std::exp(-s));
  return std::log1p(std::exp(s));
}

}  // namespace

double loglik_grad_scalar(const ObsTable& obs, const double* theta, const double* e,
                          const double* a, double* g_theta, double* g_e, double* g_a) {
  double ll = 0.0;
  const std::size_t items = obs.n_items();
  for (std::size_t i = 0; i < items; ++i) {
    const double ai = a[i];
    const double ei = e[i];
    double sum_dy = 0.0;
    double sum_dyx = 0.0;
    for (std::size_t n = obs.item_offset[i]; n < obs.item_offset[i + 1]; ++n) {
      const std::int32_t j = obs.participant[n];
      const double y = obs.y[n];
      const double x = theta[j] + ei;
      const double s = ai * x;
      const double p = 1.0 / (1.0 + std::exp(-s));
      const double dy = y - p;
      ll += y * s - softplus(s);
      g_theta[j] += ai * dy;
      sum_dy += dy;
      sum_dyx += dy * x;
    }
    g_e[i] += ai * sum_dy;
    g_a[i] += sum_dyx;
  }
  return ll;
}

}  // namespace itemlab::kernels
