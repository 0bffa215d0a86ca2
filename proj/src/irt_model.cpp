#include "itemlab/irt_model.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "itemlab/errors.hpp"

namespace itemlab {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2*pi)

// Normalized LKJ(2) density for a 2x2 correlation: f(rho) = (3/4)(1 - rho^2).
constexpr double kLogLkj2Norm = -0.28768207245178092744;  // log(3/4)

}  // namespace

double icc_probability(double theta, double a, double e) {
  return 1.0 / (1.0 + std::exp(-a * (theta + e)));
}

Irt2plModel::Irt2plModel(const ResponseDataset& data, const std::vector<bool>& retained) {
  if (retained.size() != data.n_participants())
    throw Error("size_mismatch", "retained mask does not match participant count");
  for (std::size_t j = 0; j < data.n_participants(); ++j)
    if (retained[j]) participant_ids_.push_back(data.participants()[j].participant_id);
  item_ids_ = data.item_ids();
  if (participant_ids_.empty() || item_ids_.empty())
    throw Error("empty_dataset", "model needs at least one participant and one item");

  obs_.n_participants = participant_ids_.size();
  obs_.item_offset.assign(item_ids_.size() + 1, 0);
  for (std::size_t i = 0; i < item_ids_.size(); ++i) {
    obs_.item_offset[i] = obs_.participant.size();
    std::int32_t row = 0;
    for (std::size_t j = 0; j < data.n_participants(); ++j) {
      if (!retained[j]) continue;
      const Outcome o = data.outcome(j, i);
      if (o != Outcome::Skip) {
        obs_.participant.push_back(row);
        obs_.y.push_back(o == Outcome::Correct ? 1.0 : 0.0);
      }
      ++row;
    }
  }
  obs_.item_offset[item_ids_.size()] = obs_.participant.size();
}

Irt2plModel::Irt2plModel(std::size_t n_participants, std::vector<std::string> participant_ids,
                         std::vector<std::string> item_ids,
                         const std::vector<std::tuple<std::int32_t, std::int32_t, int>>& triples)
    : participant_ids_(std::move(participant_ids)), item_ids_(std::move(item_ids)) {
  if (participant_ids_.empty())
    for (std::size_t j = 0; j < n_participants; ++j)
      participant_ids_.push_back("P" + std::to_string(j + 1));
  obs_.n_participants = participant_ids_.size();

  std::vector<std::tuple<std::int32_t, std::int32_t, int>> sorted = triples;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& x, const auto& y) { return std::get<1>(x) < std::get<1>(y); });
  obs_.item_offset.assign(item_ids_.size() + 1, 0);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < item_ids_.size(); ++i) {
    obs_.item_offset[i] = pos;
    while (pos < sorted.size() && static_cast<std::size_t>(std::get<1>(sorted[pos])) == i) {
      obs_.participant.push_back(std::get<0>(sorted[pos]));
      obs_.y.push_back(std::get<2>(sorted[pos]) != 0 ? 1.0 : 0.0);
      ++pos;
    }
  }
  obs_.item_offset[item_ids_.size()] = pos;
  if (pos != sorted.size())
    throw Error("unknown_item", "observation references an item index outside the bank");
}

Irt2plModel::Constrained Irt2plModel::constrain(std::span<const double> params) const {
  const std::size_t J = n_participants();
  const std::size_t I = n_items();
  Constrained c;
  c.theta.assign(params.begin(), params.begin() + J);
  c.beta_e = params[beta_e_offset()];
  c.beta_a = params[beta_a_offset()];
  c.tau_e = std::exp(params[log_tau_e_offset()]);
  c.tau_a = std::exp(params[log_tau_a_offset()]);
  c.rho = std::tanh(params[atanh_rho_offset()]);
  const double rho_c = std::sqrt(1.0 - c.rho * c.rho);
  c.e.resize(I);
  c.a.resize(I);
  for (std::size_t i = 0; i < I; ++i) {
    const double z_e = params[z_e_offset() + i];
    const double z_a = params[z_a_offset() + i];
    c.e[i] = c.beta_e + c.tau_e * z_e;
    c.a[i] = std::exp(c.beta_a + c.tau_a * (c.rho * z_e + rho_c * z_a));
  }
  return c;
}

double Irt2plModel::log_posterior(std::span<const double> params, std::span<double> grad) const {
  const std::size_t J = n_participants();
  const std::size_t I = n_items();
  if (params.size() != dim() || grad.size() != dim())
    throw Error("size_mismatch", "parameter vector does not match model dimension");
  for (double v : params)
    if (!std::isfinite(v)) throw Error("non_finite", "non-finite parameter input");

  const double* theta = params.data() + theta_offset();
  const double beta_e = params[beta_e_offset()];
  const double beta_a = params[beta_a_offset()];
  const double* z_e = params.data() + z_e_offset();
  const double* z_a = params.data() + z_a_offset();
  const double log_tau_e = params[log_tau_e_offset()];
  const double log_tau_a = params[log_tau_a_offset()];
  const double w = params[atanh_rho_offset()];

  const double tau_e = std::exp(log_tau_e);
  const double tau_a = std::exp(log_tau_a);
  const double rho = std::tanh(w);
  const double rho_c = std::sqrt(1.0 - rho * rho);

  // Constrained item parameters.
  std::vector<double> e(I), a(I), mix(I);
  for (std::size_t i = 0; i < I; ++i) {
    mix[i] = rho * z_e[i] + rho_c * z_a[i];
    e[i] = beta_e + tau_e * z_e[i];
    a[i] = std::exp(beta_a + tau_a * mix[i]);
  }

  std::fill(grad.begin(), grad.end(), 0.0);
  double* g_theta = grad.data() + theta_offset();
  std::vector<double> g_e(I, 0.0);   // d loglik / d e_i
  std::vector<double> g_ar(I, 0.0);  // d loglik / d a_i (raw scale)

  double lp = kernels::loglik_grad(obs_, theta, e.data(), a.data(), g_theta, g_e.data(),
                                   g_ar.data());

  // Chain rule into the unconstrained coordinates. g_loga below is the
  // derivative wrt log a_i, which absorbs the exp transform.
  double g_beta_e = 0.0, g_beta_a = 0.0, g_ltau_e = 0.0, g_ltau_a = 0.0, g_w = 0.0;
  for (std::size_t i = 0; i < I; ++i) {
    const double g_loga = g_ar[i] * a[i];
    g_beta_e += g_e[i];
    g_beta_a += g_loga;
    grad[z_e_offset() + i] = g_e[i] * tau_e + g_loga * tau_a * rho;
    grad[z_a_offset() + i] = g_loga * tau_a * rho_c;
    g_ltau_e += g_e[i] * tau_e * z_e[i];
    g_ltau_a += g_loga * tau_a * mix[i];
    // d mix / d w = (1 - rho^2) z_e - rho sqrt(1-rho^2) z_a
    g_w += g_loga * tau_a * ((1.0 - rho * rho) * z_e[i] - rho * rho_c * z_a[i]);
  }

  // Priors. theta_j ~ N(0,1); beta ~ N(0,1); z ~ N(0,1);
  // tau ~ half-N(0,1) in tau-space plus the log-transform Jacobian;
  // rho ~ LKJ(2) in rho-space plus the tanh Jacobian.
  for (std::size_t j = 0; j < J; ++j) {
    lp += -0.5 * theta[j] * theta[j] - kHalfLog2Pi;
    g_theta[j] += -theta[j];
  }
  lp += -0.5 * beta_e * beta_e - kHalfLog2Pi;
  g_beta_e += -beta_e;
  lp += -0.5 * beta_a * beta_a - kHalfLog2Pi;
  g_beta_a += -beta_a;
  for (std::size_t i = 0; i < I; ++i) {
    lp += -0.5 * z_e[i] * z_e[i] - kHalfLog2Pi;
    grad[z_e_offset() + i] += -z_e[i];
    lp += -0.5 * z_a[i] * z_a[i] - kHalfLog2Pi;
    grad[z_a_offset() + i] += -z_a[i];
  }
  const double log2 = 0.69314718055994530942;
  lp += log2 - 0.5 * tau_e * tau_e - kHalfLog2Pi + log_tau_e;
  g_ltau_e += 1.0 - tau_e * tau_e;
  lp += log2 - 0.5 * tau_a * tau_a - kHalfLog2Pi + log_tau_a;
  g_ltau_a += 1.0 - tau_a * tau_a;
  lp += kLogLkj2Norm + 2.0 * std::log1p(-rho * rho);
  g_w += -4.0 * rho;

  grad[beta_e_offset()] = g_beta_e;
  grad[beta_a_offset()] = g_beta_a;
  grad[log_tau_e_offset()] = g_ltau_e;
  grad[log_tau_a_offset()] = g_ltau_a;
  grad[atanh_rho_offset()] = g_w;
  return lp;
}

}  // namespace itemlab
