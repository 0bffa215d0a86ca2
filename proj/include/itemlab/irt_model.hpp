#pragma once

#include <span>
#include <string>
#include <vector>

#include "itemlab/kernels.hpp"
#include "itemlab/responses.hpp"

namespace itemlab {

/// Correct-response probability of the 2PL model,
/// P(y=1) = 1 / (1 + exp(-a (theta + e))).
double icc_probability(double theta, double a, double e);

/// Hierarchical Bayesian 2PL model over the observed (non-skip)
/// responses of the retained participants.
///
/// Constrained parameters: abilities theta_j (prior N(0,1), SD fixed to
/// 1 for identification), fixed effects beta_e and beta_a of easiness
/// and log-discrimination (N(0,1) priors), correlated item effects
/// (u_e, u_a) with scales tau_e, tau_a (half-N(0,1) priors) and
/// correlation rho (LKJ(2) prior). Items derive as
///   e_i = beta_e + u_{e,i},  a_i = exp(beta_a + u_{a,i}),  b_i = -e_i.
///
/// The unconstrained vector uses the non-centered parameterization:
///   [ theta_0..theta_{J-1} | beta_e | beta_a | z_e_0.. | z_a_0.. |
///     log tau_e | log tau_a | atanh rho ]
/// with u = diag(tau) L z and L the Cholesky factor of the 2x2
/// correlation matrix.
class Irt2plModel {
 public:
  /// Builds the observation table from the retained participants'
  /// non-skip outcomes.
  Irt2plModel(const ResponseDataset& data, const std::vector<bool>& retained);

  /// Direct construction from triples (tests, simulations).
  Irt2plModel(std::size_t n_participants, std::vector<std::string> participant_ids,
              std::vector<std::string> item_ids,
              const std::vector<std::tuple<std::int32_t, std::int32_t, int>>& triples);

  std::size_t n_participants() const { return participant_ids_.size(); }
  std::size_t n_items() const { return item_ids_.size(); }
  std::size_t n_obs() const { return obs_.n_obs(); }
  const std::vector<std::string>& participant_ids() const { return participant_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }

  /// Dimension of the unconstrained parameter vector: J + 2I + 5.
  std::size_t dim() const { return n_participants() + 2 * n_items() + 5; }

  // Offsets into the unconstrained vector.
  std::size_t theta_offset() const { return 0; }
  std::size_t beta_e_offset() const { return n_participants(); }
  std::size_t beta_a_offset() const { return n_participants() + 1; }
  std::size_t z_e_offset() const { return n_participants() + 2; }
  std::size_t z_a_offset() const { return n_participants() + 2 + n_items(); }
  std::size_t log_tau_e_offset() const { return n_participants() + 2 + 2 * n_items(); }
  std::size_t log_tau_a_offset() const { return log_tau_e_offset() + 1; }
  std::size_t atanh_rho_offset() const { return log_tau_e_offset() + 2; }

  /// Joint log density (Bernoulli likelihood plus priors, including the
  /// log/atanh transform Jacobians) and its exact gradient. `grad` must
  /// have dim() entries; it is overwritten. Throws on non-finite input.
  double log_posterior(std::span<const double> params, std::span<double> grad) const;

  /// Constrained view of one unconstrained point.
  struct Constrained {
    std::vector<double> theta;
    std::vector<double> e;
    std::vector<double> a;
    double beta_e = 0, beta_a = 0, tau_e = 0, tau_a = 0, rho = 0;
  };
  Constrained constrain(std::span<const double> params) const;

  const kernels::ObsTable& observations() const { return obs_; }

 private:
  void index_names();

  kernels::ObsTable obs_;
  std::vector<std::string> participant_ids_;
  std::vector<std::string> item_ids_;
};

}  // namespace itemlab
