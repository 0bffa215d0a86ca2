#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "itemlab/irt_model.hpp"

namespace itemlab {

struct SamplerConfig {
  int chains = 4;
  int iterations = 2000;  // per chain, warmup included
  int warmup = 1000;
  int thin = 1;
  std::uint64_t seed = 1;
  double target_accept = 0.8;
  int max_treedepth = 10;
  /// 0 samples trajectory lengths dynamically (NUTS); a positive value
  /// runs plain HMC with that many leapfrog steps per transition.
  int fixed_trajectory_steps = 0;
  double divergence_limit = 0.02;  // post-warmup rate above which the fit is unreliable
  double init_radius = 0.5;        // uniform(-r, r) unconstrained initialization
  int max_init_retries = 10;
  int threads = 0;  // 0 = one thread per chain

  /// 4 chains x 20000 iterations, 5000 warmup, thinned by 5.
  static SamplerConfig paper_scale();
  /// 4 chains x 2000 iterations, 1000 warmup, no thinning.
  static SamplerConfig desk_scale();

  int retained_per_chain() const { return (iterations - warmup) / thin; }
  int total_retained() const { return chains * retained_per_chain(); }
  void validate() const;
};

/// Posterior draws on the constrained scale plus sampler metadata.
/// Constrained row layout: theta[J] | e[I] | a[I] | beta_e | beta_a |
/// tau_e | tau_a | rho.
struct PosteriorFit {
  std::vector<std::string> param_names;
  std::vector<std::string> participant_ids;
  std::vector<std::string> item_ids;
  std::size_t n_params = 0;
  int n_chains = 0;
  int draws_per_chain = 0;
  std::vector<double> draws;  // [chain][draw][param], row-major

  SamplerConfig config;
  std::vector<std::uint64_t> chain_seeds;
  std::vector<double> step_size;    // adapted, per chain
  std::vector<double> mean_accept;  // post-warmup, per chain
  std::vector<int> divergences;     // post-warmup, per chain
  std::vector<int> max_depth_hits;  // post-warmup, per chain
  bool reliable = true;

  double draw(int chain, int index, std::size_t param) const {
    return draws[(static_cast<std::size_t>(chain) * draws_per_chain + index) * n_params + param];
  }
  std::span<const double> draw_row(int chain, int index) const {
    return {draws.data() +
                (static_cast<std::size_t>(chain) * draws_per_chain + index) * n_params,
            n_params};
  }
  /// All chains' draws of one parameter, chain-major order.
  std::vector<double> pooled(std::size_t param) const;
  /// Per-chain draw vectors of one parameter.
  std::vector<std::vector<double>> by_chain(std::size_t param) const;

  std::size_t theta_start() const { return 0; }
  std::size_t e_start() const { return participant_ids.size(); }
  std::size_t a_start() const { return participant_ids.size() + item_ids.size(); }
  std::size_t beta_e_index() const { return participant_ids.size() + 2 * item_ids.size(); }
  std::size_t beta_a_index() const { return beta_e_index() + 1; }
  std::size_t tau_e_index() const { return beta_e_index() + 2; }
  std::size_t tau_a_index() const { return beta_e_index() + 3; }
  std::size_t rho_index() const { return beta_e_index() + 4; }
};

/// Samples the model posterior with gradient-based MCMC: Hamiltonian
/// dynamics with dual-averaging step-size adaptation during warmup,
/// diagonal-metric estimation in windowed warmup phases, and either
/// dynamically chosen (no-U-turn) or fixed trajectory lengths. Chains
/// run independently (optionally in parallel) and are deterministic per
/// chain seed regardless of schedule.
PosteriorFit sample(const Irt2plModel& model, const SamplerConfig& config);

}  // namespace itemlab
