#pragma once

#include <optional>
#include <string>
#include <vector>

#include "itemlab/hmc.hpp"

namespace itemlab {

/// Convergence measures for one parameter. Empty optionals mark
/// parameters where the measure is not applicable (degenerate,
/// zero-variance draws); they are never reported as NaN.
struct ParamDiagnostics {
  std::optional<double> rhat;
  std::optional<double> bulk_ess;
  std::optional<double> tail_ess;
};

struct DiagnosticsReport {
  std::vector<std::string> names;
  std::vector<ParamDiagnostics> per_param;
  // Extremes over the parameters where the measure is defined.
  std::optional<double> max_rhat;
  std::optional<double> min_bulk_ess;
  std::optional<double> min_tail_ess;
  std::size_t n_not_applicable = 0;

  bool pass_gate(double rhat_limit = 1.01, double min_ess = 400.0) const;
};

/// Rank-normalized split R-hat: the larger of the rank-normalized
/// statistic on the draws and on the folded draws |x - median|.
/// `chains` holds one draw vector per chain (pre-split).
std::optional<double> split_rank_rhat(const std::vector<std::vector<double>>& chains);

/// Bulk effective sample size on the rank-normalized split chains,
/// with Geyer's initial monotone sequence truncation.
std::optional<double> ess_bulk(const std::vector<std::vector<double>>& chains);

/// Tail effective sample size: the smaller ESS of the 5% and 95%
/// quantile indicator sequences.
std::optional<double> ess_tail(const std::vector<std::vector<double>>& chains);

/// Per-parameter diagnostics over every sampled parameter of a fit.
DiagnosticsReport diagnostics(const PosteriorFit& fit);

}  // namespace itemlab
