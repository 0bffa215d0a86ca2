#pragma once

#include <span>
#include <string>
#include <vector>

#include "itemlab/hmc.hpp"
#include "itemlab/itembank.hpp"

namespace itemlab {

/// Central credible summaries: posterior median plus 66% and 95%
/// intervals (17th/83rd and 2.5th/97.5th percentiles, linear
/// interpolation quantiles).
struct ParamSummary {
  double median = 0.0;
  double ci66_lo = 0.0, ci66_hi = 0.0;
  double ci95_lo = 0.0, ci95_hi = 0.0;
};

ParamSummary summarize_draws(std::span<const double> draws);

/// One summary per sampled parameter, in fit parameter order.
std::vector<ParamSummary> summarize(const PosteriorFit& fit);

/// Posterior medians of item easiness/discrimination, Table-shaped.
struct IrtItemParams {
  std::string item_id;
  double e_median = 0.0;
  double a_median = 0.0;
  ParamSummary e_summary;
  ParamSummary a_summary;
};

std::vector<IrtItemParams> item_parameter_table(const PosteriorFit& fit);

struct TechniqueSummary {
  Technique technique = Technique::ColorMapping;
  std::size_t n_items = 0;
  ParamSummary mean_easiness;
  ParamSummary mean_discrimination;
};

/// Draw-level averages of e_i and a_i over each technique's items,
/// summarized over draws. Every bank technique present must have at
/// least one fitted item.
std::vector<TechniqueSummary> aggregate_by_technique(const PosteriorFit& fit,
                                                     const ItemBank& bank);

struct AbilityCorrelates {
  double r_raw = 0.0, p_raw = 0.0;    // corr(raw score, theta_hat)
  double r_skip = 0.0, p_skip = 0.0;  // corr(skip rate, theta_hat)
};

/// Pearson correlations of posterior-median theta with raw score and
/// skip rate over the fitted participants; two-sided p-values via the
/// t transform.
AbilityCorrelates ability_correlates(const PosteriorFit& fit, const ResponseDataset& data);

/// Posterior predictive check: per-item observed proportion correct
/// among non-skips against replicated proportions from posterior draws.
struct PpcItem {
  std::string item_id;
  double observed = 0.0;
  double replicated_median = 0.0;
  double replicated_lo95 = 0.0;
  double replicated_hi95 = 0.0;
};

std::vector<PpcItem> posterior_predictive_pcorrect(const PosteriorFit& fit,
                                                   const Irt2plModel& model,
                                                   std::uint64_t seed, int max_draws = 400);

}  // namespace itemlab
