#include "itemlab/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "itemlab/errors.hpp"
#include "itemlab/irt_model.hpp"
#include "itemlab/rng.hpp"
#include "itemlab/stats.hpp"

namespace itemlab {

ParamSummary summarize_draws(std::span<const double> draws) {
  if (draws.empty()) throw Error("empty_input", "summary of empty draws");
  std::vector<double> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  ParamSummary s;
  s.median = stats::quantile_sorted(sorted, 0.5);
  s.ci66_lo = stats::quantile_sorted(sorted, 0.17);
  s.ci66_hi = stats::quantile_sorted(sorted, 0.83);
  s.ci95_lo = stats::quantile_sorted(sorted, 0.025);
  s.ci95_hi = stats::quantile_sorted(sorted, 0.975);
  return s;
}

std::vector<ParamSummary> summarize(const PosteriorFit& fit) {
  std::vector<ParamSummary> out;
  out.reserve(fit.n_params);
  for (std::size_t p = 0; p < fit.n_params; ++p) out.push_back(summarize_draws(fit.pooled(p)));
  return out;
}

std::vector<IrtItemParams> item_parameter_table(const PosteriorFit& fit) {
  std::vector<IrtItemParams> out;
  out.reserve(fit.item_ids.size());
  for (std::size_t i = 0; i < fit.item_ids.size(); ++i) {
    IrtItemParams row;
    row.item_id = fit.item_ids[i];
    row.e_summary = summarize_draws(fit.pooled(fit.e_start() + i));
    row.a_summary = summarize_draws(fit.pooled(fit.a_start() + i));
    row.e_median = row.e_summary.median;
    row.a_median = row.a_summary.median;
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<TechniqueSummary> aggregate_by_technique(const PosteriorFit& fit,
                                                     const ItemBank& bank) {
  std::map<Technique, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < fit.item_ids.size(); ++i)
    groups[bank.at(fit.item_ids[i]).technique].push_back(i);

  const std::size_t n_draws =
      static_cast<std::size_t>(fit.n_chains) * static_cast<std::size_t>(fit.draws_per_chain);
  std::vector<TechniqueSummary> out;
  for (const auto& [technique, items] : groups) {
    if (items.empty()) throw Error("empty_input", "technique with zero items");
    std::vector<double> mean_e(n_draws, 0.0), mean_a(n_draws, 0.0);
    std::size_t d = 0;
    for (int c = 0; c < fit.n_chains; ++c) {
      for (int k = 0; k < fit.draws_per_chain; ++k, ++d) {
        double se = 0.0, sa = 0.0;
        for (std::size_t i : items) {
          se += fit.draw(c, k, fit.e_start() + i);
          sa += fit.draw(c, k, fit.a_start() + i);
        }
        mean_e[d] = se / static_cast<double>(items.size());
        mean_a[d] = sa / static_cast<double>(items.size());
      }
    }
    TechniqueSummary t;
    t.technique = technique;
    t.n_items = items.size();
    t.mean_easiness = summarize_draws(mean_e);
    t.mean_discrimination = summarize_draws(mean_a);
    out.push_back(std::move(t));
  }
  return out;
}

AbilityCorrelates ability_correlates(const PosteriorFit& fit, const ResponseDataset& data) {
  const std::size_t n = fit.participant_ids.size();
  if (n < 3) throw Error("empty_input", "correlates need at least 3 participants");

  std::vector<double> theta_hat(n), raw(n), skip_rate(n);
  for (std::size_t k = 0; k < n; ++k) {
    theta_hat[k] = stats::median(fit.pooled(fit.theta_start() + k));
    const std::size_t j = data.participant_index(fit.participant_ids[k]);
    int correct = 0, skips = 0;
    for (std::size_t i = 0; i < data.n_items(); ++i) {
      const Outcome o = data.outcome(j, i);
      if (o == Outcome::Correct) ++correct;
      if (o == Outcome::Skip) ++skips;
    }
    raw[k] = correct;
    skip_rate[k] = static_cast<double>(skips) / static_cast<double>(data.n_items());
  }

  AbilityCorrelates out;
  out.r_raw = stats::pearson(raw, theta_hat);
  out.p_raw = stats::pearson_p_value(out.r_raw, n);
  out.r_skip = stats::pearson(skip_rate, theta_hat);
  out.p_skip = stats::pearson_p_value(out.r_skip, n);
  return out;
}

std::vector<PpcItem> posterior_predictive_pcorrect(const PosteriorFit& fit,
                                                   const Irt2plModel& model,
                                                   std::uint64_t seed, int max_draws) {
  const auto& obs = model.observations();
  const std::size_t I = model.n_items();
  const int total = fit.n_chains * fit.draws_per_chain;
  const int stride = std::max(1, total / std::max(1, max_draws));

  std::vector<PpcItem> out(I);
  std::vector<std::vector<double>> replicated(I);
  Rng rng(seed);

  for (int flat = 0; flat < total; flat += stride) {
    const int c = flat / fit.draws_per_chain;
    const int d = flat % fit.draws_per_chain;
    for (std::size_t i = 0; i < I; ++i) {
      const double e = fit.draw(c, d, fit.e_start() + i);
      const double a = fit.draw(c, d, fit.a_start() + i);
      const std::size_t lo = obs.item_offset[i], hi = obs.item_offset[i + 1];
      if (lo == hi) continue;
      int rep_correct = 0;
      for (std::size_t k = lo; k < hi; ++k) {
        const double theta = fit.draw(c, d, fit.theta_start() + obs.participant[k]);
        if (rng.bernoulli(icc_probability(theta, a, e))) ++rep_correct;
      }
      replicated[i].push_back(static_cast<double>(rep_correct) /
                              static_cast<double>(hi - lo));
    }
  }

  for (std::size_t i = 0; i < I; ++i) {
    out[i].item_id = model.item_ids()[i];
    const std::size_t lo = obs.item_offset[i], hi = obs.item_offset[i + 1];
    if (lo == hi) continue;
    double correct = 0.0;
    for (std::size_t k = lo; k < hi; ++k) correct += obs.y[k];
    out[i].observed = correct / static_cast<double>(hi - lo);
    std::vector<double> rep = replicated[i];
    std::sort(rep.begin(), rep.end());
    out[i].replicated_median = stats::quantile_sorted(rep, 0.5);
    out[i].replicated_lo95 = stats::quantile_sorted(rep, 0.025);
    out[i].replicated_hi95 = stats::quantile_sorted(rep, 0.975);
  }
  return out;
}

}  // namespace itemlab
