#include "itemlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "itemlab/errors.hpp"
#include "itemlab/stats.hpp"

namespace itemlab {

namespace {

using Chains = std::vector<std::vector<double>>;

// First and second halves of every chain, middle draw dropped when odd.
Chains split_chains(const Chains& chains) {
  Chains out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    if (half == 0) continue;
    out.emplace_back(c.begin(), c.begin() + half);
    out.emplace_back(c.end() - half, c.end());
  }
  return out;
}

bool all_constant(const Chains& chains) {
  bool seen = false;
  double first = 0.0;
  for (const auto& c : chains)
    for (double v : c) {
      if (!seen) {
        first = v;
        seen = true;
      } else if (v != first) {
        return false;
      }
    }
  return true;
}

// Fractional average ranks mapped through the normal quantile,
// z = Phi^-1((rank - 3/8) / (S + 1/4)).
Chains rank_normalize(const Chains& chains) {
  struct Entry {
    double value;
    std::size_t chain, index;
  };
  std::vector<Entry> entries;
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (std::size_t i = 0; i < chains[c].size(); ++i) entries.push_back({chains[c][i], c, i});
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.value < b.value; });

  const double total = static_cast<double>(entries.size());
  Chains out(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c) out[c].resize(chains[c].size());

  std::size_t pos = 0;
  while (pos < entries.size()) {
    std::size_t end = pos;
    while (end < entries.size() && entries[end].value == entries[pos].value) ++end;
    const double avg_rank = 0.5 * (static_cast<double>(pos + 1) + static_cast<double>(end));
    const double z = stats::normal_quantile((avg_rank - 0.375) / (total + 0.25));
    for (std::size_t k = pos; k < end; ++k) out[entries[k].chain][entries[k].index] = z;
    pos = end;
  }
  return out;
}

std::optional<double> basic_rhat(const Chains& chains) {
  if (chains.size() < 2) return std::nullopt;
  const std::size_t n = chains.front().size();
  if (n < 2) return std::nullopt;

  std::vector<double> means;
  double w = 0.0;
  for (const auto& c : chains) {
    means.push_back(stats::mean(c));
    w += stats::sample_variance(c);
  }
  w /= static_cast<double>(chains.size());
  if (w <= 0.0) return std::nullopt;
  const double b = static_cast<double>(n) * stats::sample_variance(means);
  const double var_plus = ((static_cast<double>(n) - 1.0) * w + b) / static_cast<double>(n);
  return std::sqrt(var_plus / w);
}

Chains fold(const Chains& chains) {
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  const double med = stats::median(pooled);
  Chains out = chains;
  for (auto& c : out)
    for (double& v : c) v = std::fabs(v - med);
  return out;
}

// Effective sample size with lag-wise autocovariance averaging across
// chains and Geyer initial-monotone truncation of the paired sums.
std::optional<double> basic_ess(const Chains& chains) {
  const std::size_t m = chains.size();
  if (m < 2) return std::nullopt;
  const std::size_t n = chains.front().size();
  if (n < 4) return std::nullopt;

  std::vector<double> means(m);
  std::vector<double> acov0(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = stats::mean(chains[c]);
    double s = 0.0;
    for (double v : chains[c]) s += (v - means[c]) * (v - means[c]);
    acov0[c] = s / static_cast<double>(n);  // biased, lag 0
  }

  double mean_var = 0.0;
  for (std::size_t c = 0; c < m; ++c)
    mean_var += acov0[c] * static_cast<double>(n) / (static_cast<double>(n) - 1.0);
  mean_var /= static_cast<double>(m);

  double var_plus = mean_var * (static_cast<double>(n) - 1.0) / static_cast<double>(n);
  var_plus += stats::sample_variance(means);
  if (var_plus <= 0.0) return std::nullopt;

  auto mean_acov_at = [&](std::size_t t) {
    double s = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      double sc = 0.0;
      for (std::size_t i = 0; i + t < n; ++i)
        sc += (chains[c][i] - means[c]) * (chains[c][i + t] - means[c]);
      s += sc / static_cast<double>(n);
    }
    return s / static_cast<double>(m);
  };

  // Paired-lag estimates: keep adding (even, odd) pairs while their sum
  // stays positive (Geyer's initial positive sequence).
  std::vector<double> rho(n, 0.0);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - mean_acov_at(1)) / var_plus;
  rho[1] = rho_odd;
  std::size_t s = 1;
  while (s < n - 4 && rho_even + rho_odd > 0.0) {
    rho_even = 1.0 - (mean_var - mean_acov_at(s + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - mean_acov_at(s + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[s + 1] = rho_even;
      rho[s + 2] = rho_odd;
    }
    s += 2;
  }
  const std::size_t max_s = s;
  if (rho_even > 0.0) rho[max_s + 1] = rho_even;

  // Initial monotone sequence: paired sums never increase.
  for (std::size_t i = 1; i + 3 <= max_s; i += 2) {
    if (rho[i + 1] + rho[i + 2] > rho[i - 1] + rho[i]) {
      rho[i + 1] = 0.5 * (rho[i - 1] + rho[i]);
      rho[i + 2] = rho[i + 1];
    }
  }

  const double total = static_cast<double>(m) * static_cast<double>(n);
  double tau = -1.0;
  for (std::size_t i = 0; i < max_s; ++i) tau += 2.0 * rho[i];
  tau += rho[max_s + 1];
  tau = std::max(tau, 1.0 / std::log10(total));
  double ess = total / tau;
  ess = std::min(ess, total * std::log10(total));
  return ess;
}

std::optional<double> quantile_indicator_ess(const Chains& split, double prob) {
  std::vector<double> pooled;
  for (const auto& c : split) pooled.insert(pooled.end(), c.begin(), c.end());
  std::sort(pooled.begin(), pooled.end());
  const double q = stats::quantile_sorted(pooled, prob);
  Chains ind(split.size());
  for (std::size_t c = 0; c < split.size(); ++c) {
    ind[c].reserve(split[c].size());
    for (double v : split[c]) ind[c].push_back(v <= q ? 1.0 : 0.0);
  }
  if (all_constant(ind)) return std::nullopt;
  return basic_ess(ind);
}

}  // namespace

std::optional<double> split_rank_rhat(const Chains& chains) {
  const Chains split = split_chains(chains);
  if (split.size() < 2 || all_constant(split)) return std::nullopt;
  const auto bulk = basic_rhat(rank_normalize(split));
  const auto folded = basic_rhat(rank_normalize(fold(split)));
  if (!bulk && !folded) return std::nullopt;
  if (!bulk) return folded;
  if (!folded) return bulk;
  return std::max(*bulk, *folded);
}

std::optional<double> ess_bulk(const Chains& chains) {
  const Chains split = split_chains(chains);
  if (split.size() < 2 || all_constant(split)) return std::nullopt;
  return basic_ess(rank_normalize(split));
}

std::optional<double> ess_tail(const Chains& chains) {
  const Chains split = split_chains(chains);
  if (split.size() < 2 || all_constant(split)) return std::nullopt;
  const auto lo = quantile_indicator_ess(split, 0.05);
  const auto hi = quantile_indicator_ess(split, 0.95);
  if (!lo || !hi) return lo ? lo : hi;
  return std::min(*lo, *hi);
}

bool DiagnosticsReport::pass_gate(double rhat_limit, double min_ess) const {
  if (!max_rhat || !min_bulk_ess) return false;
  return *max_rhat < rhat_limit && *min_bulk_ess > min_ess;
}

DiagnosticsReport diagnostics(const PosteriorFit& fit) {
  if (fit.n_chains < 2)
    throw Error("invalid_config", "diagnostics need at least 2 chains");
  if (fit.draws_per_chain < 4)
    throw Error("invalid_config", "diagnostics need at least 4 draws per chain");

  DiagnosticsReport report;
  report.names = fit.param_names;
  report.per_param.resize(fit.n_params);
  for (std::size_t p = 0; p < fit.n_params; ++p) {
    const Chains chains = fit.by_chain(p);
    ParamDiagnostics& d = report.per_param[p];
    d.rhat = split_rank_rhat(chains);
    d.bulk_ess = ess_bulk(chains);
    d.tail_ess = ess_tail(chains);
    if (!d.rhat) ++report.n_not_applicable;
    if (d.rhat && (!report.max_rhat || *d.rhat > *report.max_rhat)) report.max_rhat = d.rhat;
    if (d.bulk_ess && (!report.min_bulk_ess || *d.bulk_ess < *report.min_bulk_ess))
      report.min_bulk_ess = d.bulk_ess;
    if (d.tail_ess && (!report.min_tail_ess || *d.tail_ess < *report.min_tail_ess))
      report.min_tail_ess = d.tail_ess;
  }
  return report;
}

}  // namespace itemlab
