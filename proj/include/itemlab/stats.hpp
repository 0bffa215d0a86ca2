#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace itemlab::stats {

double mean(std::span<const double> x);

/// Sample variance with n-1 denominator. Requires x.size() >= 2.
double sample_variance(std::span<const double> x);

double sample_sd(std::span<const double> x);

/// Quantile by linear interpolation between closest order statistics
/// (R type 7). `sorted` must be ascending and nonempty; p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

/// Convenience wrapper that copies and sorts.
double quantile(std::span<const double> x, double p);

double median(std::span<const double> x);

/// Pearson correlation. Throws Error("degenerate_variance") if either
/// side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Two-sided p-value for a Pearson correlation via the t transform
/// t = r * sqrt((n-2) / (1-r^2)) with n-2 degrees of freedom.
double pearson_p_value(double r, std::size_t n);

/// Standard normal quantile function.
double normal_quantile(double p);

double normal_cdf(double x);
double normal_pdf(double x);

}  // namespace itemlab::stats
