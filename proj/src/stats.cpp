#include "itemlab/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "itemlab/errors.hpp"

namespace itemlab::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw Error("empty_input", "mean of empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw Error("empty_input", "variance needs at least 2 values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error("empty_input", "quantile of empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::span<const double> x, double p) {
  std::vector<double> copy(x.begin(), x.end());
  std::sort(copy.begin(), copy.end());
  return quantile_sorted(copy, p);
}

double median(std::span<const double> x) { return quantile(x, 0.5); }

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("size_mismatch", "pearson: size mismatch");
  if (x.size() < 2) throw Error("empty_input", "pearson needs at least 2 pairs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw Error("degenerate_variance", "pearson: zero variance on one side");
  return sxy / std::sqrt(sxx * syy);
}

double pearson_p_value(double r, std::size_t n) {
  if (n < 3) throw Error("empty_input", "p-value needs n >= 3");
  const double df = static_cast<double>(n - 2);
  const double denom = 1.0 - r * r;
  if (denom <= 0.0) return 0.0;
  const double t = std::fabs(r) * std::sqrt(df / denom);
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

double normal_quantile(double p) {
  static const boost::math::normal dist;
  return boost::math::quantile(dist, p);
}

double normal_cdf(double x) {
  static const boost::math::normal dist;
  return boost::math::cdf(dist, x);
}

double normal_pdf(double x) {
  static const boost::math::normal dist;
  return boost::math::pdf(dist, x);
}

}  // namespace itemlab::stats
