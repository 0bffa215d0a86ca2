#include "itemlab/ctt.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "itemlab/errors.hpp"
#include "itemlab/stats.hpp"

namespace itemlab {

const char* to_string(DifficultyClass c) {
  switch (c) {
    case DifficultyClass::Hard: return "hard";
    case DifficultyClass::Moderate: return "moderate";
    case DifficultyClass::Easy: return "easy";
  }
  return "?";
}

const char* to_string(DiscriminationClass c) {
  switch (c) {
    case DiscriminationClass::Low: return "low";
    case DiscriminationClass::Medium: return "medium";
    case DiscriminationClass::High: return "high";
  }
  return "?";
}

DifficultyClass classify_difficulty(double p, const CttThresholds& t) {
  if (!std::isfinite(p)) throw Error("non_finite", "difficulty P must be finite");
  if (p < t.hard_below) return DifficultyClass::Hard;
  if (p >= t.easy_at_least) return DifficultyClass::Easy;
  return DifficultyClass::Moderate;
}

DiscriminationClass classify_discrimination(double r, const CttThresholds& t) {
  if (!std::isfinite(r)) throw Error("non_finite", "discrimination r must be finite");
  if (r < t.low_below) return DiscriminationClass::Low;
  if (r >= t.high_at_least) return DiscriminationClass::High;
  return DiscriminationClass::Medium;
}

ScoredMatrix::ScoredMatrix(const ResponseDataset& data, const std::vector<bool>& retained) {
  if (retained.size() != data.n_participants())
    throw Error("size_mismatch", "retained mask does not match participant count");
  item_ids_ = data.item_ids();
  for (std::size_t j = 0; j < data.n_participants(); ++j) {
    if (!retained[j]) continue;
    ++n_participants_;
    for (std::size_t i = 0; i < data.n_items(); ++i)
      scores_.push_back(data.outcome(j, i) == Outcome::Correct ? 1.0 : 0.0);
  }
}

std::vector<double> ScoredMatrix::item_column(std::size_t item) const {
  std::vector<double> col(n_participants_);
  for (std::size_t j = 0; j < n_participants_; ++j) col[j] = at(j, item);
  return col;
}

std::vector<double> ScoredMatrix::total_scores() const {
  std::vector<double> tot(n_participants_, 0.0);
  for (std::size_t j = 0; j < n_participants_; ++j)
    for (std::size_t i = 0; i < n_items(); ++i) tot[j] += at(j, i);
  return tot;
}

double item_difficulty(const ScoredMatrix& m, std::size_t item) {
  if (m.n_participants() == 0) throw Error("empty_dataset", "no retained participants");
  double correct = 0.0;
  for (std::size_t j = 0; j < m.n_participants(); ++j) correct += m.at(j, item);
  return correct / static_cast<double>(m.n_participants());
}

double item_discrimination(const ScoredMatrix& m, std::size_t item) {
  if (m.n_participants() < 2)
    throw Error("empty_dataset", "item discrimination needs at least 2 participants");
  const std::vector<double> col = m.item_column(item);
  std::vector<double> rest = m.total_scores();
  for (std::size_t j = 0; j < rest.size(); ++j) rest[j] -= col[j];
  return stats::pearson(col, rest);  // throws degenerate_variance
}

std::vector<CttItemStats> ctt_item_stats(const ScoredMatrix& m, const CttThresholds& t) {
  std::vector<CttItemStats> out;
  out.reserve(m.n_items());
  for (std::size_t i = 0; i < m.n_items(); ++i) {
    CttItemStats s;
    s.item_id = m.item_ids()[i];
    s.p = item_difficulty(m, i);
    s.r = item_discrimination(m, i);
    s.difficulty = classify_difficulty(s.p, t);
    s.discrimination = classify_discrimination(s.r, t);
    out.push_back(std::move(s));
  }
  return out;
}

double cronbach_alpha(const ScoredMatrix& m) {
  const std::size_t k = m.n_items();
  if (k < 2) throw Error("empty_dataset", "alpha needs at least 2 items");
  if (m.n_participants() < 2) throw Error("empty_dataset", "alpha needs at least 2 participants");
  double sum_item_var = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum_item_var += stats::sample_variance(m.item_column(i));
  const double total_var = stats::sample_variance(m.total_scores());
  if (total_var == 0.0) throw Error("degenerate_variance", "total score has zero variance");
  const double kk = static_cast<double>(k);
  return kk / (kk - 1.0) * (1.0 - sum_item_var / total_var);
}

double standardized_alpha(const std::vector<std::vector<double>>& corr) {
  const std::size_t k = corr.size();
  if (k < 2) throw Error("empty_dataset", "alpha needs at least 2 items");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) sum += corr[i][j];
  const double rbar = sum / (0.5 * static_cast<double>(k) * static_cast<double>(k - 1));
  const double kk = static_cast<double>(k);
  return kk * rbar / (1.0 + (kk - 1.0) * rbar);
}

namespace {

// Clip negative eigenvalues and rescale back to unit diagonal. Only
// needed for pairwise-deletion matrices, which can be indefinite.
void smooth_to_psd(std::vector<std::vector<double>>& corr) {
  const std::size_t k = corr.size();
  Eigen::MatrixXd r(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) r(i, j) = corr[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
  if (eig.eigenvalues().minCoeff() >= -1e-12) return;
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(1e-8);
  Eigen::MatrixXd smoothed = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::VectorXd d = smoothed.diagonal().cwiseSqrt();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) corr[i][j] = smoothed(i, j) / (d(i) * d(j));
}

}  // namespace

std::vector<std::vector<double>> interitem_correlations(const ResponseDataset& data,
                                                        const std::vector<bool>& retained,
                                                        bool pairwise_deletion) {
  if (retained.size() != data.n_participants())
    throw Error("size_mismatch", "retained mask does not match participant count");
  const std::size_t k = data.n_items();
  std::vector<std::vector<double>> corr(k, std::vector<double>(k, 1.0));

  if (!pairwise_deletion) {
    ScoredMatrix m(data, retained);
    for (std::size_t i = 0; i < k; ++i) {
      const auto ci = m.item_column(i);
      for (std::size_t j = i + 1; j < k; ++j) {
        const double r = stats::pearson(ci, m.item_column(j));
        corr[i][j] = corr[j][i] = r;
      }
    }
    return corr;
  }

  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      std::vector<double> xi, xj;
      for (std::size_t p = 0; p < data.n_participants(); ++p) {
        if (!retained[p]) continue;
        const Outcome oi = data.outcome(p, i);
        const Outcome oj = data.outcome(p, j);
        if (oi == Outcome::Skip || oj == Outcome::Skip) continue;
        xi.push_back(oi == Outcome::Correct ? 1.0 : 0.0);
        xj.push_back(oj == Outcome::Correct ? 1.0 : 0.0);
      }
      if (xi.size() < 2)
        throw Error("degenerate_variance",
                    "pairwise deletion left fewer than 2 complete pairs for items '" +
                        data.item_ids()[i] + "' and '" + data.item_ids()[j] + "'");
      const double r = stats::pearson(xi, xj);
      corr[i][j] = corr[j][i] = r;
    }
  }
  smooth_to_psd(corr);
  return corr;
}

ReliabilityReport omega_from_correlations(const std::vector<std::vector<double>>& corr,
                                          const OmegaOptions& opt) {
  const std::size_t k = corr.size();
  if (k < 3) throw Error("empty_dataset", "omega_t needs at least 3 items");

  // Start from the scaled principal eigenvector, then solve the minres
  // stationarity equations lambda_k = sum_{j!=k} r_kj lambda_j / sum_{j!=k} lambda_j^2
  // by coordinate iteration, projecting loadings into [-1, 1].
  Eigen::MatrixXd r(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) r(i, j) = corr[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
  const double top = eig.eigenvalues()(k - 1);
  Eigen::VectorXd v = eig.eigenvectors().col(k - 1);
  if (v.sum() < 0.0) v = -v;
  std::vector<double> lambda(k);
  for (std::size_t i = 0; i < k; ++i)
    lambda[i] = std::clamp(v(i) * std::sqrt(std::max(top, 0.0)), -0.999, 0.999);

  auto residuals = [&](const std::vector<double>& l) {
    std::vector<double> res;
    res.reserve(k * (k - 1) / 2);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) res.push_back(corr[i][j] - l[i] * l[j]);
    return res;
  };

  std::vector<double> prev_res = residuals(lambda);
  int iter = 0;
  bool converged = false;
  for (; iter < opt.max_iterations; ++iter) {
    for (std::size_t i = 0; i < k; ++i) {
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j == i) continue;
        num += corr[i][j] * lambda[j];
        den += lambda[j] * lambda[j];
      }
      if (den > 0.0) lambda[i] = std::clamp(num / den, -1.0, 1.0);
    }
    std::vector<double> res = residuals(lambda);
    double max_change = 0.0;
    for (std::size_t t = 0; t < res.size(); ++t)
      max_change = std::max(max_change, std::fabs(res[t] - prev_res[t]));
    prev_res = std::move(res);
    if (max_change < opt.tolerance) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged)
    throw Error("non_convergent", "minres factor iteration did not converge within " +
                                      std::to_string(opt.max_iterations) + " iterations");

  ReliabilityReport rep;
  rep.iterations = iter;
  rep.loadings = lambda;
  // Heywood check: flag items whose unconstrained update would leave [-1, 1].
  for (std::size_t i = 0; i < k; ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      num += corr[i][j] * lambda[j];
      den += lambda[j] * lambda[j];
    }
    if (den > 0.0 && std::fabs(num / den) > 1.0 + 1e-10) rep.heywood = true;
  }
  rep.uniquenesses.resize(k);
  double sum_lambda = 0.0, sum_psi = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    rep.uniquenesses[i] = std::max(0.0, 1.0 - lambda[i] * lambda[i]);
    sum_lambda += lambda[i];
    sum_psi += rep.uniquenesses[i];
  }
  rep.omega_t = sum_lambda * sum_lambda / (sum_lambda * sum_lambda + sum_psi);
  return rep;
}

ReliabilityReport reliability(const ResponseDataset& data, const std::vector<bool>& retained,
                              const OmegaOptions& opt) {
  ScoredMatrix m(data, retained);
  ReliabilityReport rep = omega_from_correlations(
      interitem_correlations(data, retained, opt.pairwise_deletion), opt);
  rep.alpha = cronbach_alpha(m);
  return rep;
}

}  // namespace itemlab
