#pragma once

#include <string>
#include <vector>

#include "itemlab/responses.hpp"

namespace itemlab {

enum class DifficultyClass { Hard, Moderate, Easy };
enum class DiscriminationClass { Low, Medium, High };

const char* to_string(DifficultyClass c);
const char* to_string(DiscriminationClass c);

struct CttThresholds {
  double hard_below = 0.50;     // Hard iff P < hard_below
  double easy_at_least = 0.85;  // Easy iff P >= easy_at_least
  double low_below = 0.10;      // Low iff r < low_below
  double high_at_least = 0.30;  // High iff r >= high_at_least
};

struct CttItemStats {
  std::string item_id;
  double p = 0.0;  // proportion correct
  double r = 0.0;  // corrected item-total correlation
  DifficultyClass difficulty = DifficultyClass::Moderate;
  DiscriminationClass discrimination = DiscriminationClass::Medium;
};

DifficultyClass classify_difficulty(double p, const CttThresholds& t = {});
DiscriminationClass classify_discrimination(double r, const CttThresholds& t = {});

/// 0/1 item-score matrix over the retained participants; skips score 0.
class ScoredMatrix {
 public:
  ScoredMatrix(const ResponseDataset& data, const std::vector<bool>& retained);

  std::size_t n_participants() const { return n_participants_; }
  std::size_t n_items() const { return item_ids_.size(); }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  double at(std::size_t participant, std::size_t item) const {
    return scores_[participant * n_items() + item];
  }
  std::vector<double> item_column(std::size_t item) const;
  std::vector<double> total_scores() const;

 private:
  std::vector<std::string> item_ids_;
  std::size_t n_participants_ = 0;
  std::vector<double> scores_;
};

/// Proportion of retained participants answering the item correctly;
/// skips count against the item (they stay in the denominator).
double item_difficulty(const ScoredMatrix& m, std::size_t item);

/// Corrected item-total correlation: Pearson correlation of the item
/// score with the total score excluding that item. Throws
/// Error("degenerate_variance") instead of returning NaN.
double item_discrimination(const ScoredMatrix& m, std::size_t item);

std::vector<CttItemStats> ctt_item_stats(const ScoredMatrix& m, const CttThresholds& t = {});

/// Cronbach's alpha on the 0/1 scores, k/(k-1) * (1 - sum(var_i)/var_total),
/// sample variances with denominator n-1.
double cronbach_alpha(const ScoredMatrix& m);

/// Standardized alpha from a correlation matrix: k*rbar / (1 + (k-1)*rbar).
double standardized_alpha(const std::vector<std::vector<double>>& corr);

struct ReliabilityReport {
  double alpha = 0.0;
  double omega_t = 0.0;
  std::vector<double> loadings;      // lambda_i
  std::vector<double> uniquenesses;  // psi_i = 1 - lambda_i^2
  bool heywood = false;              // a loading had to be clamped to +/-1
  int iterations = 0;
};

struct OmegaOptions {
  bool pairwise_deletion = false;  // skip cells dropped pairwise instead of scored 0
  int max_iterations = 500;
  double tolerance = 1e-8;  // max |change| in off-diagonal residuals
};

/// Pearson inter-item correlation matrix of the 0/1 scores. With
/// pairwise deletion, skip cells are excluded pair-by-pair and the
/// result is smoothed to positive semidefinite if needed.
std::vector<std::vector<double>> interitem_correlations(const ResponseDataset& data,
                                                        const std::vector<bool>& retained,
                                                        bool pairwise_deletion);

/// Single-common-factor fit by minimum-residual iteration on a
/// correlation matrix; omega_t = (sum lambda)^2 / ((sum lambda)^2 + sum psi).
ReliabilityReport omega_from_correlations(const std::vector<std::vector<double>>& corr,
                                          const OmegaOptions& opt = {});

/// Full reliability report from response data: Cronbach alpha plus
/// McDonald omega_t from a minres single-factor solution.
ReliabilityReport reliability(const ResponseDataset& data, const std::vector<bool>& retained,
                              const OmegaOptions& opt = {});

}  // namespace itemlab
