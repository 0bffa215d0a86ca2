#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "itemlab/itembank.hpp"

namespace itemlab {

enum class Outcome : std::uint8_t { Correct, Incorrect, Skip };

const char* to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct ParticipantMeta {
  std::string participant_id;
  double total_time_s = 0.0;
  int attention_correct = 0;  // of 3 attention checks
  bool device_ok = true;
};

/// Complete participant x item outcome matrix with per-cell response
/// times. Item order follows the bank; participant order follows the
/// participants file.
class ResponseDataset {
 public:
  ResponseDataset() = default;
  ResponseDataset(std::vector<std::string> item_ids, std::vector<ParticipantMeta> participants,
                  std::vector<Outcome> outcomes, std::vector<double> rt_ms);

  std::size_t n_items() const { return item_ids_.size(); }
  std::size_t n_participants() const { return participants_.size(); }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  const std::vector<ParticipantMeta>& participants() const { return participants_; }

  Outcome outcome(std::size_t participant, std::size_t item) const {
    return outcomes_[participant * n_items() + item];
  }
  double rt_ms(std::size_t participant, std::size_t item) const {
    return rt_ms_[participant * n_items() + item];
  }

  std::size_t participant_index(const std::string& participant_id) const;

 private:
  std::vector<std::string> item_ids_;
  std::vector<ParticipantMeta> participants_;
  std::vector<Outcome> outcomes_;  // row-major [participant][item]
  std::vector<double> rt_ms_;
};

struct ExclusionConfig {
  double fast_rt_ms = 10000.0;        // response faster than this is "fast"
  double clicker_fraction = 0.33;     // flag if fast items > ceil(frac * items)
  double short_time_quantile = 0.05;  // shortest-5% completion time flag
  double high_skip_fraction = 0.25;   // flag if skip fraction strictly above
  int attention_min_correct = 2;
};

struct ParticipantFlags {
  bool device_fail = false;
  bool random_clicker = false;
  bool short_time_5pct = false;
  bool high_skip_25pct = false;
  bool attention_fail = false;
  bool retained = true;
};

struct ExclusionReport {
  std::vector<ParticipantFlags> flags;  // parallel to dataset participants
  // Completion-time statistics over the post-device, post-clicker pool.
  double q1 = 0.0, q3 = 0.0, iqr = 0.0, lower_fence = 0.0;
  double short_time_cutoff_s = 0.0;
  std::size_t n_retained = 0;

  std::vector<std::size_t> retained_indices() const;
};

/// Applies the participant exclusion pipeline: device check, random
/// clickers (fast responses on more than ceil(clicker_fraction * items)
/// items), attention failures, and the two-criterion low-effort rule
/// (shortest-5% completion time AND high skip rate; only participants
/// meeting both are dropped). The Tukey lower fence Q1 - 1.5*IQR is
/// computed on the same pool and reported for diagnostics only.
ExclusionReport apply_exclusions(const ResponseDataset& data,
                                 const ExclusionConfig& config = {});

struct ScoreRecord {
  int correct = 0;     // R
  int incorrect = 0;   // W
  int skip_count = 0;
  int raw_score = 0;   // = R
  double corrected_score = 0.0;  // R - sum of 1/(k_i - 1) over wrong items
};

/// Correction-for-guessing score using each item's own option count.
/// Skips are never penalized.
ScoreRecord score(const ResponseDataset& data, const ItemBank& bank,
                  const std::string& participant_id);

struct Descriptives {
  std::size_t n_retained = 0;
  double raw_min = 0, raw_max = 0, raw_mean = 0, raw_sd = 0;
  double corrected_min = 0, corrected_max = 0, corrected_mean = 0, corrected_sd = 0;
  double time_min_s = 0, time_max_s = 0, time_mean_s = 0, time_sd_s = 0;
  double overall_skip_rate = 0;
  double mean_raw_minus_corrected = 0;
  std::vector<double> item_skip_rate;  // per item, retained participants
};

/// Score and time summaries over the retained participants.
Descriptives descriptives(const ResponseDataset& data, const ItemBank& bank,
                          const std::vector<bool>& retained);

}  // namespace itemlab
