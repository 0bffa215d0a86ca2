#include "itemlab/responses.hpp"

#include <algorithm>
#include <cmath>

#include "itemlab/errors.hpp"
#include "itemlab/stats.hpp"

namespace itemlab {

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Correct: return "correct";
    case Outcome::Incorrect: return "incorrect";
    case Outcome::Skip: return "skip";
  }
  return "?";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "correct") return Outcome::Correct;
  if (s == "incorrect") return Outcome::Incorrect;
  if (s == "skip") return Outcome::Skip;
  throw Error("malformed_outcome", "unknown outcome token: '" + s + "'");
}

ResponseDataset::ResponseDataset(std::vector<std::string> item_ids,
                                 std::vector<ParticipantMeta> participants,
                                 std::vector<Outcome> outcomes, std::vector<double> rt_ms)
    : item_ids_(std::move(item_ids)),
      participants_(std::move(participants)),
      outcomes_(std::move(outcomes)),
      rt_ms_(std::move(rt_ms)) {
  const std::size_t cells = item_ids_.size() * participants_.size();
  if (outcomes_.size() != cells || rt_ms_.size() != cells)
    throw Error("incomplete_matrix", "outcome matrix does not cover every (participant, item) cell");
}

std::size_t ResponseDataset::participant_index(const std::string& participant_id) const {
  for (std::size_t j = 0; j < participants_.size(); ++j)
    if (participants_[j].participant_id == participant_id) return j;
  throw Error("unknown_participant", "unknown participant id '" + participant_id + "'");
}

std::vector<std::size_t> ExclusionReport::retained_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < flags.size(); ++j)
    if (flags[j].retained) out.push_back(j);
  return out;
}

ExclusionReport apply_exclusions(const ResponseDataset& data, const ExclusionConfig& config) {
  const std::size_t n = data.n_participants();
  const std::size_t items = data.n_items();
  if (n == 0 || items == 0) throw Error("empty_dataset", "exclusions need a nonempty dataset");

  ExclusionReport report;
  report.flags.resize(n);

  const int clicker_threshold =
      static_cast<int>(std::ceil(config.clicker_fraction * static_cast<double>(items)));

  for (std::size_t j = 0; j < n; ++j) {
    ParticipantFlags& f = report.flags[j];
    const ParticipantMeta& meta = data.participants()[j];
    f.device_fail = !meta.device_ok;
    f.attention_fail = meta.attention_correct < config.attention_min_correct;

    int fast = 0, skips = 0;
    for (std::size_t i = 0; i < items; ++i) {
      if (data.rt_ms(j, i) < config.fast_rt_ms) ++fast;
      if (data.outcome(j, i) == Outcome::Skip) ++skips;
    }
    f.random_clicker = fast > clicker_threshold;
    f.high_skip_25pct =
        static_cast<double>(skips) > config.high_skip_fraction * static_cast<double>(items);
  }

  // Completion-time screening runs on the pool that survives the device
  // and clicker checks.
  std::vector<double> pool_times;
  for (std::size_t j = 0; j < n; ++j)
    if (!report.flags[j].device_fail && !report.flags[j].random_clicker)
      pool_times.push_back(data.participants()[j].total_time_s);

  if (!pool_times.empty()) {
    std::sort(pool_times.begin(), pool_times.end());
    report.q1 = stats::quantile_sorted(pool_times, 0.25);
    report.q3 = stats::quantile_sorted(pool_times, 0.75);
    report.iqr = report.q3 - report.q1;
    report.lower_fence = report.q1 - 1.5 * report.iqr;
    report.short_time_cutoff_s = stats::quantile_sorted(pool_times, config.short_time_quantile);
  }

  for (std::size_t j = 0; j < n; ++j) {
    ParticipantFlags& f = report.flags[j];
    if (!pool_times.empty())
      f.short_time_5pct = data.participants()[j].total_time_s < report.short_time_cutoff_s;
    f.retained = !f.device_fail && !f.random_clicker && !f.attention_fail &&
                 !(f.short_time_5pct && f.high_skip_25pct);
    if (f.retained) ++report.n_retained;
  }
  return report;
}

ScoreRecord score(const ResponseDataset& data, const ItemBank& bank,
                  const std::string& participant_id) {
  const std::size_t j = data.participant_index(participant_id);
  ScoreRecord rec;
  double penalty = 0.0;
  for (std::size_t i = 0; i < data.n_items(); ++i) {
    switch (data.outcome(j, i)) {
      case Outcome::Correct:
        ++rec.correct;
        break;
      case Outcome::Incorrect: {
        ++rec.incorrect;
        const int k = bank.at(data.item_ids()[i]).option_count;
        penalty += 1.0 / static_cast<double>(k - 1);
        break;
      }
      case Outcome::Skip:
        ++rec.skip_count;
        break;
    }
  }
  rec.raw_score = rec.correct;
  rec.corrected_score = static_cast<double>(rec.correct) - penalty;
  return rec;
}

Descriptives descriptives(const ResponseDataset& data, const ItemBank& bank,
                          const std::vector<bool>& retained) {
  if (retained.size() != data.n_participants())
    throw Error("size_mismatch", "retained mask does not match participant count");

  std::vector<double> raw, corrected, times;
  std::vector<double> item_skips(data.n_items(), 0.0);
  std::size_t total_skips = 0;

  for (std::size_t j = 0; j < data.n_participants(); ++j) {
    if (!retained[j]) continue;
    const ScoreRecord rec = score(data, bank, data.participants()[j].participant_id);
    raw.push_back(rec.raw_score);
    corrected.push_back(rec.corrected_score);
    times.push_back(data.participants()[j].total_time_s);
    total_skips += static_cast<std::size_t>(rec.skip_count);
    for (std::size_t i = 0; i < data.n_items(); ++i)
      if (data.outcome(j, i) == Outcome::Skip) item_skips[i] += 1.0;
  }
  if (raw.empty()) throw Error("empty_dataset", "no retained participants");

  Descriptives d;
  d.n_retained = raw.size();
  const double nr = static_cast<double>(d.n_retained);
  auto fill = [&](std::span<const double> v, double& mn, double& mx, double& mean, double& sd) {
    mn = *std::min_element(v.begin(), v.end());
    mx = *std::max_element(v.begin(), v.end());
    mean = stats::mean(v);
    sd = v.size() > 1 ? stats::sample_sd(v) : 0.0;
  };
  fill(raw, d.raw_min, d.raw_max, d.raw_mean, d.raw_sd);
  fill(corrected, d.corrected_min, d.corrected_max, d.corrected_mean, d.corrected_sd);
  fill(times, d.time_min_s, d.time_max_s, d.time_mean_s, d.time_sd_s);
  d.overall_skip_rate =
      static_cast<double>(total_skips) / (nr * static_cast<double>(data.n_items()));
  d.mean_raw_minus_corrected = d.raw_mean - d.corrected_mean;
  d.item_skip_rate.resize(data.n_items());
  for (std::size_t i = 0; i < data.n_items(); ++i) d.item_skip_rate[i] = item_skips[i] / nr;
  (void)bank;
  return d;
}

}  // namespace itemlab
