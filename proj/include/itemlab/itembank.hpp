#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace itemlab {

enum class Technique {
  ColorMapping,
  VolumeRendering,
  SurfaceRendering,
  TextureBased,
  IntegrationBased,
  MixedRendering,
  GlyphMeshPlot,
  ScientificIllustration,
};
inline constexpr std::size_t kTechniqueCount = 8;

enum class TaskFamily {
  Search,
  PatternRecognition,
  SpatialUnderstanding,
  QuantitativeEstimation,
  ShapeDescription,
};
inline constexpr std::size_t kTaskFamilyCount = 5;

enum class TaskSubtask {
  PresenceAbsence,
  Counting,
  Trend,
  Repetition,
  SpatialAbsolute,
  SpatialRelative,
  Intersection,
  AbsoluteEstimation,
  RelativeEstimationBinary,
  RelativeEstimationQuantitative,
  ShapeDescription,
};
inline constexpr std::size_t kSubtaskCount = 11;

enum class ItemFormat { Mcq, TrueFalse };

const char* to_string(Technique t);
const char* to_string(TaskFamily f);
const char* to_string(TaskSubtask s);
const char* to_string(ItemFormat f);

Technique technique_from_string(const std::string& s);
TaskFamily task_family_from_string(const std::string& s);
TaskSubtask subtask_from_string(const std::string& s);
ItemFormat format_from_string(const std::string& s);

/// Family a subtask belongs to in the closed two-level task taxonomy.
TaskFamily family_of(TaskSubtask s);

struct Item {
  std::string item_id;
  int visualization_id = 0;
  Technique technique = Technique::ColorMapping;
  TaskFamily task_family = TaskFamily::Search;
  TaskSubtask task_subtask = TaskSubtask::PresenceAbsence;
  ItemFormat format = ItemFormat::Mcq;
  int option_count = 4;  // excludes the Skip option
  std::string correct_key;
  std::string stem;  // optional, not used by analysis
};

class ItemBank {
 public:
  ItemBank() = default;

  /// Validates per-item invariants (option_count >= 2, T/F implies
  /// option_count == 2, family matches subtask, unique ids).
  explicit ItemBank(std::vector<Item> items);

  const std::vector<Item>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool contains(const std::string& item_id) const;
  const Item& at(const std::string& item_id) const;
  std::size_t index_of(const std::string& item_id) const;

 private:
  std::vector<Item> items_;
  std::map<std::string, std::size_t> by_id_;
};

/// One expert panel's essentiality judgments over a bank.
class ExpertRatingSet {
 public:
  enum class Rating { Essential, UsefulNotEssential, NotNecessary };

  ExpertRatingSet() = default;

  void add(const std::string& expert_id, const std::string& item_id, Rating r);

  std::size_t expert_count() const { return experts_.size(); }
  const std::vector<std::string>& experts() const { return experts_; }

  /// Count of "essential" ratings for an item. Throws if any panel
  /// member has not rated the item (message names the missing experts).
  int essential_count(const std::string& item_id) const;

  bool has_item(const std::string& item_id) const;

 private:
  std::vector<std::string> experts_;  // discovery order
  // item -> expert -> rating
  std::map<std::string, std::map<std::string, Rating>> ratings_;
};

ExpertRatingSet::Rating rating_from_string(const std::string& s);

/// Lawshe content validity ratio (n_e - N/2) / (N/2) for one item.
double compute_cvr(const ExpertRatingSet& ratings, const std::string& item_id);

struct CvrScreenResult {
  std::vector<std::string> retained;
  std::vector<std::string> removed;
  std::map<std::string, double> cvr;
};

/// Partitions the bank by CVR: removed iff CVR strictly below
/// `threshold`; ties at the threshold are retained.
CvrScreenResult screen_by_cvr(const ItemBank& bank, const ExpertRatingSet& ratings,
                              double threshold = 0.0);

/// technique x subtask counts of items instantiating each pairing.
struct BlueprintMatrix {
  std::array<std::array<int, kSubtaskCount>, kTechniqueCount> cell{};

  int at(Technique t, TaskSubtask s) const {
    return cell[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)];
  }
  int total() const;
};

BlueprintMatrix blueprint_coverage(const ItemBank& bank);

}  // namespace itemlab
