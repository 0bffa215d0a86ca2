#include "itemlab/itembank.hpp"

#include <algorithm>
#include <sstream>

#include "itemlab/errors.hpp"

namespace itemlab {

namespace {

struct EnumName {
  int value;
  const char* name;
};

constexpr EnumName kTechniqueNames[] = {
    {0, "color_mapping"},     {1, "volume_rendering"}, {2, "surface_rendering"},
    {3, "texture_based"},     {4, "integration_based"}, {5, "mixed_rendering"},
    {6, "glyph_mesh_plot"},   {7, "scientific_illustration"},
};

constexpr EnumName kFamilyNames[] = {
    {0, "search"},
    {1, "pattern_recognition"},
    {2, "spatial_understanding"},
    {3, "quantitative_estimation"},
    {4, "shape_description"},
};

constexpr EnumName kSubtaskNames[] = {
    {0, "presence_absence"},
    {1, "counting"},
    {2, "trend"},
    {3, "repetition"},
    {4, "absolute"},
    {5, "relative"},
    {6, "intersection"},
    {7, "absolute_estimation"},
    {8, "relative_estimation_binary"},
    {9, "relative_estimation_quantitative"},
    {10, "shape_description"},
};

template <std::size_t N>
int parse_enum(const EnumName (&names)[N], const std::string& s, const char* what) {
  for (const auto& n : names)
    if (s == n.name) return n.value;
  throw Error("unknown_enum_value", std::string("unknown ") + what + ": '" + s + "'");
}

}  // namespace

const char* to_string(Technique t) { return kTechniqueNames[static_cast<int>(t)].name; }
const char* to_string(TaskFamily f) { return kFamilyNames[static_cast<int>(f)].name; }
const char* to_string(TaskSubtask s) { return kSubtaskNames[static_cast<int>(s)].name; }
const char* to_string(ItemFormat f) { return f == ItemFormat::Mcq ? "mcq" : "tf"; }

Technique technique_from_string(const std::string& s) {
  return static_cast<Technique>(parse_enum(kTechniqueNames, s, "technique"));
}
TaskFamily task_family_from_string(const std::string& s) {
  return static_cast<TaskFamily>(parse_enum(kFamilyNames, s, "task family"));
}
TaskSubtask subtask_from_string(const std::string& s) {
  return static_cast<TaskSubtask>(parse_enum(kSubtaskNames, s, "task subtask"));
}
ItemFormat format_from_string(const std::string& s) {
  if (s == "mcq") return ItemFormat::Mcq;
  if (s == "tf") return ItemFormat::TrueFalse;
  throw Error("unknown_enum_value", "unknown item format: '" + s + "'");
}

TaskFamily family_of(TaskSubtask s) {
  switch (s) {
    case TaskSubtask::PresenceAbsence:
    case TaskSubtask::Counting:
      return TaskFamily::Search;
    case TaskSubtask::Trend:
    case TaskSubtask::Repetition:
      return TaskFamily::PatternRecognition;
    case TaskSubtask::SpatialAbsolute:
    case TaskSubtask::SpatialRelative:
    case TaskSubtask::Intersection:
      return TaskFamily::SpatialUnderstanding;
    case TaskSubtask::AbsoluteEstimation:
    case TaskSubtask::RelativeEstimationBinary:
    case TaskSubtask::RelativeEstimationQuantitative:
      return TaskFamily::QuantitativeEstimation;
    case TaskSubtask::ShapeDescription:
      return TaskFamily::ShapeDescription;
  }
  throw Error("unknown_enum_value", "invalid subtask");
}

ItemBank::ItemBank(std::vector<Item> items) : items_(std::move(items)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const Item& it = items_[i];
    if (it.item_id.empty()) throw Error("invalid_item", "item with empty id");
    if (!by_id_.emplace(it.item_id, i).second)
      throw Error("duplicate_item", "duplicate item id '" + it.item_id + "'");
    if (it.option_count < 2)
      throw Error("invalid_item", "item '" + it.item_id + "': option_count must be >= 2");
    if (it.format == ItemFormat::TrueFalse && it.option_count != 2)
      throw Error("invalid_item", "item '" + it.item_id + "': T/F items must have exactly 2 options");
    if (family_of(it.task_subtask) != it.task_family)
      throw Error("invalid_item", "item '" + it.item_id + "': subtask '" +
                                       std::string(to_string(it.task_subtask)) +
                                       "' does not belong to family '" +
                                       std::string(to_string(it.task_family)) + "'");
  }
}

bool ItemBank::contains(const std::string& item_id) const { return by_id_.count(item_id) > 0; }

const Item& ItemBank::at(const std::string& item_id) const {
  return items_[index_of(item_id)];
}

std::size_t ItemBank::index_of(const std::string& item_id) const {
  auto it = by_id_.find(item_id);
  if (it == by_id_.end()) throw Error("unknown_item", "unknown item id '" + item_id + "'");
  return it->second;
}

void ExpertRatingSet::add(const std::string& expert_id, const std::string& item_id, Rating r) {
  if (std::find(experts_.begin(), experts_.end(), expert_id) == experts_.end())
    experts_.push_back(expert_id);
  auto& per_item = ratings_[item_id];
  if (!per_item.emplace(expert_id, r).second)
    throw Error("duplicate_rating",
                "expert '" + expert_id + "' rated item '" + item_id + "' more than once");
}

bool ExpertRatingSet::has_item(const std::string& item_id) const {
  return ratings_.count(item_id) > 0;
}

int ExpertRatingSet::essential_count(const std::string& item_id) const {
  auto it = ratings_.find(item_id);
  if (it == ratings_.end()) throw Error("unknown_item", "no ratings for item '" + item_id + "'");
  const auto& per_item = it->second;
  std::vector<std::string> missing;
  for (const auto& e : experts_)
    if (per_item.find(e) == per_item.end()) missing.push_back(e);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "item '" << item_id << "' is missing ratings from expert(s):";
    for (const auto& e : missing) msg << " " << e;
    throw Error("incomplete_ratings", msg.str());
  }
  int n_e = 0;
  for (const auto& [expert, r] : per_item)
    if (r == Rating::Essential) ++n_e;
  return n_e;
}

ExpertRatingSet::Rating rating_from_string(const std::string& s) {
  if (s == "essential") return ExpertRatingSet::Rating::Essential;
  if (s == "useful") return ExpertRatingSet::Rating::UsefulNotEssential;
  if (s == "not_necessary") return ExpertRatingSet::Rating::NotNecessary;
  throw Error("unknown_enum_value", "unknown rating token: '" + s + "'");
}

double compute_cvr(const ExpertRatingSet& ratings, const std::string& item_id) {
  if (ratings.expert_count() == 0)
    throw Error("incomplete_ratings", "rating set has no experts");
  const double n = static_cast<double>(ratings.expert_count());
  const double n_e = static_cast<double>(ratings.essential_count(item_id));
  // (n_e - N/2) / (N/2) computed as (2 n_e - N) / N; one division keeps
  // the result exactly representable for the common small panels.
  return (2.0 * n_e - n) / n;
}

CvrScreenResult screen_by_cvr(const ItemBank& bank, const ExpertRatingSet& ratings,
                              double threshold) {
  CvrScreenResult out;
  for (const Item& it : bank.items()) {
    const double cvr = compute_cvr(ratings, it.item_id);
    out.cvr[it.item_id] = cvr;
    if (cvr < threshold)
      out.removed.push_back(it.item_id);
    else
      out.retained.push_back(it.item_id);
  }
  return out;
}

int BlueprintMatrix::total() const {
  int n = 0;
  for (const auto& row : cell)
    for (int c : row) n += c;
  return n;
}

BlueprintMatrix blueprint_coverage(const ItemBank& bank) {
  BlueprintMatrix m;
  for (const Item& it : bank.items())
    ++m.cell[static_cast<std::size_t>(it.technique)][static_cast<std::size_t>(it.task_subtask)];
  return m;
}

}  // namespace itemlab
