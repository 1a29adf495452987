#include "sisynth/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "sisynth/error.hpp"
#include "sisynth/text.hpp"

namespace sisynth {
namespace {

#include "default_topics.inc"

constexpr std::string_view kCriteriaHeader = "These are the criteria of different suicide risk level:";

struct LabelInfo {
  Label label;
  SchemaKind schema;
  std::string_view name;
  std::string_view display;
  std::string_view default_criterion;
};

// LowRisk and ModerateRisk prose is editable through with_criteria() or a
// criteria file; the defaults paraphrase the level names.
constexpr LabelInfo kLabels[] = {
    {Label::kNonSuicidal, SchemaKind::kBinary, "NonSuicidal", "Non Suicidal",
     "I do not see evidence that this person is at risk for suicide"},
    {Label::kSuicidal, SchemaKind::kBinary, "Suicidal", "Suicidal",
     "I believe this person is at high risk of attempting suicide in the near future."},
    {Label::kNoRisk, SchemaKind::kFourClass, "NoRisk", "No Risk",
     "I do not see evidence that this person is at risk for suicide"},
    {Label::kLowRisk, SchemaKind::kFourClass, "LowRisk", "Low Risk",
     "I believe this person is at low risk of attempting suicide"},
    {Label::kModerateRisk, SchemaKind::kFourClass, "ModerateRisk", "Moderate Risk",
     "I believe this person is at moderate risk of attempting suicide"},
    {Label::kHighRisk, SchemaKind::kFourClass, "HighRisk", "High Risk",
     "I believe this person is at high risk of attempting suicide in the near future."},
};

const LabelInfo& info(Label label) {
  return kLabels[static_cast<std::size_t>(label)];
}

bool is_slug(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
  });
}

}  // namespace

std::string_view to_string(SchemaKind kind) {
  return kind == SchemaKind::kBinary ? "binary" : "fourclass";
}

SchemaKind parse_schema_kind(std::string_view s) {
  const std::string key = fold_key(s);
  if (key == "binary") return SchemaKind::kBinary;
  if (key == "fourclass" || key == "multiclass" || key == "4class") return SchemaKind::kFourClass;
  throw Error(ErrorCode::kSchema, "unknown schema kind '" + std::string(s) + "'");
}

std::string_view label_name(Label label) { return info(label).name; }
std::string_view label_display_name(Label label) { return info(label).display; }
SchemaKind schema_of(Label label) { return info(label).schema; }

std::optional<Label> find_label(std::string_view name) {
  for (const auto& l : kLabels) {
    if (name == l.name || name == l.display) return l.label;
  }
  return std::nullopt;
}

Label parse_label(std::string_view name) {
  if (auto label = find_label(name)) return *label;
  throw Error(ErrorCode::kInvalidLabel, "unknown risk level '" + std::string(name) + "'");
}

LabelSchema LabelSchema::binary() { return of(SchemaKind::kBinary); }
LabelSchema LabelSchema::fourclass() { return of(SchemaKind::kFourClass); }

LabelSchema LabelSchema::of(SchemaKind kind) {
  std::vector<RiskLevel> levels;
  for (const auto& l : kLabels) {
    if (l.schema == kind) levels.push_back({kind, l.label, std::string(l.default_criterion)});
  }
  return LabelSchema(kind, std::move(levels));
}

LabelSchema LabelSchema::with_criteria(const std::map<Label, std::string>& criteria) const {
  LabelSchema copy = *this;
  for (const auto& [label, text] : criteria) {
    const std::size_t idx = index_of(label);
    if (trim(text).empty()) {
      throw Error(ErrorCode::kInvalidSpec,
                  "empty criterion for " + std::string(label_name(label)));
    }
    copy.levels_[idx].criterion = text;
  }
  return copy;
}

std::vector<Label> LabelSchema::labels() const {
  std::vector<Label> out;
  out.reserve(levels_.size());
  for (const auto& level : levels_) out.push_back(level.name);
  return out;
}

bool LabelSchema::contains(Label label) const {
  return std::any_of(levels_.begin(), levels_.end(),
                     [label](const RiskLevel& l) { return l.name == label; });
}

std::size_t LabelSchema::index_of(Label label) const {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i].name == label) return i;
  }
  throw Error(ErrorCode::kInvalidLabel, std::string(label_name(label)) + " is not a " +
                                            std::string(to_string(kind_)) + " level");
}

Label binarize(Label fourclass_level) {
  switch (fourclass_level) {
    case Label::kNoRisk:
    case Label::kLowRisk:
      return Label::kNonSuicidal;
    case Label::kModerateRisk:
    case Label::kHighRisk:
      return Label::kSuicidal;
    default:
      throw Error(ErrorCode::kInvalidLabel, "cannot binarize '" +
                                                std::string(label_name(fourclass_level)) +
                                                "': not a four-class level");
  }
}

std::string render_criteria(const LabelSchema& schema) {
  std::string out = " ";
  out += kCriteriaHeader;
  for (const auto& level : schema.levels()) {
    out += "\n    Risk Level=";
    out += label_display_name(level.name);
    out += ": ";
    out += level.criterion;
  }
  out += ' ';
  return out;
}

std::map<Label, std::string> load_criteria_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open criteria file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, "criteria file " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kConfig, "criteria file must hold a JSON object");
  std::map<Label, std::string> out;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string()) throw Error(ErrorCode::kConfig, "criterion for " + key + " must be a string");
    out[parse_label(key)] = value.get<std::string>();
  }
  return out;
}

void to_json(nlohmann::json& j, const Topic& topic) {
  j = nlohmann::json{{"id", topic.id},
                     {"display_name", topic.display_name},
                     {"description", topic.description},
                     {"citation_keys", topic.citation_keys}};
}

void from_json(const nlohmann::json& j, Topic& topic) {
  topic.id = j.at("id").get<std::string>();
  topic.display_name = j.at("display_name").get<std::string>();
  topic.description = j.value("description", std::string{});
  topic.citation_keys = j.value("citation_keys", std::vector<std::string>{});
}

TopicRegistry::TopicRegistry(std::vector<Topic> topics) : topics_(std::move(topics)) {
  std::set<std::string> seen;
  for (const auto& t : topics_) {
    if (!is_slug(t.id)) throw Error(ErrorCode::kConfig, "topic id '" + t.id + "' is not a lowercase slug");
    if (trim(t.display_name).empty()) throw Error(ErrorCode::kConfig, "topic '" + t.id + "' has no display name");
    if (!seen.insert(t.id).second) throw Error(ErrorCode::kConfig, "duplicate topic id '" + t.id + "'");
  }
}

TopicRegistry TopicRegistry::from_json(const nlohmann::json& array) {
  if (!array.is_array()) throw Error(ErrorCode::kConfig, "topic registry must be a JSON array");
  try {
    return TopicRegistry(array.get<std::vector<Topic>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("malformed topic registry: ") + e.what());
  }
}

TopicRegistry TopicRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open topic registry " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kConfig, "topic registry " + path.string() + ": " + e.what());
  }
}

const Topic* TopicRegistry::find(std::string_view key) const {
  const std::string folded = fold_key(key);
  for (const auto& t : topics_) {
    if (fold_key(t.id) == folded || fold_key(t.display_name) == folded) return &t;
  }
  return nullptr;
}

const TopicRegistry& default_registry() {
  static const TopicRegistry registry = TopicRegistry::from_json(nlohmann::json::parse(kDefaultTopicsJson));
  return registry;
}

std::vector<Topic> default_topics() { return default_registry().topics(); }

}  // namespace sisynth
