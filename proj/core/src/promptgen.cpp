#include "sisynth/promptgen.hpp"

#include <algorithm>

#include "sisynth/error.hpp"
#include "sisynth/hashing.hpp"
#include "sisynth/rng.hpp"
#include "sisynth/text.hpp"

namespace sisynth {
namespace {

std::string clean(std::string_view s) { return normalize_whitespace(ascii_normalize(s)); }

}  // namespace

void PromptSpec::validate() const {
  if (const auto* topics = std::get_if<WithTopics>(&topic_mode); topics && topics->topics.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "topic-oriented prompt needs at least one topic");
  }
  if (const auto* none = std::get_if<WithoutTopics>(&topic_mode); none && none->instance_count == 0) {
    throw Error(ErrorCode::kInvalidSpec, "instance count must be positive");
  }
  if (const auto* few = std::get_if<FewShot>(&shot); few && few->exemplars_per_class == 0) {
    throw Error(ErrorCode::kInvalidSpec, "few-shot prompts need at least one exemplar per class");
  }
}

nlohmann::json to_json(const PromptSpec& spec) {
  nlohmann::json j;
  j["schema"] = to_string(spec.schema.kind());
  nlohmann::json criteria = nlohmann::json::object();
  for (const auto& level : spec.schema.levels()) criteria[std::string(label_name(level.name))] = level.criterion;
  j["criteria"] = criteria;
  if (const auto* t = std::get_if<WithTopics>(&spec.topic_mode)) {
    nlohmann::json ids = nlohmann::json::array();
    for (const auto& topic : t->topics) ids.push_back(topic.id);
    j["topics"] = ids;
  } else {
    j["topics"] = nullptr;
    j["instance_count"] = std::get<WithoutTopics>(spec.topic_mode).instance_count;
  }
  j["shot_mode"] = to_string(spec.shot_mode());
  if (const auto* few = std::get_if<FewShot>(&spec.shot)) j["exemplars_per_class"] = few->exemplars_per_class;
  j["output_columns"] = kOutputColumns;
  return j;
}

PromptSpec prompt_spec_from_json(const nlohmann::json& j, const TopicRegistry& registry) {
  PromptSpec spec;
  try {
    spec.schema = LabelSchema::of(parse_schema_kind(j.value("schema", std::string("binary"))));
    if (j.contains("criteria") && j["criteria"].is_object()) {
      std::map<Label, std::string> criteria;
      for (const auto& [name, text] : j["criteria"].items()) criteria[parse_label(name)] = text.get<std::string>();
      spec.schema = spec.schema.with_criteria(criteria);
    }
    const auto topics = j.value("topics", nlohmann::json());
    if (topics.is_string() && topics.get<std::string>() == "default") {
      spec.topic_mode = WithTopics{registry.topics()};
    } else if (topics.is_array()) {
      WithTopics with;
      for (const auto& id : topics) {
        const Topic* t = registry.find(id.get<std::string>());
        if (!t) throw Error(ErrorCode::kInvalidSpec, "unknown topic '" + id.get<std::string>() + "'");
        with.topics.push_back(*t);
      }
      spec.topic_mode = std::move(with);
    } else {
      spec.topic_mode = WithoutTopics{j.value("instance_count", std::size_t{10})};
    }
    if (parse_shot_mode(j.value("shot_mode", std::string("zero_shot"))) == ShotMode::kFewShot) {
      spec.shot = FewShot{j.value("exemplars_per_class", std::size_t{2})};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("malformed prompt spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string render_zero_shot(const PromptSpec& spec) {
  spec.validate();
  std::string out;
  if (const auto* t = std::get_if<WithTopics>(&spec.topic_mode)) {
    out += "Your task is to generate a suicidal text for each of the following \"topics\" with different Risk levels.\n\n";
    for (std::size_t i = 0; i < t->topics.size(); ++i) {
      out += "    " + std::to_string(i + 1) + "-" + clean(t->topics[i].display_name) + "\n";
    }
    out += "\n";
  } else {
    const auto count = std::get<WithoutTopics>(spec.topic_mode).instance_count;
    out += "Your task is to generate " + std::to_string(count) + " suicidal texts with different Risk levels.\n\n";
  }
  out += "Provide the answers in JSON format with the following columns: ";
  for (std::size_t i = 0; i < kOutputColumns.size(); ++i) {
    if (i) out += ", ";
    out += kOutputColumns[i];
  }
  out += ".\n\n";
  out += "Risk level criteria: ```" + ascii_normalize(render_criteria(spec.schema)) + "```\n";
  return out;
}

std::string render_few_shot(const PromptSpec& spec, std::span<const Exemplar> exemplars) {
  spec.validate();
  const auto* few = std::get_if<FewShot>(&spec.shot);
  if (!few) throw Error(ErrorCode::kInvalidSpec, "render_few_shot needs a few-shot spec");
  const std::size_t k = few->exemplars_per_class;

  std::vector<std::vector<const Exemplar*>> by_class(spec.schema.size());
  for (const auto& e : exemplars) {
    if (!spec.schema.contains(e.label)) {
      throw Error(ErrorCode::kInvalidExemplars, "exemplar label " + std::string(label_name(e.label)) +
                                                    " is not in the " + std::string(to_string(spec.schema.kind())) +
                                                    " schema");
    }
    if (trim(e.text).empty()) throw Error(ErrorCode::kInvalidExemplars, "exemplar text is empty");
    by_class[spec.schema.index_of(e.label)].push_back(&e);
  }
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].size() != k) {
      throw Error(ErrorCode::kInvalidExemplars,
                  "expected " + std::to_string(k) + " exemplars for " + std::string(label_name(spec.schema.at(c))) +
                      ", got " + std::to_string(by_class[c].size()));
    }
  }

  std::string out = "Here are some examples of texts and their risk levels:\n\n";
  std::size_t n = 0;
  for (const auto& group : by_class) {
    for (const Exemplar* e : group) {
      out += "Example " + std::to_string(++n) + ":\n";
      out += "Text: \"\"\"" + clean(e->text) + "\"\"\"\n";
      out += "Risk level: " + std::string(label_display_name(e->label)) + "\n\n";
    }
  }
  out += render_zero_shot(spec);
  return out;
}

std::string render_prompt(const PromptSpec& spec, std::span<const Exemplar> exemplars) {
  if (spec.shot_mode() == ShotMode::kFewShot) return render_few_shot(spec, exemplars);
  return render_zero_shot(spec);
}

std::vector<Exemplar> select_exemplars(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  const LabelSchema schema = LabelSchema::of(dataset.schema());
  std::vector<std::vector<const TextRecord*>> by_class(schema.size());
  for (const auto& r : dataset.records()) by_class[schema.index_of(r.label)].push_back(&r);

  const std::string hash = dataset.content_hash();
  std::vector<Exemplar> out;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.size() < k) {
      throw Error(ErrorCode::kInsufficientClass,
                  "class " + std::string(label_name(schema.at(c))) + " has " + std::to_string(members.size()) +
                      " records, " + std::to_string(k) + " exemplars requested");
    }
    std::sort(members.begin(), members.end(),
              [](const TextRecord* a, const TextRecord* b) { return a->id < b->id; });
    Rng rng(mix_seed(seed, hash + "/exemplars/" + std::to_string(c) + "/" + std::to_string(k)));
    rng.shuffle(std::span(members));
    for (std::size_t i = 0; i < k; ++i) out.push_back({members[i]->text, members[i]->label, members[i]->id});
  }
  return out;
}

std::string prompt_hash(std::string_view prompt) { return sha256_hex(prompt); }

}  // namespace sisynth
