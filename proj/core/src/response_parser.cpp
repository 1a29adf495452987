#include "sisynth/response_parser.hpp"

#include <algorithm>
#include <array>
#include <span>

#include "sisynth/text.hpp"

namespace sisynth {
namespace {

std::optional<nlohmann::json> parse_structured(std::string_view text) {
  auto doc = nlohmann::json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !(doc.is_array() || doc.is_object())) return std::nullopt;
  return doc;
}

std::vector<std::string_view> fenced_blocks(std::string_view text) {
  std::vector<std::string_view> blocks;
  std::size_t pos = 0;
  while ((pos = text.find("```", pos)) != std::string_view::npos) {
    std::size_t body = pos + 3;
    const std::size_t eol = text.find('\n', body);
    // Skip an info string such as "json" on the opening fence line.
    if (eol != std::string_view::npos) {
      const auto info = text.substr(body, eol - body);
      if (info.find_first_of("[{") == std::string_view::npos) body = eol + 1;
    }
    const std::size_t close = text.find("```", body);
    if (close == std::string_view::npos) {
      blocks.push_back(text.substr(body));
      break;
    }
    blocks.push_back(text.substr(body, close - body));
    pos = close + 3;
  }
  return blocks;
}

// Span [start, end] of the balanced bracket group opened at `start`, honoring
// JSON string literals, or nullopt when the group never closes cleanly.
std::optional<std::size_t> balanced_end(std::string_view text, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_string = true;
        break;
      case '[':
      case '{':
        stack.push_back(c);
        break;
      case ']':
      case '}':
        if (stack.empty() || (c == ']' ? '[' : '{') != stack.back()) return std::nullopt;
        stack.pop_back();
        if (stack.empty()) return i;
        break;
      default:
        break;
    }
  }
  return std::nullopt;
}

std::vector<nlohmann::json> candidates_of(const nlohmann::json& payload) {
  if (payload.is_array()) return {payload.begin(), payload.end()};
  static constexpr std::array<const char*, 7> kContainerKeys = {"data", "records", "answers", "results",
                                                                "texts", "items", "responses"};
  for (const char* key : kContainerKeys) {
    if (auto it = payload.find(key); it != payload.end() && it->is_array()) return {it->begin(), it->end()};
  }
  // A lone wrapper object holding an array of objects under any other key.
  if (payload.size() == 1 && payload.begin()->is_array()) return {payload.begin()->begin(), payload.begin()->end()};
  return {payload};
}

const nlohmann::json* find_folded(const nlohmann::json& obj, std::initializer_list<std::string_view> keys) {
  for (std::string_view want : keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (fold_key(it.key()) == want) return &it.value();
    }
  }
  return nullptr;
}

struct Synonym {
  std::string_view folded;
  Label label;
};

constexpr Synonym kBinarySynonyms[] = {
    {"notsuicidal", Label::kNonSuicidal}, {"nonsuicide", Label::kNonSuicidal},
    {"notatrisk", Label::kNonSuicidal},   {"norisk", Label::kNonSuicidal},
    {"lowrisk", Label::kNonSuicidal},     {"0", Label::kNonSuicidal},
    {"suicide", Label::kSuicidal},        {"atrisk", Label::kSuicidal},
    {"moderaterisk", Label::kSuicidal},   {"highrisk", Label::kSuicidal},
    {"1", Label::kSuicidal},
};

constexpr Synonym kFourClassSynonyms[] = {
    {"none", Label::kNoRisk},           {"no", Label::kNoRisk},
    {"nonsuicidal", Label::kNoRisk},    {"low", Label::kLowRisk},
    {"moderate", Label::kModerateRisk}, {"medium", Label::kModerateRisk},
    {"mediumrisk", Label::kModerateRisk}, {"high", Label::kHighRisk},
    {"severe", Label::kHighRisk},       {"severerisk", Label::kHighRisk},
};

}  // namespace

std::string_view to_string(RecordFlag flag) {
  switch (flag) {
    case RecordFlag::kRepaired: return "repaired";
    case RecordFlag::kLabelCoerced: return "label_coerced";
    case RecordFlag::kTopicUnknown: return "topic_unknown";
  }
  return "";
}

void ParseReport::merge(const ParseReport& other) {
  completions += other.completions;
  no_payload += other.no_payload;
  candidates += other.candidates;
  accepted += other.accepted;
  repaired += other.repaired;
  rejected += other.rejected;
  for (const auto& [reason, n] : other.reasons) reasons[reason] += n;
}

nlohmann::json to_json(const ParseReport& r) {
  return {{"completions", r.completions}, {"no_payload", r.no_payload}, {"candidates", r.candidates},
          {"accepted", r.accepted},       {"repaired", r.repaired},     {"rejected", r.rejected},
          {"reasons", r.reasons}};
}

ParseReport parse_report_from_json(const nlohmann::json& j) {
  ParseReport r;
  r.completions = j.value("completions", std::size_t{0});
  r.no_payload = j.value("no_payload", std::size_t{0});
  r.candidates = j.at("candidates").get<std::size_t>();
  r.accepted = j.at("accepted").get<std::size_t>();
  r.repaired = j.at("repaired").get<std::size_t>();
  r.rejected = j.at("rejected").get<std::size_t>();
  r.reasons = j.value("reasons", std::map<std::string, std::size_t>{});
  return r;
}

Payload extract_payload(std::string_view response_text) {
  if (auto doc = parse_structured(response_text)) return {std::move(*doc), false};

  for (std::string_view block : fenced_blocks(response_text)) {
    if (auto doc = parse_structured(block)) return {std::move(*doc), true};
  }

  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t i = 0; i < response_text.size(); ++i) {
    if (response_text[i] != '[' && response_text[i] != '{') continue;
    if (auto end = balanced_end(response_text, i)) spans.emplace_back(i, *end);
  }
  std::stable_sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) {
    return (a.second - a.first) > (b.second - b.first);
  });
  for (const auto& [b, e] : spans) {
    if (auto doc = parse_structured(response_text.substr(b, e - b + 1))) return {std::move(*doc), true};
  }
  throw NoPayloadError("no JSON payload found in response", std::string(response_text));
}

std::optional<CoercedLabel> coerce_label(std::string_view raw, const LabelSchema& schema) {
  for (Label l : schema.labels()) {
    if (raw == label_name(l) || raw == label_display_name(l)) return CoercedLabel{l, false};
  }
  std::string folded = fold_key(raw);
  for (std::string_view prefix : {"risklevel=", "risklevel:", "risk="}) {
    if (folded.rfind(prefix, 0) == 0) folded.erase(0, prefix.size());
  }
  while (!folded.empty() && (folded.back() == '.' || folded.back() == '"' || folded.back() == '\'')) folded.pop_back();
  while (!folded.empty() && (folded.front() == '"' || folded.front() == '\'')) folded.erase(0, 1);
  for (Label l : schema.labels()) {
    if (folded == fold_key(label_name(l))) return CoercedLabel{l, true};
  }
  const auto synonyms = schema.kind() == SchemaKind::kBinary ? std::span<const Synonym>(kBinarySynonyms)
                                                             : std::span<const Synonym>(kFourClassSynonyms);
  for (const auto& s : synonyms) {
    if (folded == s.folded) return CoercedLabel{s.label, true};
  }
  return std::nullopt;
}

ParseResult parse_completion(const RawCompletion& completion, const PromptSpec& spec,
                             const TopicRegistry& taxonomy, const ParseOptions& options) {
  ParseResult result;
  auto& report = result.report;
  report.completions = 1;

  Payload payload;
  try {
    payload = extract_payload(completion.response_text);
  } catch (const NoPayloadError&) {
    report.no_payload = 1;
    return result;
  }

  const auto reject_with = [&](std::string_view reason) {
    ++report.rejected;
    ++report.reasons[std::string(reason)];
  };

  for (const auto& candidate : candidates_of(payload.value)) {
    ++report.candidates;
    if (!candidate.is_object()) {
      reject_with(reject::kNotObject);
      continue;
    }
    const nlohmann::json* text = find_folded(candidate, {"text"});
    if (!text || !text->is_string()) {
      reject_with(reject::kMissingText);
      continue;
    }
    std::string body = trim(text->get<std::string>());
    if (body.empty()) {
      reject_with(reject::kMissingText);
      continue;
    }
    if (utf8_length(body) < options.min_text_length) {
      reject_with(reject::kTextTooShort);
      continue;
    }
    const nlohmann::json* label = find_folded(candidate, {"risklevel", "label"});
    if (!label || label->is_null() || label->is_object() || label->is_array()) {
      reject_with(reject::kMissingLabel);
      continue;
    }
    const std::string raw_label = label->is_string() ? label->get<std::string>() : label->dump();
    const auto coerced = coerce_label(raw_label, spec.schema);
    if (!coerced) {
      reject_with(reject::kUnknownLabel);
      continue;
    }

    ParsedRecord record;
    record.text = std::move(body);
    record.raw_label = raw_label;
    record.label = coerced->label;
    record.provenance = {completion.provider, completion.job_id, completion.request_index};
    if (payload.repaired) record.flags.insert(RecordFlag::kRepaired);
    if (coerced->coerced) record.flags.insert(RecordFlag::kLabelCoerced);

    if (const nlohmann::json* topic = find_folded(candidate, {"topic"}); topic && topic->is_string()) {
      record.raw_topic = topic->get<std::string>();
    }
    const Topic* known = record.raw_topic.empty() ? nullptr : taxonomy.find(record.raw_topic);
    if (known) record.topic = known->id;
    if (spec.topic_oriented() && !known) record.flags.insert(RecordFlag::kTopicUnknown);

    if (record.has(RecordFlag::kRepaired)) ++report.repaired;
    ++report.accepted;
    result.records.push_back(std::move(record));
  }
  return result;
}

Dataset records_to_dataset(const std::vector<ParsedRecord>& records, const PromptSpec& spec,
                           const std::string& provider, std::string name) {
  const RecordSource source = SyntheticSource{provider, spec.shot_mode(), spec.topic_oriented()};
  std::vector<TextRecord> out;
  std::set<std::string> seen;
  std::size_t removed = 0;
  for (const auto& r : records) {
    std::string text = normalize_whitespace(r.text);
    if (!seen.insert(text).second) {
      ++removed;
      continue;
    }
    TextRecord t;
    t.id = record_id(text, source);
    t.text = std::move(text);
    t.label = r.label;
    t.topic = r.topic;
    t.source = source;
    out.push_back(std::move(t));
  }
  nlohmann::json params = {{"op", "parse"},
                           {"provider", provider},
                           {"prompt_spec", to_json(spec)},
                           {"duplicates_removed", removed}};
  return Dataset(std::move(name), spec.schema.kind(), std::move(out), std::move(params));
}

}  // namespace sisynth
