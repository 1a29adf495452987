#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sisynth/dataset.hpp"
#include "sisynth/llm_gateway.hpp"
#include "sisynth/promptgen.hpp"
#include "sisynth/taxonomy.hpp"

namespace sisynth {

enum class RecordFlag : std::uint8_t { kRepaired, kLabelCoerced, kTopicUnknown };
std::string_view to_string(RecordFlag flag);

struct Provenance {
  std::string provider;
  std::string job_id;
  std::size_t request_index = 0;
};

struct ParsedRecord {
  std::string text;
  std::optional<std::string> topic;  // registry id when recognized
  std::string raw_topic;
  std::string raw_label;
  Label label = Label::kNonSuicidal;
  Provenance provenance;
  std::set<RecordFlag> flags;

  bool has(RecordFlag f) const { return flags.contains(f); }
};

/// Rejection reasons used in ParseReport::reasons.
namespace reject {
inline constexpr std::string_view kNotObject = "not_object";
inline constexpr std::string_view kMissingText = "missing_text";
inline constexpr std::string_view kTextTooShort = "text_too_short";
inline constexpr std::string_view kMissingLabel = "missing_label";
inline constexpr std::string_view kUnknownLabel = "unknown_label";
}  // namespace reject

struct ParseReport {
  std::size_t completions = 0;
  std::size_t no_payload = 0;
  std::size_t candidates = 0;
  std::size_t accepted = 0;
  std::size_t repaired = 0;
  std::size_t rejected = 0;
  std::map<std::string, std::size_t> reasons;

  void merge(const ParseReport& other);
  friend bool operator==(const ParseReport&, const ParseReport&) = default;
};

nlohmann::json to_json(const ParseReport& report);
ParseReport parse_report_from_json(const nlohmann::json& j);

struct Payload {
  nlohmann::json value;
  bool repaired = false;
};

/// Tries, in order: strict parse of the whole text; the interior of each
/// fenced code block; the largest balanced [...] or {...} substring that
/// parses. Anything past the first step sets `repaired`. Throws kNoPayload.
Payload extract_payload(std::string_view response_text);

class NoPayloadError : public Error {
 public:
  NoPayloadError(const std::string& message, std::string response)
      : Error(ErrorCode::kNoPayload, message), response_(std::move(response)) {}
  const std::string& response() const { return response_; }

 private:
  std::string response_;
};

struct CoercedLabel {
  Label label;
  bool coerced = false;
};

/// Case-, whitespace- and hyphen-insensitive match against the schema's level
/// names plus a synonym table. nullopt when nothing matches.
std::optional<CoercedLabel> coerce_label(std::string_view raw, const LabelSchema& schema);

struct ParseOptions {
  std::size_t min_text_length = 20;  // code points, after trimming
};

struct ParseResult {
  std::vector<ParsedRecord> records;
  ParseReport report;
};

/// Validates every candidate of a completion's payload. Rejections are
/// counted, never thrown.
ParseResult parse_completion(const RawCompletion& completion, const PromptSpec& spec,
                             const TopicRegistry& taxonomy, const ParseOptions& options = {});

/// Converts accepted records into a dataset tagged as synthetic output of
/// `provider`. Exact duplicate texts are collapsed.
Dataset records_to_dataset(const std::vector<ParsedRecord>& records, const PromptSpec& spec,
                           const std::string& provider, std::string name);

}  // namespace sisynth
