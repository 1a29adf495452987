#pragma once

// Reference reading of well-formed completions with RapidJSON. Only handles
// strict JSON arrays of objects with exact level display names; used to
// cross-check the production parser on clean inputs.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <rapidjson/document.h>

namespace sisynth::testing {

struct OracleRecord {
  std::string text;
  std::string label;  // canonical name
  std::string topic;  // raw topic string
};

inline std::optional<std::vector<OracleRecord>> oracle_parse_strict(const std::string& body) {
  static const std::map<std::string, std::string> levels = {
      {"Non Suicidal", "NonSuicidal"}, {"Suicidal", "Suicidal"},         {"No Risk", "NoRisk"},
      {"Low Risk", "LowRisk"},         {"Moderate Risk", "ModerateRisk"}, {"High Risk", "HighRisk"}};
  rapidjson::Document doc;
  doc.Parse(body.c_str(), body.size());
  if (doc.HasParseError() || !doc.IsArray()) return std::nullopt;
  std::vector<OracleRecord> out;
  for (const auto& v : doc.GetArray()) {
    if (!v.IsObject() || !v.HasMember("text") || !v.HasMember("risk level")) return std::nullopt;
    OracleRecord r;
    r.text = v["text"].GetString();
    const auto it = levels.find(v["risk level"].GetString());
    if (it == levels.end()) return std::nullopt;
    r.label = it->second;
    if (v.HasMember("topic") && v["topic"].IsString()) r.topic = v["topic"].GetString();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace sisynth::testing
