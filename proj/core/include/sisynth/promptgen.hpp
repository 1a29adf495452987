#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sisynth/dataset.hpp"
#include "sisynth/taxonomy.hpp"

namespace sisynth {

struct WithTopics {
  std::vector<Topic> topics;
};

/// No topic list; the prompt asks for a fixed number of texts instead.
struct WithoutTopics {
  std::size_t instance_count = 10;
};

using TopicMode = std::variant<WithTopics, WithoutTopics>;

struct ZeroShot {};
struct FewShot {
  std::size_t exemplars_per_class = 2;
};

using ShotSpec = std::variant<ZeroShot, FewShot>;

inline constexpr std::array<std::string_view, 3> kOutputColumns = {"text", "topic", "risk level"};

struct PromptSpec {
  LabelSchema schema = LabelSchema::binary();
  TopicMode topic_mode = WithoutTopics{};
  ShotSpec shot = ZeroShot{};

  bool topic_oriented() const { return std::holds_alternative<WithTopics>(topic_mode); }
  ShotMode shot_mode() const {
    return std::holds_alternative<FewShot>(shot) ? ShotMode::kFewShot : ShotMode::kZeroShot;
  }
  /// Throws kInvalidSpec for an empty topic list or a zero exemplar count.
  void validate() const;
};

nlohmann::json to_json(const PromptSpec& spec);
/// Topics are given as ids and resolved against the registry; the literal
/// "default" selects the whole registry.
PromptSpec prompt_spec_from_json(const nlohmann::json& j, const TopicRegistry& registry);

struct Exemplar {
  std::string text;
  Label label = Label::kNonSuicidal;
  std::string source_id;
};

/// Task sentence, optional numbered topic list, JSON output instruction and
/// the criteria block in triple backticks.
std::string render_zero_shot(const PromptSpec& spec);

/// Exemplar blocks grouped by class in schema order, followed by the
/// zero-shot rendering. Requires exactly k exemplars per class.
std::string render_few_shot(const PromptSpec& spec, std::span<const Exemplar> exemplars);

/// Dispatches on spec.shot.
std::string render_prompt(const PromptSpec& spec, std::span<const Exemplar> exemplars = {});

/// Seeded draw without replacement of k records per class; deterministic
/// given the dataset content, k and the seed.
std::vector<Exemplar> select_exemplars(const Dataset& dataset, std::size_t k, std::uint64_t seed);

std::string prompt_hash(std::string_view prompt);

}  // namespace sisynth
