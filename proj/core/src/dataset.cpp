#include "sisynth/dataset.hpp"

#include <algorithm>

#include "sisynth/error.hpp"
#include "sisynth/hashing.hpp"
#include "sisynth/rng.hpp"
#include "sisynth/split.hpp"
#include "sisynth/text.hpp"

namespace sisynth {

std::string_view to_string(ShotMode mode) {
  return mode == ShotMode::kZeroShot ? "zero_shot" : "few_shot";
}

ShotMode parse_shot_mode(std::string_view s) {
  const std::string key = fold_key(s);
  if (key == "zeroshot") return ShotMode::kZeroShot;
  if (key == "fewshot") return ShotMode::kFewShot;
  throw Error(ErrorCode::kConfig, "unknown shot mode '" + std::string(s) + "'");
}

std::string source_tag(const RecordSource& source) {
  struct Visitor {
    std::string operator()(const SyntheticSource& s) const { return "synthetic:" + s.provider; }
    std::string operator()(const RealSource& s) const { return "real:" + s.corpus; }
    std::string operator()(const MixedSource& s) const {
      std::string tag = "mixed:";
      for (std::size_t i = 0; i < s.lineage.size(); ++i) {
        if (i) tag += '+';
        tag += s.lineage[i];
      }
      return tag;
    }
  };
  return std::visit(Visitor{}, source);
}

std::string_view to_string(SplitName split) {
  switch (split) {
    case SplitName::kTrain: return "train";
    case SplitName::kTest: return "test";
    case SplitName::kVal: return "val";
  }
  return "train";
}

SplitName parse_split_name(std::string_view s) {
  if (s == "train") return SplitName::kTrain;
  if (s == "test") return SplitName::kTest;
  if (s == "val" || s == "validation") return SplitName::kVal;
  throw Error(ErrorCode::kInput, "unknown split '" + std::string(s) + "'");
}

std::string record_id(std::string_view text, const RecordSource& source) {
  std::string material = normalize_whitespace(text);
  material.push_back('\x1f');
  material += source_tag(source);
  return sha256_hex(material).substr(0, 32);
}

void to_json(nlohmann::json& j, const RecordSource& source) {
  struct Visitor {
    nlohmann::json operator()(const SyntheticSource& s) const {
      return {{"kind", "synthetic"},
              {"provider", s.provider},
              {"shot_mode", to_string(s.shot_mode)},
              {"topic_oriented", s.topic_oriented}};
    }
    nlohmann::json operator()(const RealSource& s) const {
      return {{"kind", "real"}, {"corpus", s.corpus}};
    }
    nlohmann::json operator()(const MixedSource& s) const {
      return {{"kind", "mixed"}, {"lineage", s.lineage}};
    }
  };
  j = std::visit(Visitor{}, source);
}

void from_json(const nlohmann::json& j, RecordSource& source) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "synthetic") {
    source = SyntheticSource{j.at("provider").get<std::string>(),
                             parse_shot_mode(j.value("shot_mode", std::string("zero_shot"))),
                             j.value("topic_oriented", false)};
  } else if (kind == "real") {
    source = RealSource{j.at("corpus").get<std::string>()};
  } else if (kind == "mixed") {
    source = MixedSource{j.value("lineage", std::vector<std::string>{})};
  } else {
    throw Error(ErrorCode::kInput, "unknown record source kind '" + kind + "'");
  }
}

void to_json(nlohmann::json& j, const TextRecord& r) {
  j = nlohmann::json{{"id", r.id}, {"text", r.text}, {"label", label_name(r.label)}};
  if (r.topic) j["topic"] = *r.topic;
  if (r.user_id) j["user_id"] = *r.user_id;
  j["source"] = r.source;
  if (r.split) j["split"] = to_string(*r.split);
}

void from_json(const nlohmann::json& j, TextRecord& r) {
  r.text = j.at("text").get<std::string>();
  r.label = parse_label(j.at("label").get<std::string>());
  r.topic = j.contains("topic") && !j["topic"].is_null()
                ? std::optional<std::string>(j["topic"].get<std::string>())
                : std::nullopt;
  r.user_id = j.contains("user_id") && !j["user_id"].is_null()
                  ? std::optional<std::string>(j["user_id"].get<std::string>())
                  : std::nullopt;
  if (j.contains("source")) {
    r.source = j["source"].get<RecordSource>();
  } else {
    r.source = RealSource{"unknown"};
  }
  r.id = j.contains("id") ? j["id"].get<std::string>() : record_id(r.text, r.source);
  r.split = j.contains("split") && !j["split"].is_null()
                ? std::optional<SplitName>(parse_split_name(j["split"].get<std::string>()))
                : std::nullopt;
}

Dataset::Dataset(std::string name, SchemaKind schema, std::vector<TextRecord> records,
                 nlohmann::json creation_parameters)
    : name_(std::move(name)),
      schema_(schema),
      records_(std::move(records)),
      creation_parameters_(std::move(creation_parameters)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (schema_of(r.label) != schema_) {
      throw Error(ErrorCode::kInvalidLabel, "record " + r.id + " has label " +
                                                std::string(label_name(r.label)) + " outside the " +
                                                std::string(to_string(schema_)) + " schema");
    }
    if (!index_.emplace(r.id, i).second) {
      throw Error(ErrorCode::kComposition, "duplicate record id " + r.id + " in dataset " + name_);
    }
  }
}

const TextRecord* Dataset::find(std::string_view id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::set<std::string> Dataset::ids() const {
  std::set<std::string> out;
  for (const auto& r : records_) out.insert(r.id);
  return out;
}

bool Dataset::has_user_ids() const {
  return !records_.empty() &&
         std::all_of(records_.begin(), records_.end(), [](const TextRecord& r) { return r.user_id.has_value(); });
}

std::string Dataset::content_hash() const {
  std::string joined;
  for (const auto& [id, _] : index_) {  // index_ is ordered by id
    joined += id;
    joined += '\n';
  }
  return sha256_hex(joined);
}

Dataset Dataset::with_name(std::string name) const {
  return Dataset(std::move(name), schema_, records_, creation_parameters_);
}

const ClassStats& DatasetManifest::stats(Label label) const {
  for (const auto& s : class_distribution) {
    if (s.label == label) return s;
  }
  throw Error(ErrorCode::kInvalidLabel, std::string(label_name(label)) + " not in manifest");
}

DatasetManifest compute_manifest(const Dataset& dataset) {
  DatasetManifest m;
  m.name = dataset.name();
  m.schema = dataset.schema();
  m.record_count = dataset.size();
  m.creation_parameters = dataset.creation_parameters();
  m.content_hash = dataset.content_hash();

  const LabelSchema schema = LabelSchema::of(dataset.schema());
  std::vector<std::set<std::string>> users(schema.size());
  std::set<std::string> all_users;
  m.class_distribution.reserve(schema.size());
  for (Label l : schema.labels()) m.class_distribution.push_back({l, 0, 0.0, 0});
  for (const auto& r : dataset.records()) {
    const std::size_t idx = schema.index_of(r.label);
    ++m.class_distribution[idx].count;
    if (r.user_id) {
      users[idx].insert(*r.user_id);
      all_users.insert(*r.user_id);
    }
    ++m.topic_distribution[r.topic ? *r.topic : std::string(kNoTopicKey)];
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    auto& s = m.class_distribution[i];
    s.users = users[i].size();
    s.percent = m.record_count == 0 ? 0.0
                                    : 100.0 * static_cast<double>(s.count) / static_cast<double>(m.record_count);
  }
  m.user_count = all_users.size();
  return m;
}

nlohmann::json to_json(const DatasetManifest& m) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& s : m.class_distribution) {
    classes.push_back({{"label", label_name(s.label)},
                       {"count", s.count},
                       {"percent", s.percent},
                       {"users", s.users}});
  }
  return {{"name", m.name},
          {"schema", to_string(m.schema)},
          {"record_count", m.record_count},
          {"user_count", m.user_count},
          {"class_distribution", classes},
          {"topic_distribution", m.topic_distribution},
          {"creation_parameters", m.creation_parameters},
          {"content_hash", m.content_hash}};
}

Dataset binarize_dataset(const Dataset& dataset) {
  if (dataset.schema() != SchemaKind::kFourClass) {
    throw Error(ErrorCode::kSchema, "dataset " + dataset.name() + " is already binary");
  }
  std::vector<TextRecord> records = dataset.records();
  for (auto& r : records) r.label = binarize(r.label);
  nlohmann::json params = {{"op", "binarize"},
                           {"input", dataset.name()},
                           {"input_hash", dataset.content_hash()}};
  return Dataset(dataset.name() + "-binary", SchemaKind::kBinary, std::move(records), std::move(params));
}

HoldoutResult holdout_synthetic_test(std::span<const Dataset> datasets, double fraction,
                                     std::uint64_t seed, std::string pool_name) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::kParameter, "holdout fraction must lie in [0, 1)");
  }
  if (datasets.empty()) throw Error(ErrorCode::kParameter, "holdout needs at least one dataset");
  const SchemaKind kind = datasets.front().schema();
  for (const auto& d : datasets) {
    if (d.schema() != kind) throw Error(ErrorCode::kSchema, "holdout inputs must share a schema");
  }
  const LabelSchema schema = LabelSchema::of(kind);

  HoldoutResult result;
  std::vector<TextRecord> pool;
  nlohmann::json lineage = nlohmann::json::array();
  for (const auto& d : datasets) {
    std::vector<std::vector<const TextRecord*>> by_class(schema.size());
    for (const auto& r : d.records()) by_class[schema.index_of(r.label)].push_back(&r);

    std::vector<double> quotas;
    std::vector<std::size_t> capacity;
    for (auto& members : by_class) {
      std::sort(members.begin(), members.end(),
                [](const TextRecord* a, const TextRecord* b) { return a->id < b->id; });
      quotas.push_back(fraction * static_cast<double>(members.size()));
      capacity.push_back(members.size());
    }
    const auto take = apportion_near(quotas, capacity, round_count(fraction, d.size()));

    std::set<std::string> held;
    const std::string hash = d.content_hash();
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      Rng rng(mix_seed(seed, hash + "/" + std::to_string(c)));
      rng.shuffle(std::span(by_class[c]));
      for (std::size_t i = 0; i < take[c]; ++i) {
        held.insert(by_class[c][i]->id);
        pool.push_back(*by_class[c][i]);
      }
    }
    std::vector<TextRecord> rest;
    for (const auto& r : d.records()) {
      if (!held.contains(r.id)) rest.push_back(r);
    }
    nlohmann::json params = {{"op", "holdout_remainder"},
                             {"input", d.name()},
                             {"input_hash", hash},
                             {"fraction", fraction},
                             {"seed", seed}};
    result.remainders.emplace_back(d.name(), kind, std::move(rest), std::move(params));
    lineage.push_back({{"name", d.name()}, {"content_hash", hash}, {"held_out", held.size()}});
  }
  // Pool order is canonical (by id) so that it does not depend on input order.
  std::sort(pool.begin(), pool.end(), [](const TextRecord& a, const TextRecord& b) { return a.id < b.id; });
  result.pool = Dataset(std::move(pool_name), kind, std::move(pool),
                        {{"op", "holdout"}, {"fraction", fraction}, {"seed", seed}, {"lineage", lineage}});
  return result;
}

Dataset compose_mix(std::span<const Dataset> datasets, std::string name) {
  if (datasets.empty()) throw Error(ErrorCode::kComposition, "mix needs at least one dataset");
  const SchemaKind kind = datasets.front().schema();
  std::vector<TextRecord> records;
  std::set<std::string> seen;
  nlohmann::json lineage = nlohmann::json::array();
  for (const auto& d : datasets) {
    if (d.schema() != kind) throw Error(ErrorCode::kSchema, "mix inputs must share a schema");
    for (const auto& r : d.records()) {
      if (!seen.insert(r.id).second) {
        throw Error(ErrorCode::kComposition, "record " + r.id + " from " + d.name() + " appears in more than one input");
      }
      records.push_back(r);
    }
    lineage.push_back({{"name", d.name()}, {"content_hash", d.content_hash()}, {"records", d.size()}});
  }
  nlohmann::json params = {{"op", "mix"}, {"source", {{"kind", "mixed"}, {"lineage", lineage}}}};
  return Dataset(std::move(name), kind, std::move(records), std::move(params));
}

}  // namespace sisynth
