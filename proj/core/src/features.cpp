#include "sisynth/features.hpp"

#include <algorithm>
#include <cmath>

#include "sisynth/error.hpp"
#include "sisynth/hashing.hpp"
#include "sisynth/text.hpp"

namespace sisynth {

FeatureModel FeatureModel::fit(std::span<const std::string> corpus, std::size_t max_vocabulary) {
  if (corpus.empty()) throw Error(ErrorCode::kParameter, "cannot fit features on an empty corpus");

  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // token -> (total, df)
  for (const auto& doc : corpus) {
    auto tokens = tokenize_words(doc);
    for (const auto& t : tokens) ++counts[t].first;
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (const auto& t : tokens) ++counts[t].second;
  }

  std::vector<const std::pair<const std::string, std::pair<std::size_t, std::size_t>>*> ranked;
  ranked.reserve(counts.size());
  for (const auto& entry : counts) ranked.push_back(&entry);
  // counts is ordered by token, so a stable sort on frequency keeps ties lexicographic.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto* a, const auto* b) { return a->second.first > b->second.first; });
  if (ranked.size() > max_vocabulary) ranked.resize(max_vocabulary);

  FeatureModel model;
  model.documents_ = corpus.size();
  const double n = static_cast<double>(corpus.size());
  for (const auto* entry : ranked) {
    model.index_.emplace(entry->first, model.vocabulary_.size());
    model.vocabulary_.push_back(entry->first);
    model.df_.push_back(entry->second.second);
    model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(entry->second.second))) + 1.0);
  }
  return model;
}

std::optional<std::size_t> FeatureModel::index_of(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseVector FeatureModel::transform(std::string_view text) const {
  std::map<std::uint32_t, double> tf;
  for (const auto& token : tokenize_words(text)) {
    if (auto col = index_of(token)) tf[static_cast<std::uint32_t>(*col)] += 1.0;
  }
  SparseVector v;
  v.entries.reserve(tf.size());
  double norm = 0.0;
  for (const auto& [col, count] : tf) {
    const double w = count * idf_[col];
    v.entries.emplace_back(col, w);
    norm += w * w;
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (auto& e : v.entries) e.second /= norm;
  }
  return v;
}

std::string FeatureModel::vocabulary_hash() const {
  std::string joined;
  for (const auto& t : vocabulary_) {
    joined += t;
    joined += '\n';
  }
  return sha256_hex(joined);
}

nlohmann::json FeatureModel::to_json() const {
  return {{"documents", documents_}, {"vocabulary", vocabulary_}, {"df", df_}, {"idf", idf_},
          {"vocabulary_hash", vocabulary_hash()}};
}

FeatureModel FeatureModel::from_json(const nlohmann::json& j) {
  FeatureModel m;
  m.documents_ = j.at("documents").get<std::size_t>();
  m.vocabulary_ = j.at("vocabulary").get<std::vector<std::string>>();
  m.df_ = j.at("df").get<std::vector<std::size_t>>();
  m.idf_ = j.at("idf").get<std::vector<double>>();
  if (m.df_.size() != m.vocabulary_.size() || m.idf_.size() != m.vocabulary_.size()) {
    throw Error(ErrorCode::kParameter, "feature model arrays disagree in length");
  }
  for (std::size_t i = 0; i < m.vocabulary_.size(); ++i) {
    if (!m.index_.emplace(m.vocabulary_[i], i).second) {
      throw Error(ErrorCode::kParameter, "duplicate vocabulary token: " + m.vocabulary_[i]);
    }
  }
  if (auto it = j.find("vocabulary_hash"); it != j.end() && it->get<std::string>() != m.vocabulary_hash()) {
    throw Error(ErrorCode::kParameter, "vocabulary hash mismatch");
  }
  return m;
}

}  // namespace sisynth
