#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace sisynth {

inline constexpr std::size_t kDefaultMaxVocabulary = 20000;

/// Sorted (column, value) pairs.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

/// Vocabulary plus idf weights. Documents map to L2-normalized tf*idf vectors.
class FeatureModel {
 public:
  FeatureModel() = default;

  /// Vocabulary keeps the max_vocabulary most frequent tokens, counted over
  /// the whole corpus, ties broken lexicographically.
  /// idf(t) = ln((1 + N) / (1 + df(t))) + 1. Throws kParameter for an empty corpus.
  static FeatureModel fit(std::span<const std::string> corpus,
                          std::size_t max_vocabulary = kDefaultMaxVocabulary);

  std::size_t dimension() const { return vocabulary_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  std::optional<std::size_t> index_of(std::string_view token) const;
  double idf(std::size_t column) const { return idf_.at(column); }
  std::size_t document_frequency(std::size_t column) const { return df_.at(column); }
  std::size_t document_count() const { return documents_; }

  /// Out-of-vocabulary tokens are ignored; an all-unknown text is empty.
  SparseVector transform(std::string_view text) const;

  /// SHA-256 over the newline-joined vocabulary.
  std::string vocabulary_hash() const;

  nlohmann::json to_json() const;
  static FeatureModel from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> vocabulary_;
  std::vector<double> idf_;
  std::vector<std::size_t> df_;
  std::size_t documents_ = 0;
  std::map<std::string, std::size_t, std::less<>> index_;
};

inline FeatureModel fit_features(std::span<const std::string> corpus,
                                 std::size_t max_vocabulary = kDefaultMaxVocabulary) {
  return FeatureModel::fit(corpus, max_vocabulary);
}

}  // namespace sisynth
