#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sisynth/dataset.hpp"

namespace sisynth::testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(SISYNTH_FIXTURES_DIR) / rel; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sisynth-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline TextRecord make_record(const std::string& text, Label label, const RecordSource& source = RealSource{"test"},
                              std::optional<std::string> user = std::nullopt) {
  TextRecord r;
  r.id = record_id(text, source);
  r.text = text;
  r.label = label;
  r.user_id = std::move(user);
  r.source = source;
  return r;
}

/// n records cycling through the schema's labels, texts "<prefix> record <i>".
inline Dataset make_dataset(const std::string& name, SchemaKind schema, std::size_t n,
                            const std::string& prefix = "sample", const RecordSource& source = RealSource{"test"}) {
  const auto s = LabelSchema::of(schema);
  std::vector<TextRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    records.push_back(make_record(prefix + " record " + std::to_string(i), s.at(i % s.size()), source));
  }
  return Dataset(name, schema, std::move(records));
}

}  // namespace sisynth::testing
