#include "sisynth/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "sisynth/error.hpp"

namespace sisynth {
namespace {

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

struct Row {
  std::string test_set;
  std::string metric;
  std::vector<std::string> values;
};

std::vector<Row> table_rows(const EvalMatrix& m) {
  std::vector<Row> rows;
  const bool binary = !m.cells.empty() && !m.cells[0].empty() && m.cells[0][0].schema == SchemaKind::kBinary;
  for (std::size_t t = 0; t < m.test_sets.size(); ++t) {
    std::vector<std::pair<std::string, double (*)(const MetricsReport&)>> metrics = {
        {"accuracy", [](const MetricsReport& r) { return r.accuracy; }}};
    if (binary) metrics.emplace_back("f1_positive", [](const MetricsReport& r) { return r.positive_f1.value_or(0.0); });
    metrics.emplace_back("f1_macro", [](const MetricsReport& r) { return r.macro_f1; });
    metrics.emplace_back("f1_weighted", [](const MetricsReport& r) { return r.weighted_f1; });
    for (const auto& [name, get] : metrics) {
      Row row{m.test_sets[t], name, {}};
      for (std::size_t r = 0; r < m.train_sets.size(); ++r) row.values.push_back(fixed4(get(m.at(r, t))));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace

void check_disjoint(const Dataset& train, const Dataset& test) {
  const auto* small = train.size() <= test.size() ? &train : &test;
  const auto* large = small == &train ? &test : &train;
  std::size_t shared = 0;
  std::string example;
  for (const auto& r : small->records()) {
    if (large->contains(r.id)) {
      if (shared++ == 0) example = r.id;
    }
  }
  if (shared > 0) {
    throw Error(ErrorCode::kLeakage, "train set " + train.name() + " shares " + std::to_string(shared) +
                                         " record id(s) with test set " + test.name() + " (e.g. " + example + ")");
  }
}

EvalMatrix evaluate_matrix(std::span<const Dataset> train_sets, std::span<const Dataset> test_sets, Trainer& trainer,
                           const MatrixOptions& options) {
  if (train_sets.empty() || test_sets.empty()) throw Error(ErrorCode::kInput, "evaluation matrix needs train and test sets");
  const SchemaKind schema = train_sets.front().schema();
  for (const auto& d : train_sets) {
    if (d.schema() != schema) throw Error(ErrorCode::kSchema, "train set " + d.name() + " has a different schema");
  }
  for (const auto& d : test_sets) {
    if (d.schema() != schema) throw Error(ErrorCode::kSchema, "test set " + d.name() + " has a different schema");
  }
  for (const auto& tr : train_sets) {
    for (const auto& te : test_sets) check_disjoint(tr, te);
  }

  EvalMatrix m;
  for (const auto& d : train_sets) m.train_sets.push_back(d.name());
  for (const auto& d : test_sets) m.test_sets.push_back(d.name());
  m.cells.resize(train_sets.size());

  auto run_row = [&](std::size_t r) {
    auto model = trainer.train(train_sets[r]);
    std::vector<MetricsReport> row;
    for (const auto& te : test_sets) row.push_back(trainer.evaluate(*model, te));
    return row;
  };

  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, train_sets.size());
  if (workers == 1) {
    for (std::size_t r = 0; r < train_sets.size(); ++r) m.cells[r] = run_row(r);
    return m;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < train_sets.size(); r = next++) {
          try {
            auto row = run_row(r);
            std::lock_guard lock(mu);
            m.cells[r] = std::move(row);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) failure = std::current_exception();
            next = train_sets.size();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return m;
}

nlohmann::json to_json(const EvalMatrix& m) {
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t r = 0; r < m.train_sets.size(); ++r) {
    for (std::size_t t = 0; t < m.test_sets.size(); ++t) {
      cells.push_back({{"train", m.train_sets[r]}, {"test", m.test_sets[t]}, {"metrics", to_json(m.at(r, t))}});
    }
  }
  return {{"train_sets", m.train_sets}, {"test_sets", m.test_sets}, {"cells", cells}};
}

std::string render_csv(const EvalMatrix& m) {
  std::string out = "test_set,metric";
  for (const auto& name : m.train_sets) out += "," + csv_field(name);
  out += '\n';
  for (const auto& row : table_rows(m)) {
    out += csv_field(row.test_set) + "," + row.metric;
    for (const auto& v : row.values) out += "," + v;
    out += '\n';
  }
  return out;
}

std::string render_text(const EvalMatrix& m) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"test set", "metric"});
  for (const auto& name : m.train_sets) grid.back().push_back(name);
  for (auto& row : table_rows(m)) {
    std::vector<std::string> line = {row.test_set, row.metric};
    line.insert(line.end(), row.values.begin(), row.values.end());
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t c = 0; c < grid[i].size(); ++c) {
      const auto& cell = grid[i][c];
      const std::string pad(width[c] - cell.size(), ' ');
      out += c < 2 ? cell + pad : pad + cell;
      if (c + 1 < grid[i].size()) out += "  ";
    }
    out += '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    }
  }
  return out;
}

}  // namespace sisynth
