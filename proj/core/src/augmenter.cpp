#include "sisynth/augmenter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "sisynth/error.hpp"
#include "sisynth/eval.hpp"
#include "sisynth/rng.hpp"
#include "sisynth/split.hpp"

namespace sisynth {
namespace {

std::string format_stats(const SeriesStats& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f +/- %.4f", s.mean, s.stddev);
  return buf;
}

std::string percent_label(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g%%", rate * 100.0);
  return buf;
}

Dataset subset(const Dataset& d, const std::set<std::string>& ids, std::string name) {
  std::vector<TextRecord> records;
  records.reserve(ids.size());
  for (const auto& r : d.records()) {
    if (ids.contains(r.id)) records.push_back(r);
  }
  return Dataset(std::move(name), d.schema(), std::move(records));
}

}  // namespace

std::vector<std::set<std::string>> make_folds(const Dataset& real_train, double rate, std::size_t k,
                                              std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) throw Error(ErrorCode::kParameter, "fold rate must lie in (0, 1]");
  if (k == 0) throw Error(ErrorCode::kParameter, "fold count must be positive");
  if (static_cast<double>(k) * rate > 1.0 + 1e-12) {
    throw Error(ErrorCode::kInfeasibleFolds, std::to_string(k) + " disjoint folds at rate " + std::to_string(rate) +
                                                 " exceed the whole training set");
  }
  const std::size_t n = real_train.size();
  const std::size_t fold_size = round_count(rate, n);
  if (k * fold_size > n) {
    throw Error(ErrorCode::kInfeasibleFolds, std::to_string(k) + " folds of " + std::to_string(fold_size) +
                                                 " do not fit into " + std::to_string(n) + " records");
  }

  const auto schema = LabelSchema::of(real_train.schema());
  std::vector<std::vector<std::string>> by_class(schema.size());
  for (const auto& r : real_train.records()) by_class[schema.index_of(r.label)].push_back(r.id);

  const std::size_t total = k * fold_size;
  std::vector<double> quotas;
  std::vector<std::size_t> capacity;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& ids = by_class[c];
    std::sort(ids.begin(), ids.end());
    Rng rng(mix_seed(seed, "folds/" + std::string(label_name(schema.at(c)))));
    rng.shuffle(std::span<std::string>(ids));
    quotas.push_back(n == 0 ? 0.0 : static_cast<double>(total) * static_cast<double>(ids.size()) / static_cast<double>(n));
    capacity.push_back(ids.size());
  }
  const auto take = apportion_near(quotas, capacity, total);

  // Classes are laid out back to back and dealt round-robin, so every fold
  // gets fold_size ids and each class splits evenly across folds.
  std::vector<std::set<std::string>> folds(k);
  std::size_t position = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    for (std::size_t i = 0; i < take[c]; ++i, ++position) folds[position % k].insert(by_class[c][i]);
  }
  return folds;
}

void AugmentationPlan::validate() const {
  if (rates.empty()) throw Error(ErrorCode::kParameter, "augmentation plan has no rates");
  for (double r : rates) {
    if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorCode::kParameter, "augmentation rate outside (0, 1]");
  }
  if (folds == 0) throw Error(ErrorCode::kParameter, "augmentation plan needs at least one fold");
  if (!test_sets.empty() && primary_test >= test_sets.size()) {
    throw Error(ErrorCode::kParameter, "primary test index out of range");
  }
}

nlohmann::json to_json(const AugmentationPlan& p) {
  return {{"synthetic", p.synthetic}, {"real_train", p.real_train},     {"rates", p.rates},
          {"folds", p.folds},         {"seed", p.seed},                 {"test_sets", p.test_sets},
          {"primary_test", p.primary_test}, {"f1_variant", to_string(p.f1_variant)}};
}

AugmentationPlan augmentation_plan_from_json(const nlohmann::json& j) {
  AugmentationPlan p;
  p.synthetic = j.value("synthetic", std::string{});
  p.real_train = j.value("real_train", std::string{});
  p.rates = j.value("rates", p.rates);
  p.folds = j.value("folds", p.folds);
  p.seed = j.value("seed", p.seed);
  p.test_sets = j.value("test_sets", std::vector<std::string>{});
  p.primary_test = j.value("primary_test", p.primary_test);
  if (auto it = j.find("f1_variant"); it != j.end()) p.f1_variant = parse_f1_variant(it->get<std::string>());
  p.validate();
  return p;
}

SeriesStats summarize(std::span<const double> values) {
  SeriesStats s;
  double m2 = 0.0;
  for (double x : values) {
    ++s.count;
    const double delta = x - s.mean;
    s.mean += delta / static_cast<double>(s.count);
    m2 += delta * (x - s.mean);
  }
  if (s.count > 0) s.stddev = std::sqrt(std::max(0.0, m2 / static_cast<double>(s.count)));
  return s;
}

std::optional<double> find_stop_rate(const SweepReport& report) {
  for (const auto& rr : report.rates) {
    if (rr.cells.size() <= report.plan.primary_test) continue;
    if (rr.cells[report.plan.primary_test].f1.mean >= report.baseline_f1) return rr.rate;
  }
  return std::nullopt;
}

SweepReport run_sweep(const AugmentationPlan& plan, const Dataset& synthetic, const Dataset& real_train,
                      std::span<const Dataset> test_sets, Trainer& trainer, double baseline_f1) {
  plan.validate();
  if (test_sets.empty()) throw Error(ErrorCode::kParameter, "sweep needs at least one test set");
  if (plan.primary_test >= test_sets.size()) throw Error(ErrorCode::kParameter, "primary test index out of range");
  if (synthetic.schema() != real_train.schema()) {
    throw Error(ErrorCode::kSchema, "synthetic and real training sets use different schemas");
  }

  SweepReport report;
  report.plan = plan;
  report.plan.synthetic = synthetic.name();
  report.plan.real_train = real_train.name();
  report.plan.test_sets.clear();
  for (const auto& t : test_sets) report.plan.test_sets.push_back(t.name());
  report.baseline_f1 = baseline_f1;

  // Build every fold first so leakage is reported before any training.
  std::vector<std::vector<Dataset>> fold_sets;
  for (const auto& t : test_sets) check_disjoint(synthetic, t);
  for (double rate : plan.rates) {
    auto& per_rate = fold_sets.emplace_back();
    const auto folds = make_folds(real_train, rate, plan.folds, plan.seed);
    for (std::size_t f = 0; f < folds.size(); ++f) {
      auto fold = subset(real_train, folds[f], real_train.name() + "@" + percent_label(rate) + "/" + std::to_string(f));
      for (const auto& t : test_sets) check_disjoint(fold, t);
      per_rate.push_back(std::move(fold));
    }
  }

  for (std::size_t ri = 0; ri < plan.rates.size(); ++ri) {
    RateResult& rr = report.rates.emplace_back();
    rr.rate = plan.rates[ri];
    rr.fold_size = fold_sets[ri].empty() ? 0 : fold_sets[ri].front().size();
    for (std::size_t f = 0; f < fold_sets[ri].size(); ++f) {
      const Dataset parts[] = {synthetic, fold_sets[ri][f]};
      const Dataset train = compose_mix(parts, synthetic.name() + "+" + fold_sets[ri][f].name());
      FoldRun run;
      run.fold = f;
      run.train_size = train.size();
      try {
        auto model = trainer.train(train);
        for (const auto& t : test_sets) run.metrics.push_back(trainer.evaluate(*model, t));
      } catch (const std::exception& e) {
        report.error = "rate " + percent_label(rr.rate) + " fold " + std::to_string(f) + ": " + e.what();
        throw SweepAborted("augmentation sweep aborted at " + report.error, report);
      }
      rr.runs.push_back(std::move(run));
    }
    for (std::size_t t = 0; t < test_sets.size(); ++t) {
      std::vector<double> acc;
      std::vector<double> f1;
      for (const auto& run : rr.runs) {
        acc.push_back(run.metrics[t].accuracy);
        f1.push_back(run.metrics[t].f1(plan.f1_variant));
      }
      rr.cells.push_back({test_sets[t].name(), summarize(acc), summarize(f1)});
    }
  }
  report.complete = true;
  report.stop_rate = find_stop_rate(report);
  return report;
}

nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json rates = nlohmann::json::array();
  for (const auto& rr : r.rates) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : rr.runs) {
      nlohmann::json metrics = nlohmann::json::array();
      for (const auto& m : run.metrics) metrics.push_back(to_json(m));
      runs.push_back({{"fold", run.fold}, {"train_size", run.train_size}, {"metrics", metrics}});
    }
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : rr.cells) {
      cells.push_back({{"test_set", c.test_set},
                       {"accuracy_mean", c.accuracy.mean},
                       {"accuracy_stddev", c.accuracy.stddev},
                       {"f1_mean", c.f1.mean},
                       {"f1_stddev", c.f1.stddev},
                       {"folds", c.f1.count}});
    }
    rates.push_back({{"rate", rr.rate}, {"fold_size", rr.fold_size}, {"runs", runs}, {"cells", cells}});
  }
  nlohmann::json j = {{"plan", to_json(r.plan)}, {"baseline_f1", r.baseline_f1}, {"rates", rates},
                      {"complete", r.complete}};
  j["stop_rate"] = r.stop_rate ? nlohmann::json(*r.stop_rate) : nlohmann::json(nullptr);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

std::string render_text(const SweepReport& r) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"test set", "metric"});
  for (const auto& rr : r.rates) grid.back().push_back(percent_label(rr.rate));
  const std::string f1_name = "f1_" + std::string(to_string(r.plan.f1_variant));
  for (std::size_t t = 0; t < r.plan.test_sets.size(); ++t) {
    std::vector<std::string> acc = {r.plan.test_sets[t], "accuracy"};
    std::vector<std::string> f1 = {r.plan.test_sets[t], f1_name};
    for (const auto& rr : r.rates) {
      acc.push_back(t < rr.cells.size() ? format_stats(rr.cells[t].accuracy) : "-");
      f1.push_back(t < rr.cells.size() ? format_stats(rr.cells[t].f1) : "-");
    }
    grid.push_back(std::move(acc));
    grid.push_back(std::move(f1));
  }
  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      const std::string pad(width[c] - line[c].size(), ' ');
      out += c < 2 ? line[c] + pad : pad + line[c];
      if (c + 1 < line.size()) out += "  ";
    }
    out += '\n';
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "baseline %s %.4f; ", f1_name.c_str(), r.baseline_f1);
  out += buf;
  out += r.stop_rate ? "stop rate " + percent_label(*r.stop_rate) + "\n" : "parity not reached\n";
  return out;
}

}  // namespace sisynth
