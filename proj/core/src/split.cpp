#include "sisynth/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "sisynth/error.hpp"
#include "sisynth/rng.hpp"

namespace sisynth {
namespace {

constexpr double kEps = 1e-9;

struct Unit {
  std::string key;
  std::vector<std::size_t> records;
  std::size_t cls = 0;
};

std::size_t clamp_floor(double x, std::size_t cap) {
  if (x <= 0.0) return 0;
  return std::min(cap, static_cast<std::size_t>(std::floor(x + kEps)));
}

std::size_t clamp_ceil(double x, std::size_t cap) {
  if (x <= 0.0) return 0;
  return std::min(cap, static_cast<std::size_t>(std::ceil(x - kEps)));
}

}  // namespace

std::size_t round_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5 + kEps));
}

std::vector<std::size_t> apportion(std::span<const double> quotas, std::span<const std::size_t> lo,
                                   std::span<const std::size_t> hi, std::size_t total) {
  const std::size_t n = quotas.size();
  if (lo.size() != n || hi.size() != n) throw Error(ErrorCode::kParameter, "apportion: size mismatch");
  const std::size_t lo_sum = std::accumulate(lo.begin(), lo.end(), std::size_t{0});
  const std::size_t hi_sum = std::accumulate(hi.begin(), hi.end(), std::size_t{0});
  if (lo_sum > total || hi_sum < total) {
    throw Error(ErrorCode::kParameter, "apportion: cannot place " + std::to_string(total) +
                                           " units within bounds [" + std::to_string(lo_sum) + ", " +
                                           std::to_string(hi_sum) + "]");
  }
  std::vector<std::size_t> out(lo.begin(), lo.end());
  for (std::size_t remaining = total - lo_sum; remaining > 0; --remaining) {
    std::size_t best = n;
    double best_gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (out[i] >= hi[i]) continue;
      const double gap = quotas[i] - static_cast<double>(out[i]);
      if (best == n || gap > best_gap + kEps) {
        best = i;
        best_gap = gap;
      }
    }
    ++out[best];
  }
  return out;
}

std::vector<std::size_t> apportion_near(std::span<const double> quotas,
                                        std::span<const std::size_t> capacity, std::size_t total) {
  std::vector<std::size_t> lo(quotas.size());
  std::vector<std::size_t> hi(quotas.size());
  for (std::size_t i = 0; i < quotas.size(); ++i) {
    lo[i] = clamp_ceil(quotas[i] - 1.0, capacity[i]);
    hi[i] = clamp_floor(quotas[i] + 1.0, capacity[i]);
  }
  return apportion(quotas, lo, hi, total);
}

std::string_view to_string(SplitUnit unit) {
  switch (unit) {
    case SplitUnit::kAuto: return "auto";
    case SplitUnit::kByUser: return "by_user";
    case SplitUnit::kByRecord: return "by_record";
  }
  return "auto";
}

SplitUnit parse_split_unit(std::string_view s) {
  if (s == "auto") return SplitUnit::kAuto;
  if (s == "by_user" || s == "user") return SplitUnit::kByUser;
  if (s == "by_record" || s == "record") return SplitUnit::kByRecord;
  throw Error(ErrorCode::kConfig, "unknown split unit '" + std::string(s) + "'");
}

SplitResult split_dataset(const Dataset& dataset, const SplitSpec& spec) {
  if (spec.train < 0 || spec.test < 0 || spec.val < 0 ||
      std::abs(spec.train + spec.test + spec.val - 1.0) > 1e-9) {
    throw Error(ErrorCode::kParameter, "split fractions must be non-negative and sum to 1");
  }
  SplitUnit unit = spec.unit;
  if (unit == SplitUnit::kAuto) unit = dataset.has_user_ids() ? SplitUnit::kByUser : SplitUnit::kByRecord;

  const LabelSchema schema = LabelSchema::of(dataset.schema());
  const auto& records = dataset.records();

  std::vector<Unit> units;
  if (unit == SplitUnit::kByUser) {
    std::map<std::string, std::size_t> by_user;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!records[i].user_id) {
        throw Error(ErrorCode::kSplit, "record " + records[i].id + " has no user_id; cannot split by user");
      }
      auto [it, inserted] = by_user.emplace(*records[i].user_id, units.size());
      if (inserted) units.push_back({*records[i].user_id, {}, 0});
      units[it->second].records.push_back(i);
    }
    // A user's class is their most frequent label, lowest schema index on ties.
    for (auto& u : units) {
      std::vector<std::size_t> counts(schema.size(), 0);
      for (std::size_t i : u.records) ++counts[schema.index_of(records[i].label)];
      u.cls = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }
  } else {
    units.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      units.push_back({records[i].id, {i}, schema.index_of(records[i].label)});
    }
  }

  const std::size_t groups = spec.stratify_by_label ? schema.size() : 1;
  std::vector<std::vector<std::size_t>> members(groups);
  for (std::size_t u = 0; u < units.size(); ++u) {
    members[spec.stratify_by_label ? units[u].cls : 0].push_back(u);
  }
  for (std::size_t g = 0; g < groups; ++g) {
    std::sort(members[g].begin(), members[g].end(),
              [&](std::size_t a, std::size_t b) { return units[a].key < units[b].key; });
    Rng rng(mix_seed(spec.seed, "split/" + std::to_string(g)));
    rng.shuffle(std::span(members[g]));
  }

  const std::size_t n = units.size();
  const std::size_t n_val = std::min(n, round_count(spec.val, n));
  const std::size_t n_test = std::min(n - n_val, round_count(spec.test, n));

  std::vector<double> held_quota(groups);
  std::vector<double> val_quota(groups);
  std::vector<std::size_t> capacity(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const auto size = static_cast<double>(members[g].size());
    capacity[g] = members[g].size();
    held_quota[g] = (spec.val + spec.test) * size;
    val_quota[g] = spec.val * size;
  }
  // Held-out (val + test) first, so train is within one unit per class; then
  // val inside the held-out share, bounded so test stays within one unit too.
  const auto held = apportion_near(held_quota, capacity, n_val + n_test);
  std::vector<std::size_t> lo(groups);
  std::vector<std::size_t> hi(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const double test_quota = spec.test * static_cast<double>(members[g].size());
    const double h = static_cast<double>(held[g]);
    lo[g] = std::max(clamp_ceil(val_quota[g] - 1.0, held[g]), clamp_ceil(h - test_quota - 1.0, held[g]));
    hi[g] = std::min(clamp_floor(val_quota[g] + 1.0, held[g]), clamp_floor(h - test_quota + 1.0, held[g]));
    hi[g] = std::max(hi[g], lo[g]);
  }
  std::vector<std::size_t> val_take;
  try {
    val_take = apportion(val_quota, lo, hi, n_val);
  } catch (const Error&) {
    std::vector<std::size_t> zero(groups, 0);
    val_take = apportion(val_quota, zero, held, n_val);
  }

  std::vector<SplitName> assignment(records.size(), SplitName::kTrain);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t pos = 0; pos < members[g].size(); ++pos) {
      SplitName s = SplitName::kTrain;
      if (pos < val_take[g]) {
        s = SplitName::kVal;
      } else if (pos < held[g]) {
        s = SplitName::kTest;
      }
      for (std::size_t i : units[members[g][pos]].records) assignment[i] = s;
    }
  }

  std::vector<TextRecord> parts[3];
  for (std::size_t i = 0; i < records.size(); ++i) {
    TextRecord r = records[i];
    r.split = assignment[i];
    parts[static_cast<std::size_t>(assignment[i])].push_back(std::move(r));
  }

  const nlohmann::json base = {{"op", "split"},
                               {"input", dataset.name()},
                               {"input_hash", dataset.content_hash()},
                               {"fractions", {{"train", spec.train}, {"test", spec.test}, {"val", spec.val}}},
                               {"seed", spec.seed},
                               {"unit", to_string(unit)},
                               {"stratify_by_label", spec.stratify_by_label},
                               {"units", {{"total", n}, {"val", n_val}, {"test", n_test}, {"train", n - n_val - n_test}}}};
  auto make = [&](SplitName s) {
    nlohmann::json params = base;
    params["part"] = to_string(s);
    return Dataset(dataset.name() + "-" + std::string(to_string(s)), dataset.schema(),
                   std::move(parts[static_cast<std::size_t>(s)]), std::move(params));
  };
  SplitResult result;
  result.train = make(SplitName::kTrain);
  result.test = make(SplitName::kTest);
  result.val = make(SplitName::kVal);
  return result;
}

}  // namespace sisynth
