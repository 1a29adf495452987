#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sisynth/dataset.hpp"

namespace sisynth {

/// round(fraction * n), halves rounded up.
std::size_t round_count(double fraction, std::size_t n);

/// Integer allocation of `total` units over classes with real-valued quotas.
/// Starts every class at lo[i], then repeatedly grants one unit to the class
/// furthest below its quota (lowest index on ties) that is still under hi[i].
/// Throws kParameter when sum(lo) > total or sum(hi) < total.
std::vector<std::size_t> apportion(std::span<const double> quotas, std::span<const std::size_t> lo,
                                   std::span<const std::size_t> hi, std::size_t total);

/// Allocation within one unit of every quota, capped by class capacity.
std::vector<std::size_t> apportion_near(std::span<const double> quotas,
                                        std::span<const std::size_t> capacity, std::size_t total);

enum class SplitUnit : std::uint8_t { kAuto, kByUser, kByRecord };
std::string_view to_string(SplitUnit unit);
SplitUnit parse_split_unit(std::string_view s);

struct SplitSpec {
  double train = 0.70;
  double test = 0.20;
  double val = 0.10;
  std::uint64_t seed = 0;
  /// kAuto splits by user when every record has a user id.
  SplitUnit unit = SplitUnit::kAuto;
  bool stratify_by_label = true;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  Dataset val;
};

/// Partitions the dataset's units (users or records): val = round(val * N),
/// test = round(test * N), train takes the rest. With stratification every
/// class lands within one unit of its proportional share in each part.
/// Records are tagged with their split.
SplitResult split_dataset(const Dataset& dataset, const SplitSpec& spec);

}  // namespace sisynth
