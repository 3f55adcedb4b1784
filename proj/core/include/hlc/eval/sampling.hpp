#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hlc/eval/dataset.hpp"
#include "hlc/json.hpp"

namespace hlc::eval {

inline constexpr std::size_t kFoldCount = 3;

/// Default nested pool sizes per fold.
inline const std::vector<std::size_t> kDefaultPoolSizes{20, 40, 80, 160, 320};

/// Three label-stratified folds, nested stratified pools inside each fold,
/// and the cross assignment pool fold i -> evaluation fold (i + 1) mod 3.
/// All id lists are sorted.
struct SamplingPlan {
  std::uint64_t seed = 0;
  std::array<std::vector<std::string>, kFoldCount> folds;
  std::array<std::map<std::size_t, std::vector<std::string>>, kFoldCount> nested_pools;
  std::array<std::size_t, kFoldCount> assignment{1, 2, 0};

  friend bool operator==(const SamplingPlan&, const SamplingPlan&) = default;
};

/// Requires a balanced dataset whose size is divisible by 6 (IndivisibleDataset
/// otherwise). Each class is shuffled and cut into three equal parts; inside
/// a fold the largest pool is drawn first and every smaller pool is drawn
/// from the next larger one, size/2 per label. Pool sizes must be even and
/// fit within a fold (ConfigError).
SamplingPlan build_sampling_plan(const std::vector<DatasetRecord>& dataset, std::uint64_t seed,
                                 const std::vector<std::size_t>& pool_sizes = kDefaultPoolSizes);

/// {seed, folds, nested_pools, assignment}
Json to_json(const SamplingPlan& plan);
SamplingPlan plan_from_json(const Json& j);

}  // namespace hlc::eval
