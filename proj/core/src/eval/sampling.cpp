#include "hlc/eval/sampling.hpp"

#include <algorithm>

#include "hlc/error.hpp"
#include "hlc/eval/rng.hpp"

namespace hlc::eval {

SamplingPlan build_sampling_plan(const std::vector<DatasetRecord>& dataset, std::uint64_t seed,
                                 const std::vector<std::size_t>& pool_sizes) {
  constexpr std::size_t kStrata = 2;
  if (dataset.empty() || dataset.size() % (kFoldCount * kStrata) != 0) {
    throw Error(ErrorCode::IndivisibleDataset,
                "dataset size " + std::to_string(dataset.size()) + " must be a positive multiple of " +
                    std::to_string(kFoldCount * kStrata) + " (3 folds x 2 labels)");
  }

  std::vector<std::string> by_label[kStrata];
  for (const auto& r : dataset) {
    by_label[static_cast<int>(r.label)].push_back(r.id);
  }
  if (by_label[0].size() != by_label[1].size()) {
    throw Error(ErrorCode::IndivisibleDataset, "dataset is not balanced: " + std::to_string(by_label[0].size()) +
                                                   " defect vs " + std::to_string(by_label[1].size()) + " not_defect");
  }
  for (auto& ids : by_label) {
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw Error(ErrorCode::ConfigError, "dataset ids are not unique");
    }
  }

  const std::size_t per_label_fold = by_label[0].size() / kFoldCount;
  std::vector<std::size_t> sizes = pool_sizes;
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  for (std::size_t s : sizes) {
    if (s == 0 || s % kStrata != 0 || s / kStrata > per_label_fold) {
      throw Error(ErrorCode::ConfigError, "pool size " + std::to_string(s) + " must be even, positive and at most " +
                                              std::to_string(per_label_fold * kStrata));
    }
  }

  SamplingPlan plan;
  plan.seed = seed;
  Rng rng(seed);

  std::array<std::array<std::vector<std::string>, kStrata>, kFoldCount> fold_parts;
  for (std::size_t label = 0; label < kStrata; ++label) {
    auto ids = by_label[label];
    rng.shuffle(ids);
    for (std::size_t f = 0; f < kFoldCount; ++f) {
      const auto begin = ids.begin() + static_cast<std::ptrdiff_t>(f * per_label_fold);
      fold_parts[f][label].assign(begin, begin + static_cast<std::ptrdiff_t>(per_label_fold));
      std::sort(fold_parts[f][label].begin(), fold_parts[f][label].end());
    }
  }

  for (std::size_t f = 0; f < kFoldCount; ++f) {
    auto& fold = plan.folds[f];
    for (const auto& part : fold_parts[f]) fold.insert(fold.end(), part.begin(), part.end());
    std::sort(fold.begin(), fold.end());

    std::array<std::vector<std::string>, kStrata> current = fold_parts[f];
    for (std::size_t size : sizes) {
      std::vector<std::string> pool;
      for (auto& part : current) {
        rng.shuffle(part);
        part.resize(size / kStrata);
        std::sort(part.begin(), part.end());
        pool.insert(pool.end(), part.begin(), part.end());
      }
      std::sort(pool.begin(), pool.end());
      plan.nested_pools[f][size] = std::move(pool);
    }
  }
  return plan;
}

Json to_json(const SamplingPlan& plan) {
  Json folds = Json::array();
  Json nested = Json::array();
  for (std::size_t f = 0; f < kFoldCount; ++f) {
    folds.push_back(plan.folds[f]);
    Json pools = Json::object();
    for (const auto& [size, ids] : plan.nested_pools[f]) {
      pools[std::to_string(size)] = ids;
    }
    nested.push_back(std::move(pools));
  }
  return Json{{"seed", plan.seed},
              {"folds", std::move(folds)},
              {"nested_pools", std::move(nested)},
              {"assignment", plan.assignment}};
}

SamplingPlan plan_from_json(const Json& j) {
  try {
    SamplingPlan plan;
    plan.seed = j.at("seed").get<std::uint64_t>();
    const auto& folds = j.at("folds");
    const auto& nested = j.at("nested_pools");
    const auto& assignment = j.at("assignment");
    if (folds.size() != kFoldCount || nested.size() != kFoldCount || assignment.size() != kFoldCount) {
      throw Error(ErrorCode::ConfigError, "plan must describe exactly 3 folds");
    }
    for (std::size_t f = 0; f < kFoldCount; ++f) {
      plan.folds[f] = folds[f].get<std::vector<std::string>>();
      for (const auto& [size, ids] : nested[f].items()) {
        plan.nested_pools[f][std::stoul(size)] = ids.get<std::vector<std::string>>();
      }
      plan.assignment[f] = assignment[f].get<std::size_t>();
    }
    return plan;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed sampling plan: ") + e.what());
  }
}

}  // namespace hlc::eval
