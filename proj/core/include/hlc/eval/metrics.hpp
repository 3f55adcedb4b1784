#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hlc/model.hpp"

namespace hlc::eval {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  [[nodiscard]] std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Precision, recall and F1 with defect as the positive class. A 0/0 ratio
/// yields 0.0 and sets the matching degenerate flag.
struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
};

struct LabeledPair {
  Label gold;
  Label predicted;
};

struct ConfidenceIntervals {
  double p_lo = 0.0;
  double p_hi = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  double f1_lo = 0.0;
  double f1_hi = 0.0;
};

inline constexpr std::size_t kBootstrapIterations = 10'000;

ConfusionCounts count_outcomes(std::span<const LabeledPair> pairs);

Metrics compute_metrics(const ConfusionCounts& counts);

/// Linear interpolation between closest ranks on sorted data:
/// position q*(n-1), value v[lo] + frac*(v[lo+1]-v[lo]).
double percentile(std::span<const double> sorted, double q);

/// Percentile bootstrap: `iterations` resamples of n indices drawn with
/// Rng::uniform_index from one seeded stream (resample-major), metrics per
/// resample, then the 2.5th and 97.5th percentiles. Throws EmptyPredictions.
ConfidenceIntervals bootstrap_ci(std::span<const LabeledPair> pairs, std::size_t iterations = kBootstrapIterations,
                                 std::uint64_t seed = 0);

}  // namespace hlc::eval
