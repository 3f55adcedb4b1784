#include "hlc/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hlc/error.hpp"
#include "hlc/eval/rng.hpp"

namespace hlc::eval {

ConfusionCounts count_outcomes(std::span<const LabeledPair> pairs) {
  ConfusionCounts c;
  for (const auto& p : pairs) {
    const bool gold = p.gold == Label::defect;
    const bool predicted = p.predicted == Label::defect;
    if (gold && predicted) ++c.tp;
    else if (!gold && predicted) ++c.fp;
    else if (gold && !predicted) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Metrics compute_metrics(const ConfusionCounts& counts) {
  Metrics m;
  const auto tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp == 0) {
    m.precision_degenerate = true;
  } else {
    m.precision = tp / static_cast<double>(counts.tp + counts.fp);
  }
  if (counts.tp + counts.fn == 0) {
    m.recall_degenerate = true;
  } else {
    m.recall = tp / static_cast<double>(counts.tp + counts.fn);
  }
  if (m.precision + m.recall == 0.0) {
    m.f1_degenerate = true;
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) {
    throw Error(ErrorCode::EmptyPredictions, "percentile of an empty sample");
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ConfidenceIntervals bootstrap_ci(std::span<const LabeledPair> pairs, std::size_t iterations, std::uint64_t seed) {
  if (pairs.empty()) {
    throw Error(ErrorCode::EmptyPredictions, "bootstrap needs at least one prediction");
  }
  if (iterations == 0) {
    throw Error(ErrorCode::ConfigError, "bootstrap needs at least one iteration");
  }
  // 0 = tp, 1 = fp, 2 = fn, 3 = tn
  std::vector<std::uint8_t> outcome(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const bool gold = pairs[i].gold == Label::defect;
    const bool predicted = pairs[i].predicted == Label::defect;
    outcome[i] = static_cast<std::uint8_t>(gold ? (predicted ? 0 : 2) : (predicted ? 1 : 3));
  }

  std::vector<double> precision(iterations);
  std::vector<double> recall(iterations);
  std::vector<double> f1(iterations);
  Rng rng(seed);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::size_t tally[4] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      ++tally[outcome[rng.uniform_index(pairs.size())]];
    }
    const auto m = compute_metrics({tally[0], tally[1], tally[2], tally[3]});
    precision[it] = m.precision;
    recall[it] = m.recall;
    f1[it] = m.f1;
  }
  std::sort(precision.begin(), precision.end());
  std::sort(recall.begin(), recall.end());
  std::sort(f1.begin(), f1.end());

  return {percentile(precision, 0.025), percentile(precision, 0.975), percentile(recall, 0.025),
          percentile(recall, 0.975),    percentile(f1, 0.025),        percentile(f1, 0.975)};
}

}  // namespace hlc::eval
