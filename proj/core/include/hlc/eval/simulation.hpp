#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hlc/backend.hpp"
#include "hlc/embedding.hpp"
#include "hlc/error.hpp"
#include "hlc/eval/dataset.hpp"
#include "hlc/eval/metrics.hpp"
#include "hlc/eval/sampling.hpp"
#include "hlc/shot_pool.hpp"

namespace hlc::eval {

/// Stored as the reasoning of label-only pool examples; never rendered
/// because non-CoT prompts omit reasoning lines.
inline constexpr std::string_view kLabelOnlyReasoning = "Label-only example without a validated explanation.";

/// One configuration row. pool_size 0 is the zero-shot row and requires k = 0.
struct RunConfig {
  std::size_t pool_size = 0;
  bool cot = true;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::size_t bootstrap_iterations = kBootstrapIterations;

  /// Throws ConfigError.
  void validate() const;
};

struct RunResult {
  RunConfig config;
  std::string approach;
  /// 0..2 for a single fold, nullopt for the aggregate over all folds.
  std::optional<std::size_t> fold;
  ConfusionCounts counts;
  Metrics metrics;
  ConfidenceIntervals ci95;
  std::size_t n_predictions = 0;
  /// Instances whose prediction failed (unparseable output or backend
  /// error); they are scored as not_defect.
  std::size_t parse_failures = 0;
};

struct InstancePrediction {
  std::string id;
  std::size_t fold = 0;
  Label gold = Label::not_defect;
  Label predicted = Label::not_defect;
  std::optional<ErrorInfo> error;
};

struct SimulationOutcome {
  std::vector<RunResult> per_fold;
  RunResult aggregate;
  /// Sorted by instance id.
  std::vector<InstancePrediction> predictions;
};

struct ReasoningOutcome {
  std::optional<ValidatedExample> example;
  std::optional<ErrorInfo> error;
};

/// Asks the backend for one explanation per record conditioned on its gold
/// label. Examples carry source=simulated and the gold label; an answer
/// whose label contradicts the gold label becomes an InconsistentReasoning
/// error for that record. Results follow input order.
std::vector<ReasoningOutcome> generate_pool_reasoning(std::span<const DatasetRecord> records, CompletionBackend& backend,
                                                      const EmbeddingProvider& provider, std::size_t jobs = 4);

/// Runs configurations of the simulated feedback loop over a fixed plan.
/// Generated pool examples are cached across runs.
class Simulator {
 public:
  Simulator(std::vector<DatasetRecord> dataset, SamplingPlan plan, std::shared_ptr<const EmbeddingProvider> provider,
            std::shared_ptr<CompletionBackend> backend, std::size_t jobs = 4);

  /// For each fold: materialize the pool (skipped when zero-shot), predict
  /// the assigned evaluation fold, score. The aggregate covers all folds'
  /// predictions sorted by instance id.
  SimulationOutcome run(const RunConfig& config);

  [[nodiscard]] const SamplingPlan& plan() const { return plan_; }

 private:
  std::shared_ptr<const ValidatedExample> pool_example(const DatasetRecord& record, bool cot);

  std::vector<DatasetRecord> dataset_;
  std::map<std::string, std::size_t> by_id_;
  SamplingPlan plan_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  std::shared_ptr<CompletionBackend> backend_;
  std::size_t jobs_;
  std::map<std::pair<std::string, bool>, std::shared_ptr<const ValidatedExample>> examples_;
  std::map<std::pair<std::string, bool>, ErrorInfo> failed_examples_;
};

/// Oracle configuration whose gold map covers every dataset record.
OracleConfig oracle_for(const std::vector<DatasetRecord>& dataset, std::set<FindingKey> flip = {});

}  // namespace hlc::eval
