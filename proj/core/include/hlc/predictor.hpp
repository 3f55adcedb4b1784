#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hlc/backend.hpp"
#include "hlc/embedding.hpp"
#include "hlc/error.hpp"
#include "hlc/prompt.hpp"
#include "hlc/shot_pool.hpp"

namespace hlc {

struct PredictorConfig {
  std::size_t k = 12;
  bool cot = true;
  /// Upper bound on concurrent predictions in predict_batch.
  std::size_t jobs = 4;
  std::size_t max_output_tokens = 256;

  /// Throws ConfigError for odd k or zero jobs.
  void validate() const;
};

struct PredictionResult {
  Prediction prediction;
  std::vector<RetrievedShot> shots_used;
  PromptBundle prompt;
};

struct BatchOutcome {
  std::optional<PredictionResult> result;
  std::optional<ErrorInfo> error;

  [[nodiscard]] bool ok() const { return result.has_value(); }
};

/// embed target -> retrieve shots -> build prompt -> complete -> parse.
/// Never writes to the pool.
class Predictor {
 public:
  Predictor(PredictorConfig config, std::shared_ptr<const EmbeddingProvider> provider,
            std::shared_ptr<CompletionBackend> backend);

  /// Zero-shot when the pool is empty or k is 0; otherwise retrieves
  /// balanced shots excluding the finding's own requirement.
  [[nodiscard]] PredictionResult predict(const Finding& finding, const PoolSnapshot& pool) const;

  /// Results follow input order. Failures are captured per item.
  [[nodiscard]] std::vector<BatchOutcome> predict_batch(std::span<const Finding> findings,
                                                        const PoolSnapshot& pool) const;

  [[nodiscard]] const PredictorConfig& config() const { return config_; }
  [[nodiscard]] const EmbeddingProvider& provider() const { return *provider_; }
  [[nodiscard]] CompletionBackend& backend() const { return *backend_; }

 private:
  PredictorConfig config_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  std::shared_ptr<CompletionBackend> backend_;
};

/// Convenience wrapper building provider and backend from their configs.
Predictor make_predictor(const PredictorConfig& config, const EmbeddingProviderConfig& provider,
                         const BackendConfig& backend);

}  // namespace hlc
