#include "hlc/predictor.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace hlc {

void PredictorConfig::validate() const {
  if (k % 2 != 0) {
    throw Error(ErrorCode::ConfigError, "k must be even, got " + std::to_string(k));
  }
  if (jobs == 0) {
    throw Error(ErrorCode::ConfigError, "jobs must be positive");
  }
  if (max_output_tokens == 0) {
    throw Error(ErrorCode::ConfigError, "max_output_tokens must be positive");
  }
}

Predictor::Predictor(PredictorConfig config, std::shared_ptr<const EmbeddingProvider> provider,
                     std::shared_ptr<CompletionBackend> backend)
    : config_(config), provider_(std::move(provider)), backend_(std::move(backend)) {
  config_.validate();
  if (!provider_ || !backend_) {
    throw Error(ErrorCode::ConfigError, "predictor needs an embedding provider and a backend");
  }
}

PredictionResult Predictor::predict(const Finding& finding, const PoolSnapshot& pool) const {
  finding.validate();
  PredictionResult result;
  if (!pool.empty() && config_.k > 0) {
    if (provider_->dim() != pool.dim()) {
      throw Error(ErrorCode::DimensionMismatch, "provider dim " + std::to_string(provider_->dim()) +
                                                    " does not match pool dim " + std::to_string(pool.dim()));
    }
    const auto target = embed_text(finding.requirement.text, *provider_);
    result.shots_used = retrieve_balanced(pool, target, config_.k, finding.requirement.id);
  }
  result.prompt = build_prompt(finding, result.shots_used, config_.cot);

  CompletionRequest request{result.prompt.system_text, result.prompt.user_text, config_.max_output_tokens};
  const std::string raw = backend_->complete(request);
  try {
    result.prediction = parse_output(raw, config_.cot);
  } catch (const Error& e) {
    const bool retryable = e.code() == ErrorCode::MissingLabel || e.code() == ErrorCode::UnknownLabel;
    if (!backend_->is_remote() || !retryable) {
      throw;
    }
    request.user_text += format_reminder(config_.cot);
    result.prediction = parse_output(backend_->complete(request), config_.cot);
  }
  return result;
}

std::vector<BatchOutcome> Predictor::predict_batch(std::span<const Finding> findings,
                                                   const PoolSnapshot& pool) const {
  std::vector<BatchOutcome> outcomes(findings.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < findings.size(); i = next++) {
      try {
        outcomes[i].result = predict(findings[i], pool);
      } catch (const Error& e) {
        outcomes[i].error = ErrorInfo::from(e);
      } catch (const std::exception& e) {
        outcomes[i].error = ErrorInfo{ErrorCode::BackendUnavailable, e.what()};
      }
    }
  };
  const std::size_t threads = std::min(config_.jobs, findings.size());
  if (threads <= 1) {
    worker();
    return outcomes;
  }
  std::vector<std::jthread> pool_threads;
  pool_threads.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool_threads.emplace_back(worker);
  }
  pool_threads.clear();
  return outcomes;
}

Predictor make_predictor(const PredictorConfig& config, const EmbeddingProviderConfig& provider,
                         const BackendConfig& backend) {
  return Predictor(config, make_embedding_provider(provider), make_backend(backend));
}

}  // namespace hlc
