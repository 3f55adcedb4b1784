#pragma once

#include <memory>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hlc/http.hpp"

namespace hlc {

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  /// Throws DimensionMismatch for an empty vector, ProviderError for
  /// non-finite components.
  explicit EmbeddingVector(std::vector<double> values);

  [[nodiscard]] std::size_t dim() const { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] double norm() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

enum class ProviderKind { deterministic_local, remote };

struct EmbeddingProviderConfig {
  ProviderKind kind = ProviderKind::deterministic_local;
  std::string endpoint_url;
  std::string model_name;
  std::string api_key_env = "HLC_EMBEDDING_API_KEY";
  std::size_t dim = 256;
  RetryPolicy retry;
  std::size_t max_in_flight = 4;

  /// Throws ConfigError.
  void validate() const;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  [[nodiscard]] virtual std::size_t dim() const = 0;
  /// Throws ProviderError, or DimensionMismatch when the backend answers
  /// with the wrong length.
  [[nodiscard]] virtual EmbeddingVector embed(std::string_view text) const = 0;
};

/// Hashed character-trigram provider; pure and offline.
class LocalHashEmbedder final : public EmbeddingProvider {
 public:
  explicit LocalHashEmbedder(std::size_t dim = 256);
  [[nodiscard]] std::size_t dim() const override { return dim_; }
  [[nodiscard]] EmbeddingVector embed(std::string_view text) const override;

 private:
  std::size_t dim_;
};

/// POSTs {"input", "model"} to an embedding endpoint. Accepts either a bare
/// JSON float array or the common {"data":[{"embedding":[...]}]} shape.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  RemoteEmbedder(EmbeddingProviderConfig config, std::shared_ptr<HttpTransport> transport);
  [[nodiscard]] std::size_t dim() const override { return config_.dim; }
  [[nodiscard]] EmbeddingVector embed(std::string_view text) const override;

 private:
  EmbeddingProviderConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  mutable std::counting_semaphore<> in_flight_;
};

/// Builds the configured provider. A null transport means the default
/// httplib transport for remote providers.
std::shared_ptr<const EmbeddingProvider> make_embedding_provider(
    const EmbeddingProviderConfig& config, std::shared_ptr<HttpTransport> transport = nullptr);

/// Throws ConfigError on blank text.
EmbeddingVector embed_text(std::string_view text, const EmbeddingProvider& provider);
EmbeddingVector embed_text(std::string_view text, const EmbeddingProviderConfig& config);

/// dot(a, b) / (|a| |b|). Throws DimensionMismatch or ZeroVector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Character trigrams of the normalized text (padded with one space on each
/// side) hashed with 64-bit FNV-1a into `dim` buckets, then L2-normalized.
/// Requires dim >= 8.
EmbeddingVector deterministic_fallback_embed(std::string_view text, std::size_t dim = 256);

}  // namespace hlc
