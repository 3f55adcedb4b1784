#include "hlc/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <thread>

#include "hlc/error.hpp"
#include "hlc/text.hpp"

namespace hlc {
namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

std::vector<double> parse_embedding_body(const std::string& body) {
  const auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::ProviderError, "embedding response is not JSON");
  }
  const nlohmann::json* array = nullptr;
  if (doc.is_array()) {
    array = &doc;
  } else if (doc.is_object() && doc.contains("data") && doc["data"].is_array() &&
             !doc["data"].empty() && doc["data"][0].contains("embedding")) {
    array = &doc["data"][0]["embedding"];
  } else if (doc.is_object() && doc.contains("embedding")) {
    array = &doc["embedding"];
  }
  if (array == nullptr || !array->is_array()) {
    throw Error(ErrorCode::ProviderError, "embedding response has no float array");
  }
  std::vector<double> values;
  values.reserve(array->size());
  for (const auto& v : *array) {
    if (!v.is_number()) {
      throw Error(ErrorCode::ProviderError, "embedding response contains a non-number");
    }
    values.push_back(v.get<double>());
  }
  return values;
}

}  // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "embedding has zero dimensions");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::ProviderError, "embedding contains a non-finite value");
    }
  }
}

double EmbeddingVector::norm() const { return std::sqrt(dot(values_, values_)); }

void EmbeddingProviderConfig::validate() const {
  if (dim == 0) {
    throw Error(ErrorCode::ConfigError, "embedding dim must be positive");
  }
  if (kind == ProviderKind::remote && (endpoint_url.empty() || model_name.empty())) {
    throw Error(ErrorCode::ConfigError, "remote embedding provider needs endpoint_url and model_name");
  }
  if (kind == ProviderKind::deterministic_local && dim < 8) {
    throw Error(ErrorCode::ConfigError, "local embedding dim must be at least 8");
  }
  if (retry.max_attempts < 1 || max_in_flight == 0) {
    throw Error(ErrorCode::ConfigError, "retry attempts and in-flight bound must be positive");
  }
}

EmbeddingVector deterministic_fallback_embed(std::string_view text, std::size_t dim) {
  if (dim < 8) {
    throw Error(ErrorCode::ConfigError, "fallback embedding dim must be at least 8");
  }
  std::u32string padded = U" ";
  padded += to_code_points(normalize_text(text));
  padded += U' ';

  std::vector<double> counts(dim, 0.0);
  const std::u32string_view view(padded);
  if (view.size() < 3) {
    counts[fnv1a(to_utf8(view)) % dim] += 1.0;
  } else {
    for (std::size_t i = 0; i + 3 <= view.size(); ++i) {
      counts[fnv1a(to_utf8(view.substr(i, 3))) % dim] += 1.0;
    }
  }
  const double n = std::sqrt(dot(counts, counts));
  for (double& c : counts) {
    c /= n;
  }
  return EmbeddingVector(std::move(counts));
}

LocalHashEmbedder::LocalHashEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ < 8) {
    throw Error(ErrorCode::ConfigError, "fallback embedding dim must be at least 8");
  }
}

EmbeddingVector LocalHashEmbedder::embed(std::string_view text) const {
  return deterministic_fallback_embed(text, dim_);
}

RemoteEmbedder::RemoteEmbedder(EmbeddingProviderConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      in_flight_(static_cast<std::ptrdiff_t>(config_.max_in_flight)) {
  config_.validate();
  if (!transport_) {
    throw Error(ErrorCode::ConfigError, "remote embedding provider needs a transport");
  }
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) const {
  HttpRequest request;
  request.url = config_.endpoint_url;
  request.body = nlohmann::json{{"input", std::string(text)}, {"model", config_.model_name}}.dump();
  request.headers["Content-Type"] = "application/json";
  if (const auto key = api_key_from_env(config_.api_key_env); !key.empty()) {
    request.headers["Authorization"] = "Bearer " + key;
  }

  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(config_.retry.base_delay * (1 << (attempt - 2)));
    }
    HttpResponse response;
    {
      in_flight_.acquire();
      try {
        response = transport_->post(request);
      } catch (const Error& e) {
        in_flight_.release();
        last_error = e.what();
        continue;
      }
      in_flight_.release();
    }
    if (response.status >= 200 && response.status < 300) {
      auto values = parse_embedding_body(response.body);
      if (values.size() != config_.dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    "embedding provider returned " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(config_.dim));
      }
      return EmbeddingVector(std::move(values));
    }
    last_error = "HTTP status " + std::to_string(response.status);
    if (!is_transient_status(response.status)) {
      break;
    }
  }
  throw Error(ErrorCode::ProviderError, "embedding request failed: " + last_error);
}

std::shared_ptr<const EmbeddingProvider> make_embedding_provider(const EmbeddingProviderConfig& config,
                                                                 std::shared_ptr<HttpTransport> transport) {
  config.validate();
  if (config.kind == ProviderKind::deterministic_local) {
    return std::make_shared<LocalHashEmbedder>(config.dim);
  }
  if (!transport) {
    transport = make_http_transport();
  }
  return std::make_shared<RemoteEmbedder>(config, std::move(transport));
}

EmbeddingVector embed_text(std::string_view text, const EmbeddingProvider& provider) {
  if (trim(text).empty()) {
    throw Error(ErrorCode::ConfigError, "cannot embed blank text");
  }
  auto v = provider.embed(text);
  if (v.dim() != provider.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "provider returned a vector of the wrong length");
  }
  return v;
}

EmbeddingVector embed_text(std::string_view text, const EmbeddingProviderConfig& config) {
  return embed_text(text, *make_embedding_provider(config));
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of vectors with dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
  }
  return std::clamp(dot(a.values(), b.values()) / (na * nb), -1.0, 1.0);
}

}  // namespace hlc
