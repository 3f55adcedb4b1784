#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hlc/embedding.hpp"
#include "hlc/json.hpp"
#include "hlc/model.hpp"

namespace hlc {

using Timestamp = std::chrono::sys_seconds;

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp t);
/// Throws ConfigError on malformed input.
Timestamp parse_timestamp(std::string_view s);
Timestamp now_utc();

enum class ExampleSource { llm_accepted, user_corrected, simulated };

std::string_view to_string(ExampleSource source);
ExampleSource parse_example_source(std::string_view s);

/// A human-vetted (requirement, weak word, reasoning, label) record.
struct ValidatedExample {
  std::string example_id;
  std::string requirement_id;
  std::string text;
  std::string weak_word;
  std::string reasoning;
  Label label = Label::not_defect;
  EmbeddingVector embedding;
  ExampleSource source = ExampleSource::simulated;
  Timestamp validated_at{};

  /// Field-level invariants (ids, non-empty reasoning, weak word present in
  /// text). Dimension checks belong to the pool.
  void validate() const;

  friend bool operator==(const ValidatedExample&, const ValidatedExample&) = default;
};

Json to_json(const ValidatedExample& example);
/// Throws ConfigError describing the first missing or mistyped field.
ValidatedExample example_from_json(const Json& j);

struct RetrievedShot {
  std::shared_ptr<const ValidatedExample> example;
  double similarity = 0.0;
};

struct PoolStats {
  std::size_t total = 0;
  std::size_t defect = 0;
  std::size_t not_defect = 0;
  std::size_t dim = 0;

  friend bool operator==(const PoolStats&, const PoolStats&) = default;
};

Json to_json(const PoolStats& stats);

/// Immutable view of a pool at one point in time.
class PoolSnapshot {
 public:
  PoolSnapshot(std::size_t dim, std::vector<std::shared_ptr<const ValidatedExample>> records)
      : dim_(dim), records_(std::move(records)) {}

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t size() const { return records_.size(); }
  [[nodiscard]] bool empty() const { return records_.empty(); }
  [[nodiscard]] const std::vector<std::shared_ptr<const ValidatedExample>>& records() const { return records_; }
  [[nodiscard]] PoolStats stats() const;

 private:
  std::size_t dim_;
  std::vector<std::shared_ptr<const ValidatedExample>> records_;
};

/// Up to k/2 most similar examples per label, skipping records of
/// `exclude_requirement_id`. The merged result is ordered by ascending
/// similarity so the most similar shot comes last; ties go to the smaller
/// example_id. Throws DimensionMismatch, or ConfigError for odd k.
std::vector<RetrievedShot> retrieve_balanced(const PoolSnapshot& pool, const EmbeddingVector& target,
                                             std::size_t k,
                                             std::optional<std::string_view> exclude_requirement_id = std::nullopt);

/// Append-only example store. With a backing file every append is written
/// as one JSON line and synced before it becomes visible to readers.
class ShotPool {
 public:
  explicit ShotPool(std::size_t dim, std::optional<std::filesystem::path> path = std::nullopt);

  ShotPool(const ShotPool&) = delete;
  ShotPool& operator=(const ShotPool&) = delete;

  /// Returns the pool size after the append. Throws DuplicateExampleId,
  /// DimensionMismatch, IoError, or the example's own validation error.
  std::size_t append(ValidatedExample example);

  [[nodiscard]] PoolSnapshot snapshot() const;
  [[nodiscard]] PoolStats stats() const;
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] bool contains(const std::string& example_id) const;
  [[nodiscard]] const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  friend std::unique_ptr<ShotPool> load_pool(const std::filesystem::path&, std::size_t);

  void insert_loaded(ValidatedExample example);

  std::size_t dim_;
  std::optional<std::filesystem::path> path_;
  mutable std::shared_mutex mutex_;
  std::vector<std::shared_ptr<const ValidatedExample>> records_;
  std::unordered_set<std::string> ids_;
};

/// Opens a JSON-Lines pool file; an absent file yields an empty pool bound
/// to `path`. Throws IoError, CorruptRecordError (with line), or
/// DimensionMismatch when a record's embedding length differs from `dim`.
std::unique_ptr<ShotPool> load_pool(const std::filesystem::path& path, std::size_t dim);

}  // namespace hlc
