#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "hlc/error.hpp"
#include "hlc/json.hpp"
#include "hlc/patterns.hpp"
#include "hlc/predictor.hpp"
#include "hlc/shot_pool.hpp"

namespace hlc {

enum class ItemStatus { pending, validated };

std::string_view to_string(ItemStatus status);

struct Corrections {
  bool label = false;
  bool reasoning = false;

  [[nodiscard]] bool any() const { return label || reasoning; }
};

/// The reviewer's verdict on one item, with corrections derived from the
/// prediction that was shown.
struct ValidationDecision {
  std::string item_id;
  Label final_label = Label::not_defect;
  std::string final_reasoning;
  Corrections corrected;
  Prediction shown;
  std::string example_id;
  Timestamp validated_at{};
};

struct ReviewItem {
  std::string item_id;
  Finding finding;
  ItemStatus status = ItemStatus::pending;
  /// Present for served pending items (unless `error` is set) and for
  /// validated items (the prediction the reviewer saw).
  std::optional<Prediction> prediction;
  std::vector<RetrievedShot> shots_used;
  /// Backend/parse failure while computing the prediction; the item stays pending.
  std::optional<ErrorInfo> error;
  std::optional<ValidationDecision> validation;
};

struct SubmitResult {
  std::size_t pool_size_after = 0;
  ExampleSource source = ExampleSource::llm_accepted;
};

struct ServiceStats {
  std::size_t pending = 0;
  std::size_t validated = 0;
  PoolStats pool;
  double correction_rate = 0.0;
};

Json to_json(const ReviewItem& item);
Json to_json(const ServiceStats& stats);
Json to_json(const RetrievedShot& shot);

struct ReviewServiceOptions {
  /// Requirements and items; written atomically after each mutation.
  std::optional<std::filesystem::path> state_path;
  std::function<Timestamp()> clock = now_utc;
};

/// The human side of the loop: FIFO queue of findings whose predictions are
/// computed at serve time against the current pool. Validation is the only
/// path that grows the pool.
class ReviewService {
 public:
  /// Loads existing state from options.state_path when the file exists.
  ReviewService(WeakWordCatalog catalog, std::shared_ptr<ShotPool> pool, Predictor predictor,
                ReviewServiceOptions options = {});

  /// One pending item per detected weak word, in requirement then offset
  /// order. The whole batch is rejected on DuplicateRequirementId or an
  /// invalid requirement.
  std::vector<ReviewItem> ingest_requirements(const std::vector<Requirement>& batch);

  /// Oldest pending item with its current prediction; nullopt when the queue
  /// is empty.
  [[nodiscard]] std::optional<ReviewItem> next_item() const;

  /// Throws UnknownItem.
  [[nodiscard]] ReviewItem get_item(const std::string& item_id) const;

  /// Throws UnknownItem, AlreadyValidated or EmptyReasoning. Prediction
  /// errors while establishing the shown prediction propagate and leave the
  /// item pending.
  SubmitResult submit_validation(const std::string& item_id, Label final_label, const std::string& final_reasoning);

  [[nodiscard]] ServiceStats stats() const;

  /// The most recent `limit` pool records in append order (all when nullopt).
  [[nodiscard]] std::vector<std::shared_ptr<const ValidatedExample>> pool_records(
      std::optional<std::size_t> limit = std::nullopt) const;

 private:
  struct StoredItem {
    std::string item_id;
    Finding finding;
    ItemStatus status = ItemStatus::pending;
    std::optional<ValidationDecision> validation;
  };
  struct Memo {
    std::size_t pool_size;
    PredictionResult result;
  };

  ReviewItem serve(const StoredItem& item) const;
  PredictionResult predict_current(const StoredItem& item, const PoolSnapshot& snapshot) const;
  void load_state();
  void save_state() const;

  WeakWordCatalog catalog_;
  std::shared_ptr<ShotPool> pool_;
  Predictor predictor_;
  ReviewServiceOptions options_;

  mutable std::shared_mutex state_mutex_;
  std::vector<Requirement> requirements_;
  std::vector<StoredItem> items_;
  std::map<std::string, std::size_t> item_index_;
  std::map<std::string, std::size_t> requirement_index_;
  std::size_t next_seq_ = 1;

  mutable std::mutex memo_mutex_;
  mutable std::map<std::string, Memo> memo_;
};

/// HTTP JSON front end for a ReviewService (cpp-httplib).
///   POST /requirements                 batch ingest
///   GET  /items/next                   {"item": ...|null}
///   GET  /items/{id}
///   POST /items/{id}/validation        {final_label, final_reasoning}
///   GET  /stats
///   GET  /pool/records?limit=N
/// Errors are {"code", "message"} with a matching HTTP status.
class ReviewServer {
 public:
  explicit ReviewServer(ReviewService& service);
  ~ReviewServer();

  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Binds to a fixed port; throws IoError on failure.
  void bind(const std::string& host, int port);
  /// Binds to an ephemeral port and returns it.
  int bind_to_any_port(const std::string& host);
  /// Serves until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status used for an error code on the wire.
int http_status_for(ErrorCode code);

}  // namespace hlc
