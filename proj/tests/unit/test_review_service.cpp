#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hlc/backend.hpp"
#include "hlc/error.hpp"
#include "hlc/review_service.hpp"

using namespace hlc;
using hlc::testing::TempDir;

namespace {

constexpr std::size_t kDim = 64;

struct Harness {
  explicit Harness(std::optional<std::filesystem::path> state = std::nullopt,
                   std::optional<std::filesystem::path> pool_path = std::nullopt)
      : pool(pool_path ? std::shared_ptr<ShotPool>(load_pool(*pool_path, kDim)) : std::make_shared<ShotPool>(kDim)) {
    OracleConfig oc;
    oc.gold = {{{"255", "certain"}, Label::defect},
               {{"92", "appropriate"}, Label::not_defect},
               {{"7", "certain"}, Label::defect},
               {{"7", "appropriate"}, Label::defect}};
    ReviewServiceOptions options;
    options.state_path = std::move(state);
    options.clock = [] { return parse_timestamp("2024-06-01T08:00:00Z"); };
    service = std::make_unique<ReviewService>(
        WeakWordCatalog::from_entries({"certain", "appropriate"}), pool,
        Predictor(PredictorConfig{}, std::make_shared<LocalHashEmbedder>(kDim), std::make_shared<OracleBackend>(oc)),
        options);
  }
  std::shared_ptr<ShotPool> pool;
  std::unique_ptr<ReviewService> service;
};

std::vector<Requirement> table_pair() {
  return {{"255", hlc::testing::kText255}, {"92", hlc::testing::kText92}};
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::ConfigError;
}

}  // namespace

TEST(ReviewService, IngestCreatesOneItemPerWeakWord) {
  Harness h;
  const auto items = h.service->ingest_requirements(table_pair());
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0].finding.occurrence.catalog_entry, "certain");
  EXPECT_EQ(items[1].finding.occurrence.catalog_entry, "appropriate");
  EXPECT_EQ(items[0].status, ItemStatus::pending);
  EXPECT_TRUE(h.service->ingest_requirements({{"3", "The system shall log events."}}).empty());
  EXPECT_EQ(h.service->ingest_requirements({{"7", "Use appropriate and certain parts."}}).size(), 2u);
}

TEST(ReviewService, DuplicateRequirementRejectsWholeBatch) {
  Harness h;
  h.service->ingest_requirements({{"255", hlc::testing::kText255}});
  EXPECT_EQ(code_of([&] { h.service->ingest_requirements({{"92", hlc::testing::kText92}, {"255", "certain"}}); }),
            ErrorCode::DuplicateRequirementId);
  EXPECT_EQ(code_of([&] { h.service->ingest_requirements({{"8", "certain"}, {"8", "certain"}}); }),
            ErrorCode::DuplicateRequirementId);
  EXPECT_EQ(code_of([&] { h.service->ingest_requirements({{"9", " "}}); }), ErrorCode::InvalidRequirement);
  EXPECT_EQ(h.service->stats().pending, 1u);
}

TEST(ReviewService, NextItemIsFifoAndIdempotent) {
  Harness h;
  EXPECT_FALSE(h.service->next_item().has_value());
  const auto items = h.service->ingest_requirements(table_pair());
  const auto first = h.service->next_item();
  ASSERT_TRUE(first.has_value());
  EXPECT_EQ(first->item_id, items[0].item_id);
  ASSERT_TRUE(first->prediction.has_value());
  EXPECT_EQ(first->prediction->label, Label::defect);
  EXPECT_EQ(h.service->next_item()->item_id, first->item_id);
  EXPECT_EQ(h.pool->size(), 0u);
}

TEST(ReviewService, AcceptAndCorrect) {
  Harness h;
  h.service->ingest_requirements(table_pair());
  const auto first = *h.service->next_item();
  auto r = h.service->submit_validation(first.item_id, first.prediction->label, first.prediction->reasoning);
  EXPECT_EQ(r.pool_size_after, 1u);
  EXPECT_EQ(r.source, ExampleSource::llm_accepted);
  EXPECT_EQ(h.service->stats().correction_rate, 0.0);

  const auto second = *h.service->next_item();
  EXPECT_EQ(second.finding.requirement.id, "92");
  EXPECT_EQ(second.shots_used.size(), 1u);
  r = h.service->submit_validation(second.item_id, Label::defect, "The output is not specified.");
  EXPECT_EQ(r.pool_size_after, 2u);
  EXPECT_EQ(r.source, ExampleSource::user_corrected);

  const auto stats = h.service->stats();
  EXPECT_EQ(stats.validated, 2u);
  EXPECT_EQ(stats.pending, 0u);
  EXPECT_DOUBLE_EQ(stats.correction_rate, 0.5);
  EXPECT_EQ(stats.pool.defect, 2u);
  EXPECT_FALSE(h.service->next_item().has_value());

  const auto validated = h.service->get_item(second.item_id);
  EXPECT_EQ(validated.status, ItemStatus::validated);
  ASSERT_TRUE(validated.validation.has_value());
  EXPECT_TRUE(validated.validation->corrected.label);
  EXPECT_TRUE(validated.validation->corrected.reasoning);
  EXPECT_EQ(validated.validation->example_id, "review-" + second.item_id);
  EXPECT_EQ(format_timestamp(validated.validation->validated_at), "2024-06-01T08:00:00Z");
  EXPECT_EQ(validated.prediction->label, Label::not_defect);

  const auto records = h.service->pool_records();
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1]->source, ExampleSource::user_corrected);
  EXPECT_EQ(records[1]->label, Label::defect);
  EXPECT_EQ(h.service->pool_records(1).size(), 1u);
  EXPECT_EQ(h.service->pool_records(1)[0]->example_id, records[1]->example_id);
}

TEST(ReviewService, ReasoningOnlyEditCountsAsCorrection) {
  Harness h;
  h.service->ingest_requirements(table_pair());
  const auto item = *h.service->next_item();
  const auto r = h.service->submit_validation(item.item_id, item.prediction->label, "Edited explanation.");
  EXPECT_EQ(r.source, ExampleSource::user_corrected);
}

TEST(ReviewService, SubmitErrors) {
  Harness h;
  h.service->ingest_requirements(table_pair());
  const auto item = *h.service->next_item();
  EXPECT_EQ(code_of([&] { h.service->submit_validation("item-999999", Label::defect, "x"); }), ErrorCode::UnknownItem);
  EXPECT_EQ(code_of([&] { h.service->submit_validation(item.item_id, Label::defect, "  "); }), ErrorCode::EmptyReasoning);
  h.service->submit_validation(item.item_id, Label::defect, "ok.");
  EXPECT_EQ(code_of([&] { h.service->submit_validation(item.item_id, Label::defect, "again."); }),
            ErrorCode::AlreadyValidated);
  EXPECT_EQ(code_of([&] { (void)h.service->get_item("nope"); }), ErrorCode::UnknownItem);
  EXPECT_EQ(h.pool->size(), 1u);
}

TEST(ReviewService, FreshStatsAreZero) {
  Harness h;
  const auto s = h.service->stats();
  EXPECT_EQ(s.pending, 0u);
  EXPECT_EQ(s.validated, 0u);
  EXPECT_EQ(s.pool.total, 0u);
  EXPECT_EQ(s.correction_rate, 0.0);
}

TEST(ReviewService, PredictionsFollowThePool) {
  Harness h;
  h.service->ingest_requirements({{"255", hlc::testing::kText255}, {"92", hlc::testing::kText92},
                                  {"7", "Use appropriate and certain parts."}});
  for (int i = 0; i < 2; ++i) {
    const auto item = *h.service->next_item();
    h.service->submit_validation(item.item_id, item.prediction->label, item.prediction->reasoning);
  }
  const auto third = *h.service->next_item();
  EXPECT_EQ(third.shots_used.size(), 2u);
  EXPECT_EQ(h.service->stats().pool.total, h.service->stats().validated);
}

TEST(ReviewService, StatePersistsAcrossRestarts) {
  TempDir dir;
  std::string validated_id;
  {
    Harness h(dir / "state.json", dir / "pool.jsonl");
    h.service->ingest_requirements(table_pair());
    const auto item = *h.service->next_item();
    validated_id = item.item_id;
    h.service->submit_validation(item.item_id, Label::defect, "Crash levels are not defined.");
  }
  Harness h(dir / "state.json", dir / "pool.jsonl");
  EXPECT_EQ(h.pool->size(), 1u);
  const auto s = h.service->stats();
  EXPECT_EQ(s.validated, 1u);
  EXPECT_EQ(s.pending, 1u);
  const auto item = h.service->get_item(validated_id);
  EXPECT_EQ(item.validation->final_reasoning, "Crash levels are not defined.");
  EXPECT_EQ(code_of([&] { h.service->ingest_requirements({{"255", "certain"}}); }), ErrorCode::DuplicateRequirementId);
  const auto more = h.service->ingest_requirements({{"7", "Use appropriate and certain parts."}});
  ASSERT_EQ(more.size(), 2u);
  EXPECT_EQ(more[0].item_id, "item-000003");
}

TEST(ReviewService, JsonShape) {
  Harness h;
  h.service->ingest_requirements(table_pair());
  const auto j = to_json(*h.service->next_item());
  EXPECT_EQ(j["status"], "pending");
  EXPECT_EQ(j["requirement"]["id"], "255");
  EXPECT_EQ(j["finding"]["weak_word"], "certain");
  EXPECT_EQ(j["prediction"]["label"], "defect");
  EXPECT_TRUE(j["error"].is_null());
  EXPECT_TRUE(j["shots_used"].is_array());
}

TEST(ReviewService, BackendFailureLeavesItemPending) {
  auto pool = std::make_shared<ShotPool>(kDim);
  ReviewService service(WeakWordCatalog::from_entries({"certain"}), pool,
                        Predictor(PredictorConfig{}, std::make_shared<LocalHashEmbedder>(kDim),
                                  std::make_shared<ScriptedBackend>(std::map<std::string, std::string>{})));
  service.ingest_requirements({{"1", "certain thing"}});
  const auto item = *service.next_item();
  ASSERT_TRUE(item.error.has_value());
  EXPECT_EQ(item.error->code, ErrorCode::ScriptMiss);
  EXPECT_THROW(service.submit_validation(item.item_id, Label::defect, "x"), Error);
  EXPECT_EQ(service.stats().pending, 1u);
  EXPECT_EQ(pool->size(), 0u);
}
