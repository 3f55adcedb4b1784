#include "hlc/review_service.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "hlc/text.hpp"

namespace hlc {
namespace {

Json prediction_json(const Prediction& p) {
  return Json{{"label", to_string(p.label)}, {"reasoning", p.reasoning}, {"raw_output", p.raw_output}};
}

Prediction prediction_from_json(const Json& j) {
  return Prediction{parse_label(j.at("label").get<std::string>()), j.at("reasoning").get<std::string>(),
                    j.at("raw_output").get<std::string>()};
}

Json validation_json(const ValidationDecision& v) {
  return Json{{"final_label", to_string(v.final_label)},
              {"final_reasoning", v.final_reasoning},
              {"corrected", {{"label", v.corrected.label}, {"reasoning", v.corrected.reasoning}}},
              {"prediction", prediction_json(v.shown)},
              {"example_id", v.example_id},
              {"validated_at", format_timestamp(v.validated_at)}};
}

ValidationDecision validation_from_json(const std::string& item_id, const Json& j) {
  ValidationDecision v;
  v.item_id = item_id;
  v.final_label = parse_label(j.at("final_label").get<std::string>());
  v.final_reasoning = j.at("final_reasoning").get<std::string>();
  v.corrected.label = j.at("corrected").at("label").get<bool>();
  v.corrected.reasoning = j.at("corrected").at("reasoning").get<bool>();
  v.shown = prediction_from_json(j.at("prediction"));
  v.example_id = j.at("example_id").get<std::string>();
  v.validated_at = parse_timestamp(j.at("validated_at").get<std::string>());
  return v;
}

}  // namespace

std::string_view to_string(ItemStatus status) {
  return status == ItemStatus::pending ? "pending" : "validated";
}

Json to_json(const RetrievedShot& shot) {
  const auto& e = *shot.example;
  return Json{{"example_id", e.example_id}, {"requirement_id", e.requirement_id}, {"text", e.text},
              {"weak_word", e.weak_word},   {"reasoning", e.reasoning},           {"label", to_string(e.label)},
              {"source", to_string(e.source)}, {"similarity", shot.similarity}};
}

Json to_json(const ReviewItem& item) {
  const auto& f = item.finding;
  Json j{{"item_id", item.item_id},
         {"status", to_string(item.status)},
         {"requirement", {{"id", f.requirement.id}, {"text", f.requirement.text}}},
         {"finding",
          {{"weak_word", f.occurrence.catalog_entry},
           {"surface", f.occurrence.surface},
           {"start", f.occurrence.span.start},
           {"end", f.occurrence.span.end}}},
         {"prediction", item.prediction ? prediction_json(*item.prediction) : Json(nullptr)}};
  Json shots = Json::array();
  for (const auto& s : item.shots_used) {
    shots.push_back(to_json(s));
  }
  j["shots_used"] = std::move(shots);
  j["error"] = item.error ? Json{{"code", to_string(item.error->code)}, {"message", item.error->message}} : Json(nullptr);
  if (item.validation) {
    const auto& v = *item.validation;
    j["final_label"] = to_string(v.final_label);
    j["final_reasoning"] = v.final_reasoning;
    j["corrected"] = {{"label", v.corrected.label}, {"reasoning", v.corrected.reasoning}};
  }
  return j;
}

Json to_json(const ServiceStats& stats) {
  return Json{{"pending", stats.pending},
              {"validated", stats.validated},
              {"pool", to_json(stats.pool)},
              {"correction_rate", stats.correction_rate}};
}

ReviewService::ReviewService(WeakWordCatalog catalog, std::shared_ptr<ShotPool> pool, Predictor predictor,
                             ReviewServiceOptions options)
    : catalog_(std::move(catalog)), pool_(std::move(pool)), predictor_(std::move(predictor)), options_(std::move(options)) {
  if (!pool_) {
    throw Error(ErrorCode::ConfigError, "review service needs a shot pool");
  }
  if (!options_.clock) {
    options_.clock = now_utc;
  }
  load_state();
}

std::vector<ReviewItem> ReviewService::ingest_requirements(const std::vector<Requirement>& batch) {
  std::unique_lock lock(state_mutex_);
  std::set<std::string> batch_ids;
  for (const auto& r : batch) {
    r.validate();
    if (requirement_index_.count(r.id) != 0 || !batch_ids.insert(r.id).second) {
      throw Error(ErrorCode::DuplicateRequirementId, "requirement id '" + r.id + "' already ingested");
    }
  }

  std::vector<ReviewItem> created;
  for (const auto& r : batch) {
    requirement_index_[r.id] = requirements_.size();
    requirements_.push_back(r);
    for (auto& finding : extract_findings(r, catalog_)) {
      char id[32];
      std::snprintf(id, sizeof id, "item-%06zu", next_seq_++);
      StoredItem item{id, std::move(finding), ItemStatus::pending, std::nullopt};
      item_index_[item.item_id] = items_.size();
      created.push_back(ReviewItem{item.item_id, item.finding, ItemStatus::pending, std::nullopt, {}, std::nullopt, std::nullopt});
      items_.push_back(std::move(item));
    }
  }
  save_state();
  return created;
}

PredictionResult ReviewService::predict_current(const StoredItem& item, const PoolSnapshot& snapshot) const {
  {
    std::lock_guard lock(memo_mutex_);
    const auto it = memo_.find(item.item_id);
    if (it != memo_.end() && it->second.pool_size == snapshot.size()) {
      return it->second.result;
    }
  }
  auto result = predictor_.predict(item.finding, snapshot);
  std::lock_guard lock(memo_mutex_);
  memo_[item.item_id] = Memo{snapshot.size(), result};
  return result;
}

ReviewItem ReviewService::serve(const StoredItem& item) const {
  ReviewItem out{item.item_id, item.finding, item.status, std::nullopt, {}, std::nullopt, item.validation};
  if (item.status == ItemStatus::validated) {
    out.prediction = item.validation->shown;
    return out;
  }
  try {
    auto result = predict_current(item, pool_->snapshot());
    out.prediction = std::move(result.prediction);
    out.shots_used = std::move(result.shots_used);
  } catch (const Error& e) {
    out.error = ErrorInfo::from(e);
  }
  return out;
}

std::optional<ReviewItem> ReviewService::next_item() const {
  std::optional<StoredItem> head;
  {
    std::shared_lock lock(state_mutex_);
    for (const auto& item : items_) {
      if (item.status == ItemStatus::pending) {
        head = item;
        break;
      }
    }
  }
  if (!head) {
    return std::nullopt;
  }
  return serve(*head);
}

ReviewItem ReviewService::get_item(const std::string& item_id) const {
  StoredItem item;
  {
    std::shared_lock lock(state_mutex_);
    const auto it = item_index_.find(item_id);
    if (it == item_index_.end()) {
      throw Error(ErrorCode::UnknownItem, "no item '" + item_id + "'");
    }
    item = items_[it->second];
  }
  return serve(item);
}

SubmitResult ReviewService::submit_validation(const std::string& item_id, Label final_label,
                                              const std::string& final_reasoning) {
  std::unique_lock lock(state_mutex_);
  const auto it = item_index_.find(item_id);
  if (it == item_index_.end()) {
    throw Error(ErrorCode::UnknownItem, "no item '" + item_id + "'");
  }
  StoredItem& item = items_[it->second];
  if (item.status == ItemStatus::validated) {
    throw Error(ErrorCode::AlreadyValidated, "item '" + item_id + "' is already validated");
  }
  const std::string reasoning = trim(final_reasoning);
  if (reasoning.empty()) {
    throw Error(ErrorCode::EmptyReasoning, "final reasoning must not be empty");
  }

  // Validations are serialized by the state lock, so the pool cannot grow
  // between this snapshot and the append below.
  const auto shown = predict_current(item, pool_->snapshot()).prediction;

  ValidationDecision decision;
  decision.item_id = item_id;
  decision.final_label = final_label;
  decision.final_reasoning = reasoning;
  decision.corrected.label = final_label != shown.label;
  decision.corrected.reasoning = reasoning != shown.reasoning;
  decision.shown = shown;
  decision.example_id = "review-" + item_id;
  decision.validated_at = options_.clock();

  ValidatedExample example;
  example.example_id = decision.example_id;
  example.requirement_id = item.finding.requirement.id;
  example.text = item.finding.requirement.text;
  example.weak_word = item.finding.occurrence.catalog_entry;
  example.reasoning = reasoning;
  example.label = final_label;
  example.embedding = embed_text(example.text, predictor_.provider());
  example.source = decision.corrected.any() ? ExampleSource::user_corrected : ExampleSource::llm_accepted;
  example.validated_at = decision.validated_at;

  SubmitResult result;
  result.source = example.source;
  result.pool_size_after = pool_->append(std::move(example));

  item.status = ItemStatus::validated;
  item.validation = std::move(decision);
  save_state();
  {
    std::lock_guard memo_lock(memo_mutex_);
    memo_.erase(item_id);
  }
  return result;
}

ServiceStats ReviewService::stats() const {
  ServiceStats s;
  std::size_t corrected = 0;
  {
    std::shared_lock lock(state_mutex_);
    for (const auto& item : items_) {
      if (item.status == ItemStatus::pending) {
        ++s.pending;
      } else {
        ++s.validated;
        corrected += item.validation->corrected.any() ? 1 : 0;
      }
    }
  }
  s.pool = pool_->stats();
  s.correction_rate = s.validated == 0 ? 0.0 : static_cast<double>(corrected) / static_cast<double>(s.validated);
  return s;
}

std::vector<std::shared_ptr<const ValidatedExample>> ReviewService::pool_records(std::optional<std::size_t> limit) const {
  auto records = pool_->snapshot().records();
  if (limit && *limit < records.size()) {
    records.erase(records.begin(), records.end() - static_cast<std::ptrdiff_t>(*limit));
  }
  return records;
}

void ReviewService::save_state() const {
  if (!options_.state_path) {
    return;
  }
  Json reqs = Json::array();
  for (const auto& r : requirements_) {
    reqs.push_back({{"id", r.id}, {"text", r.text}});
  }
  Json items = Json::array();
  for (const auto& item : items_) {
    const auto& o = item.finding.occurrence;
    Json j{{"item_id", item.item_id},
           {"requirement_id", item.finding.requirement.id},
           {"weak_word", o.catalog_entry},
           {"surface", o.surface},
           {"start", o.span.start},
           {"end", o.span.end},
           {"status", to_string(item.status)},
           {"validation", item.validation ? validation_json(*item.validation) : Json(nullptr)}};
    items.push_back(std::move(j));
  }
  const Json doc{{"next_seq", next_seq_}, {"requirements", std::move(reqs)}, {"items", std::move(items)}};

  const auto& path = *options_.state_path;
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) {
      throw Error(ErrorCode::IoError, "cannot write state file " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::IoError, "cannot replace state file " + path.string() + ": " + ec.message());
  }
}

void ReviewService::load_state() {
  if (!options_.state_path || !std::filesystem::exists(*options_.state_path)) {
    return;
  }
  std::ifstream in(*options_.state_path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open state file " + options_.state_path->string());
  }
  try {
    const Json doc = Json::parse(in);
    next_seq_ = doc.at("next_seq").get<std::size_t>();
    for (const auto& r : doc.at("requirements")) {
      Requirement req{r.at("id").get<std::string>(), r.at("text").get<std::string>()};
      req.validate();
      requirement_index_[req.id] = requirements_.size();
      requirements_.push_back(std::move(req));
    }
    for (const auto& j : doc.at("items")) {
      StoredItem item;
      item.item_id = j.at("item_id").get<std::string>();
      const auto rid = j.at("requirement_id").get<std::string>();
      const auto rit = requirement_index_.find(rid);
      if (rit == requirement_index_.end()) {
        throw Error(ErrorCode::ConfigError, "item " + item.item_id + " refers to unknown requirement " + rid);
      }
      item.finding.requirement = requirements_[rit->second];
      item.finding.occurrence = {j.at("surface").get<std::string>(), j.at("weak_word").get<std::string>(),
                                 Span{j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()}};
      item.finding.validate();
      item.status = j.at("status").get<std::string>() == "validated" ? ItemStatus::validated : ItemStatus::pending;
      if (item.status == ItemStatus::validated) {
        item.validation = validation_from_json(item.item_id, j.at("validation"));
      }
      item_index_[item.item_id] = items_.size();
      items_.push_back(std::move(item));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::CorruptRecord, "corrupt state file " + options_.state_path->string() + ": " + e.what());
  }
}

}  // namespace hlc
