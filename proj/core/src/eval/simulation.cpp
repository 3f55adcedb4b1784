#include "hlc/eval/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "hlc/predictor.hpp"
#include "hlc/prompt.hpp"
#include "hlc/text.hpp"

namespace hlc::eval {
namespace {

RunResult score(const RunConfig& config, const std::string& approach, std::optional<std::size_t> fold,
                std::vector<const InstancePrediction*> rows) {
  std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return a->id < b->id; });
  std::vector<LabeledPair> pairs;
  pairs.reserve(rows.size());
  RunResult r;
  r.config = config;
  r.approach = approach;
  r.fold = fold;
  for (const auto* row : rows) {
    pairs.push_back({row->gold, row->predicted});
    r.parse_failures += row->error ? 1 : 0;
  }
  r.n_predictions = pairs.size();
  r.counts = count_outcomes(pairs);
  r.metrics = compute_metrics(r.counts);
  if (!pairs.empty()) {
    const std::uint64_t seed = fold ? config.seed + 1 + *fold : config.seed;
    r.ci95 = bootstrap_ci(pairs, config.bootstrap_iterations, seed);
  }
  return r;
}

}  // namespace

void RunConfig::validate() const {
  if ((pool_size == 0) != (k == 0)) {
    throw Error(ErrorCode::ConfigError, "pool_size 0 and k 0 go together (zero-shot row)");
  }
  if (k % 2 != 0) {
    throw Error(ErrorCode::ConfigError, "k must be even");
  }
  if (bootstrap_iterations == 0) {
    throw Error(ErrorCode::ConfigError, "bootstrap_iterations must be positive");
  }
}

std::vector<ReasoningOutcome> generate_pool_reasoning(std::span<const DatasetRecord> records, CompletionBackend& backend,
                                                      const EmbeddingProvider& provider, std::size_t jobs) {
  std::vector<ReasoningOutcome> out(records.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      const auto& record = records[i];
      try {
        const auto finding = finding_for(record);
        const auto prompt = build_reasoning_prompt(finding, record.label);
        const auto raw = backend.complete({prompt.system_text, prompt.user_text});
        const auto parsed = parse_output(raw, true);
        if (parsed.label != record.label) {
          throw Error(ErrorCode::InconsistentReasoning,
                      "generated explanation for " + record.id + " argues for the wrong label");
        }
        ValidatedExample e;
        e.example_id = "sim-" + record.id;
        e.requirement_id = record.id;
        e.text = record.text;
        e.weak_word = finding.occurrence.catalog_entry;
        e.reasoning = parsed.reasoning;
        e.label = record.label;
        e.embedding = embed_text(record.text, provider);
        e.source = ExampleSource::simulated;
        e.validated_at = Timestamp{};
        out[i].example = std::move(e);
      } catch (const Error& e) {
        out[i].error = ErrorInfo::from(e);
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(records.size(), 1));
  std::vector<std::jthread> workers;
  for (std::size_t t = 1; t < threads; ++t) workers.emplace_back(worker);
  worker();
  return out;
}

OracleConfig oracle_for(const std::vector<DatasetRecord>& dataset, std::set<FindingKey> flip) {
  OracleConfig config;
  for (const auto& r : dataset) {
    config.gold[FindingKey{r.id, normalize_text(r.weak_word)}] = r.label;
  }
  config.flip = std::move(flip);
  return config;
}

Simulator::Simulator(std::vector<DatasetRecord> dataset, SamplingPlan plan,
                     std::shared_ptr<const EmbeddingProvider> provider, std::shared_ptr<CompletionBackend> backend,
                     std::size_t jobs)
    : dataset_(std::move(dataset)),
      plan_(std::move(plan)),
      provider_(std::move(provider)),
      backend_(std::move(backend)),
      jobs_(std::max<std::size_t>(jobs, 1)) {
  if (!provider_ || !backend_) {
    throw Error(ErrorCode::ConfigError, "simulator needs an embedding provider and a backend");
  }
  for (std::size_t i = 0; i < dataset_.size(); ++i) {
    if (!by_id_.emplace(dataset_[i].id, i).second) {
      throw Error(ErrorCode::ConfigError, "duplicate dataset id " + dataset_[i].id);
    }
  }
  for (const auto& fold : plan_.folds) {
    for (const auto& id : fold) {
      if (by_id_.count(id) == 0) {
        throw Error(ErrorCode::ConfigError, "plan refers to unknown record " + id);
      }
    }
  }
}

std::shared_ptr<const ValidatedExample> Simulator::pool_example(const DatasetRecord& record, bool cot) {
  const auto it = examples_.find(std::make_pair(record.id, cot));
  return it == examples_.end() ? nullptr : it->second;
}

SimulationOutcome Simulator::run(const RunConfig& config) {
  config.validate();
  const std::string approach = backend_->name();
  SimulationOutcome outcome;

  PredictorConfig pc;
  pc.k = config.k;
  pc.cot = config.cot;
  pc.jobs = jobs_;
  const Predictor predictor(pc, provider_, backend_);

  for (std::size_t f = 0; f < kFoldCount; ++f) {
    ShotPool pool(provider_->dim());
    if (config.pool_size > 0) {
      const auto it = plan_.nested_pools[f].find(config.pool_size);
      if (it == plan_.nested_pools[f].end()) {
        throw Error(ErrorCode::ConfigError, "plan has no pool of size " + std::to_string(config.pool_size));
      }
      // Materialize missing examples in one batch so generation runs in parallel.
      std::vector<DatasetRecord> missing;
      for (const auto& id : it->second) {
        const auto& record = dataset_[by_id_.at(id)];
        const auto key = std::make_pair(id, config.cot);
        if (examples_.count(key) == 0 && failed_examples_.count(key) == 0) missing.push_back(record);
      }
      if (config.cot) {
        auto generated = generate_pool_reasoning(missing, *backend_, *provider_, jobs_);
        for (std::size_t i = 0; i < missing.size(); ++i) {
          const auto key = std::make_pair(missing[i].id, true);
          if (generated[i].example) {
            examples_[key] = std::make_shared<const ValidatedExample>(std::move(*generated[i].example));
          } else {
            failed_examples_[key] = *generated[i].error;
          }
        }
      } else {
        for (const auto& record : missing) {
          const auto key = std::make_pair(record.id, false);
          try {
            const auto finding = finding_for(record);
            ValidatedExample e;
            e.example_id = "sim-" + record.id;
            e.requirement_id = record.id;
            e.text = record.text;
            e.weak_word = finding.occurrence.catalog_entry;
            e.reasoning = std::string(kLabelOnlyReasoning);
            e.label = record.label;
            e.embedding = embed_text(record.text, *provider_);
            e.source = ExampleSource::simulated;
            examples_[key] = std::make_shared<const ValidatedExample>(std::move(e));
          } catch (const Error& e) {
            failed_examples_[key] = ErrorInfo::from(e);
          }
        }
      }
      for (const auto& id : it->second) {
        if (auto example = pool_example(dataset_[by_id_.at(id)], config.cot)) {
          pool.append(*example);
        }
      }
    }

    const auto& eval_ids = plan_.folds[plan_.assignment[f]];
    std::vector<Finding> findings;
    std::vector<std::size_t> finding_row;
    std::vector<InstancePrediction> rows;
    rows.reserve(eval_ids.size());
    for (const auto& id : eval_ids) {
      const auto& record = dataset_[by_id_.at(id)];
      InstancePrediction row{id, f, record.label, Label::not_defect, std::nullopt};
      try {
        findings.push_back(finding_for(record));
        finding_row.push_back(rows.size());
      } catch (const Error& e) {
        row.error = ErrorInfo::from(e);
      }
      rows.push_back(std::move(row));
    }

    const auto results = predictor.predict_batch(findings, pool.snapshot());
    for (std::size_t i = 0; i < results.size(); ++i) {
      auto& row = rows[finding_row[i]];
      if (results[i].ok()) {
        row.predicted = results[i].result->prediction.label;
      } else {
        row.error = results[i].error;
      }
    }
    outcome.predictions.insert(outcome.predictions.end(), std::make_move_iterator(rows.begin()),
                               std::make_move_iterator(rows.end()));
  }

  std::sort(outcome.predictions.begin(), outcome.predictions.end(),
            [](const InstancePrediction& a, const InstancePrediction& b) { return a.id < b.id; });

  std::vector<const InstancePrediction*> all;
  std::array<std::vector<const InstancePrediction*>, kFoldCount> per_fold;
  for (const auto& p : outcome.predictions) {
    all.push_back(&p);
    per_fold[p.fold].push_back(&p);
  }
  for (std::size_t f = 0; f < kFoldCount; ++f) {
    outcome.per_fold.push_back(score(config, approach, f, per_fold[f]));
  }
  outcome.aggregate = score(config, approach, std::nullopt, all);
  return outcome;
}

}  // namespace hlc::eval
