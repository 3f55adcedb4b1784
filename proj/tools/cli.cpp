#include "cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <set>
#include <sstream>

#include "hlc/backend.hpp"
#include "hlc/embedding.hpp"
#include "hlc/error.hpp"
#include "hlc/eval/dataset.hpp"
#include "hlc/eval/report.hpp"
#include "hlc/eval/sampling.hpp"
#include "hlc/eval/simulation.hpp"
#include "hlc/json.hpp"
#include "hlc/patterns.hpp"
#include "hlc/predictor.hpp"
#include "hlc/review_service.hpp"
#include "hlc/shot_pool.hpp"
#include "hlc/text.hpp"

namespace hlc::cli {
namespace {

/// Reads --config files written as JSON. Nested objects address
/// subcommands, e.g. {"k": 12, "simulate": {"plan-seed": 7}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    const auto j = Json::parse(input, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw CLI::ConversionError("config file must hold a JSON object");
    }
    return items_from(j, "", {});
  }

 private:
  static std::vector<CLI::ConfigItem> items_from(const Json& j, const std::string& name,
                                                 const std::vector<std::string>& prefix) {
    std::vector<CLI::ConfigItem> results;
    if (j.is_object()) {
      for (const auto& [key, value] : j.items()) {
        auto parents = prefix;
        if (!name.empty()) parents.push_back(name);
        auto sub = items_from(value, key, parents);
        results.insert(results.end(), sub.begin(), sub.end());
      }
      return results;
    }
    CLI::ConfigItem item;
    item.name = name;
    item.parents = prefix;
    if (j.is_boolean()) {
      item.inputs = {j.get<bool>() ? "true" : "false"};
    } else if (j.is_number()) {
      item.inputs = {j.dump()};
    } else if (j.is_string()) {
      item.inputs = {j.get<std::string>()};
    } else if (j.is_array()) {
      for (const auto& v : j) item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    } else {
      throw CLI::ConversionError("unsupported config value for " + name);
    }
    results.push_back(std::move(item));
    return results;
  }
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::string catalog;
  std::string pool;
  std::size_t dim = 256;
  std::uint64_t seed = 0;
  std::size_t jobs = 4;
  int verbose = 0;

  std::string backend = "oracle";
  std::string gold;
  std::string flip;
  std::string script;
  std::string endpoint;
  std::string model;
  std::string api_key_env = "HLC_LLM_API_KEY";
  double temperature = 0.0;

  std::string embed_provider = "local";
  std::string embed_endpoint;
  std::string embed_model;
  std::string embed_api_key_env = "HLC_EMBEDDING_API_KEY";

  std::size_t k = 12;
  bool cot = true;

  // subcommand specific
  std::string dataset;
  std::string out;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string state;
  std::uint64_t plan_seed = 0;
  std::string configs;
  std::string out_csv;
  std::string out_json;
  std::string plan_out;
  std::size_t iterations = eval::kBootstrapIterations;
  std::vector<std::size_t> pool_sizes = eval::kDefaultPoolSizes;
};

class Logger {
 public:
  Logger(std::ostream& err, int verbosity) : err_(err), verbosity_(verbosity) {}
  void warn(const std::string& msg) const { err_ << "warning: " << msg << '\n'; }
  void info(const std::string& msg) const {
    if (verbosity_ > 0) err_ << msg << '\n';
  }

 private:
  std::ostream& err_;
  int verbosity_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

WeakWordCatalog catalog_from(const Settings& s) {
  require(!s.catalog.empty(), "--catalog is required");
  return load_catalog(s.catalog);
}

EmbeddingProviderConfig provider_config(const Settings& s) {
  EmbeddingProviderConfig c;
  c.dim = s.dim;
  if (s.embed_provider == "remote") {
    c.kind = ProviderKind::remote;
    c.endpoint_url = s.embed_endpoint;
    c.model_name = s.embed_model;
    c.api_key_env = s.embed_api_key_env;
  } else {
    require(s.embed_provider == "local", "--embed-provider must be local or remote");
  }
  return c;
}

std::set<FindingKey> read_flip_file(const std::string& path) {
  std::set<FindingKey> keys;
  if (path.empty()) return keys;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open flip file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string::npos) throw CorruptRecordError(line_no, "expected <requirement_id>\\t<weak_word>");
    keys.insert({t.substr(0, tab), normalize_text(t.substr(tab + 1))});
  }
  return keys;
}

std::map<std::string, std::string> read_script_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open script file " + path);
  std::map<std::string, std::string> script;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = Json::parse(line);
      const FindingKey key{j.at("requirement_id").get<std::string>(),
                           normalize_text(j.at("weak_word").get<std::string>())};
      script[key.str()] = j.at("output").get<std::string>();
    } catch (const Json::exception& e) {
      throw CorruptRecordError(line_no, e.what());
    }
  }
  return script;
}

/// Gold labels for the oracle come from labeled records in `gold_source`.
BackendConfig backend_config(const Settings& s, const std::vector<eval::InputRecord>* gold_source) {
  BackendConfig c;
  c.kind = parse_backend_kind(s.backend);
  switch (c.kind) {
    case BackendKind::oracle: {
      std::vector<eval::InputRecord> gold_records;
      if (!s.gold.empty()) {
        gold_records = eval::read_records(s.gold);
        gold_source = &gold_records;
      }
      require(gold_source != nullptr, "the oracle backend needs --gold <labeled dataset>");
      for (const auto& r : *gold_source) {
        if (r.weak_word && r.label) c.oracle.gold[{r.id, normalize_text(*r.weak_word)}] = *r.label;
      }
      c.oracle.flip = read_flip_file(s.flip);
      break;
    }
    case BackendKind::scripted:
      require(!s.script.empty(), "the scripted backend needs --script <file>");
      c.script = read_script_file(s.script);
      break;
    case BackendKind::remote_chat:
      c.remote.endpoint_url = s.endpoint;
      c.remote.model_name = s.model;
      c.remote.api_key_env = s.api_key_env;
      c.remote.temperature = s.temperature;
      c.remote.max_in_flight = s.jobs;
      break;
  }
  return c;
}

PredictorConfig predictor_config(const Settings& s) {
  PredictorConfig c;
  c.k = s.k;
  c.cot = s.cot;
  c.jobs = s.jobs;
  return c;
}

std::vector<Finding> findings_for(const std::vector<eval::InputRecord>& records, const Settings& s) {
  std::optional<WeakWordCatalog> catalog;
  if (!s.catalog.empty()) catalog = load_catalog(s.catalog);
  std::vector<Finding> findings;
  for (const auto& r : records) {
    if (r.weak_word) {
      findings.push_back(eval::finding_for({r.id, r.text, *r.weak_word, r.label.value_or(Label::not_defect)}));
      continue;
    }
    require(catalog.has_value(), "record " + r.id + " has no weak_word; pass --catalog to detect them");
    auto extracted = extract_findings({r.id, r.text}, *catalog);
    findings.insert(findings.end(), extracted.begin(), extracted.end());
  }
  return findings;
}

Json finding_json(const Finding& f) {
  return Json{{"requirement_id", f.requirement.id},
              {"weak_word", f.occurrence.catalog_entry},
              {"surface", f.occurrence.surface},
              {"start", f.occurrence.span.start},
              {"end", f.occurrence.span.end}};
}

int cmd_detect(const Settings& s, std::ostream& out) {
  const auto catalog = catalog_from(s);
  for (const auto& r : eval::read_records(s.dataset)) {
    for (const auto& f : extract_findings({r.id, r.text}, catalog)) {
      out << finding_json(f).dump() << '\n';
    }
  }
  return kExitOk;
}

int cmd_predict(const Settings& s, std::ostream& out, const Logger& log) {
  const auto records = eval::read_records(s.dataset);
  const auto findings = findings_for(records, s);

  std::unique_ptr<ShotPool> pool;
  if (s.pool.empty()) {
    pool = std::make_unique<ShotPool>(s.dim);
  } else {
    pool = load_pool(s.pool, s.dim);
  }
  if (pool->size() == 0 && s.k > 0) {
    log.warn(s.pool.empty() ? "no --pool given; predicting zero-shot"
                            : "pool " + s.pool + " is absent or empty; predicting zero-shot");
  }

  const auto predictor = make_predictor(predictor_config(s), provider_config(s), backend_config(s, &records));
  const auto outcomes = predictor.predict_batch(findings, pool->snapshot());
  std::size_t failures = 0;
  for (std::size_t i = 0; i < findings.size(); ++i) {
    Json j = finding_json(findings[i]);
    const auto& o = outcomes[i];
    if (o.ok()) {
      const auto& r = *o.result;
      j["label"] = to_string(r.prediction.label);
      j["reasoning"] = r.prediction.reasoning;
      j["k_used"] = r.prompt.k_used;
      Json shots = Json::array();
      for (const auto& shot : r.shots_used) {
        shots.push_back({{"example_id", shot.example->example_id}, {"similarity", shot.similarity}});
      }
      j["shots"] = std::move(shots);
      j["error"] = nullptr;
    } else {
      ++failures;
      j["label"] = nullptr;
      j["error"] = {{"code", to_string(o.error->code)}, {"message", o.error->message}};
    }
    out << j.dump() << '\n';
  }
  log.info(std::to_string(findings.size()) + " findings, " + std::to_string(failures) + " failed");
  return kExitOk;
}

std::atomic<ReviewServer*> g_server{nullptr};

extern "C" void stop_server(int) {
  if (auto* server = g_server.load()) server->stop();
}

int cmd_serve(const Settings& s, const Logger& log, std::ostream& err) {
  require(!s.pool.empty(), "serve needs --pool <file>");
  auto catalog = catalog_from(s);
  std::shared_ptr<ShotPool> pool = load_pool(s.pool, s.dim);
  auto predictor = make_predictor(predictor_config(s), provider_config(s), backend_config(s, nullptr));

  ReviewServiceOptions options;
  if (!s.state.empty()) options.state_path = s.state;
  ReviewService service(std::move(catalog), pool, std::move(predictor), options);
  ReviewServer server(service);
  server.bind(s.host, s.port);
  err << "review service listening on http://" << s.host << ':' << s.port << std::endl;
  log.info("pool " + s.pool + " holds " + std::to_string(pool->size()) + " examples");

  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  server.listen();
  g_server = nullptr;
  return kExitOk;
}

std::vector<eval::RunConfig> read_run_configs(const Settings& s) {
  std::ifstream in(s.configs);
  if (!in) throw Error(ErrorCode::IoError, "cannot open configs file " + s.configs);
  const auto j = Json::parse(in, nullptr, false);
  const Json* list = &j;
  if (j.is_object() && j.contains("configs")) list = &j["configs"];
  if (j.is_discarded() || !list->is_array()) {
    throw Error(ErrorCode::ConfigError, "configs file must hold a JSON array of run configurations");
  }
  std::vector<eval::RunConfig> configs;
  for (const auto& c : *list) {
    eval::RunConfig rc;
    try {
      rc.pool_size = c.at("pool_size").get<std::size_t>();
      rc.cot = c.value("cot", true);
      rc.k = c.value("k", rc.pool_size == 0 ? std::size_t{0} : std::size_t{12});
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ConfigError, std::string("bad run configuration: ") + e.what());
    }
    rc.seed = s.seed;
    rc.bootstrap_iterations = s.iterations;
    rc.validate();
    configs.push_back(rc);
  }
  return configs;
}

std::pair<std::vector<eval::DatasetRecord>, eval::SamplingPlan> prepared_plan(const Settings& s, std::uint64_t plan_seed) {
  std::optional<WeakWordCatalog> catalog;
  if (!s.catalog.empty()) catalog = load_catalog(s.catalog);
  auto dataset = eval::prepare_dataset(eval::load_dataset(s.dataset), s.seed, catalog ? &*catalog : nullptr);
  auto plan = eval::build_sampling_plan(dataset, plan_seed, s.pool_sizes);
  return {std::move(dataset), std::move(plan)};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
}

int cmd_simulate(const Settings& s, std::ostream& out, const Logger& log) {
  const auto configs = read_run_configs(s);
  auto [dataset, plan] = prepared_plan(s, s.plan_seed);
  log.info("prepared " + std::to_string(dataset.size()) + " balanced records");
  if (!s.plan_out.empty()) write_text(s.plan_out, to_json(plan).dump(2) + "\n");

  std::vector<eval::InputRecord> gold;
  for (const auto& r : dataset) gold.push_back({r.id, r.text, r.weak_word, r.label});
  auto backend = make_backend(backend_config(s, &gold));
  auto provider = make_embedding_provider(provider_config(s));

  eval::Simulator simulator(dataset, std::move(plan), provider, backend, s.jobs);
  std::vector<eval::RunResult> results;
  for (const auto& config : configs) {
    log.info("running pool " + std::to_string(config.pool_size) + (config.cot ? " CoT" : " no-CoT") + " k " +
             std::to_string(config.k));
    results.push_back(simulator.run(config).aggregate);
  }

  if (!s.out_csv.empty()) eval::emit_report(results, eval::ReportFormat::csv, s.out_csv);
  if (!s.out_json.empty()) eval::emit_report(results, eval::ReportFormat::json, s.out_json);
  if (s.out_csv.empty() && s.out_json.empty()) out << eval::render_report(results, eval::ReportFormat::csv);
  return kExitOk;
}

int cmd_plan(const Settings& s, std::ostream& out) {
  const auto [dataset, plan] = prepared_plan(s, s.seed);
  const std::string text = to_json(plan).dump(2) + "\n";
  if (s.out.empty()) {
    out << text;
  } else {
    write_text(s.out, text);
  }
  return kExitOk;
}

int cmd_pool_stats(const Settings& s, std::ostream& out) {
  require(!s.pool.empty(), "pool stats needs --pool <file>");
  out << to_json(load_pool(s.pool, s.dim)->stats()).dump() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Weak-word defect prediction with validated few-shot examples", "hlc"};
  app.fallthrough();
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file supplying any flag; command-line flags take precedence");

  app.add_option("--catalog", s.catalog, "Weak word catalog (one entry per line)");
  app.add_option("--pool", s.pool, "Shot pool file (JSON Lines)");
  app.add_option("--dim", s.dim, "Embedding dimension")->check(CLI::PositiveNumber);
  app.add_option("--seed", s.seed, "Seed for undersampling, plans and bootstrap");
  app.add_option("--jobs", s.jobs, "Concurrent predictions")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", s.verbose, "Log progress to stderr");

  app.add_option("--backend", s.backend, "oracle, scripted or remote_chat")
      ->check(CLI::IsMember({"oracle", "scripted", "remote_chat", "remote"}));
  app.add_option("--gold", s.gold, "Labeled dataset the oracle answers from");
  app.add_option("--flip", s.flip, "Oracle flip set: lines of <requirement_id>TAB<weak_word>");
  app.add_option("--script", s.script, "Scripted outputs: JSONL {requirement_id, weak_word, output}");
  app.add_option("--endpoint", s.endpoint, "Chat completion endpoint URL");
  app.add_option("--model", s.model, "Chat model name");
  app.add_option("--api-key-env", s.api_key_env, "Environment variable holding the chat API key");
  app.add_option("--temperature", s.temperature, "Sampling temperature for remote chat");

  app.add_option("--embed-provider", s.embed_provider, "local or remote")->check(CLI::IsMember({"local", "remote"}));
  app.add_option("--embed-endpoint", s.embed_endpoint, "Embedding endpoint URL");
  app.add_option("--embed-model", s.embed_model, "Embedding model name");
  app.add_option("--embed-api-key-env", s.embed_api_key_env, "Environment variable holding the embedding API key");

  app.add_option("-k,--k", s.k, "Shots per prediction (even)");
  app.add_flag("--cot,!--no-cot", s.cot, "Ask for a reasoning sentence before the label");

  auto* detect = app.add_subcommand("detect", "Print weak word findings as JSON Lines");
  detect->add_option("dataset", s.dataset, "Requirements file (JSONL or CSV)")->required();

  auto* predict = app.add_subcommand("predict", "Predict defectiveness for each finding");
  predict->add_option("dataset", s.dataset, "Requirements file (JSONL or CSV)")->required();

  auto* serve = app.add_subcommand("serve", "Run the review service");
  serve->add_option("--host", s.host, "Bind address");
  serve->add_option("--port", s.port, "Port")->check(CLI::Range(1, 65535));
  serve->add_option("--state", s.state, "Review state file");

  auto* simulate = app.add_subcommand("simulate", "Simulate the feedback loop and write reports");
  simulate->add_option("dataset", s.dataset, "Labeled dataset (JSONL or CSV)")->required();
  simulate->add_option("--plan-seed", s.plan_seed, "Seed for the sampling plan")->required();
  simulate->add_option("--configs", s.configs, "JSON array of {pool_size, cot, k}")->required();
  simulate->add_option("--out-csv", s.out_csv, "CSV report path");
  simulate->add_option("--out-json", s.out_json, "JSON report path");
  simulate->add_option("--plan-out", s.plan_out, "Write the sampling plan here");
  simulate->add_option("--iterations", s.iterations, "Bootstrap iterations")->check(CLI::PositiveNumber);
  simulate->add_option("--pool-sizes", s.pool_sizes, "Nested pool sizes per fold");

  auto* plan = app.add_subcommand("plan", "Write the sampling plan for a dataset");
  plan->add_option("dataset", s.dataset, "Labeled dataset (JSONL or CSV)")->required();
  plan->add_option("--out", s.out, "Output path (stdout when omitted)");
  plan->add_option("--pool-sizes", s.pool_sizes, "Nested pool sizes per fold");

  auto* pool = app.add_subcommand("pool", "Pool utilities");
  pool->require_subcommand(1);
  auto* pool_stats = pool->add_subcommand("stats", "Print pool statistics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const Logger log(err, s.verbose);
  try {
    if (*detect) return cmd_detect(s, out);
    if (*predict) return cmd_predict(s, out, log);
    if (*serve) return cmd_serve(s, log, err);
    if (*simulate) return cmd_simulate(s, out, log);
    if (*plan) return cmd_plan(s, out);
    if (*pool_stats) return cmd_pool_stats(s, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace hlc::cli
