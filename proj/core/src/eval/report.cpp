#include "hlc/eval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "hlc/error.hpp"

namespace hlc::eval {
namespace {

std::vector<RunResult> sorted_rows(std::vector<RunResult> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const RunResult& a, const RunResult& b) {
    if (a.config.pool_size != b.config.pool_size) return a.config.pool_size < b.config.pool_size;
    return a.config.cot && !b.config.cot;
  });
  return rows;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json row_json(const RunResult& r) {
  return Json{{"pool_size", r.config.pool_size},
              {"approach", r.approach},
              {"cot", r.config.cot},
              {"k", r.config.k},
              {"precision", r.metrics.precision},
              {"recall", r.metrics.recall},
              {"f1", r.metrics.f1},
              {"ci95",
               {{"p_lo", r.ci95.p_lo},
                {"p_hi", r.ci95.p_hi},
                {"r_lo", r.ci95.r_lo},
                {"r_hi", r.ci95.r_hi},
                {"f1_lo", r.ci95.f1_lo},
                {"f1_hi", r.ci95.f1_hi}}},
              {"n", r.n_predictions},
              {"parse_failures", r.parse_failures},
              {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}}},
              {"seed", r.config.seed},
              {"bootstrap_iterations", r.config.bootstrap_iterations}};
}

}  // namespace

std::string render_report(const std::vector<RunResult>& results, ReportFormat format) {
  const auto rows = sorted_rows(results);
  if (format == ReportFormat::json) {
    Json arr = Json::array();
    for (const auto& r : rows) arr.push_back(row_json(r));
    return Json{{"results", std::move(arr)}}.dump(2) + "\n";
  }
  std::string out = "pool_size,approach,cot,k,precision,recall,f1,p_lo,p_hi,r_lo,r_hi,f1_lo,f1_hi,n,parse_failures\n";
  for (const auto& r : rows) {
    out += r.config.pool_size == 0 ? std::string("--") : std::to_string(r.config.pool_size);
    out += "," + csv_cell(r.approach);
    out += r.config.cot ? ",Yes" : ",No";
    out += "," + std::to_string(r.config.k);
    for (double v : {r.metrics.precision, r.metrics.recall, r.metrics.f1, r.ci95.p_lo, r.ci95.p_hi, r.ci95.r_lo,
                     r.ci95.r_hi, r.ci95.f1_lo, r.ci95.f1_hi}) {
      out += "," + fixed3(v);
    }
    out += "," + std::to_string(r.n_predictions);
    out += "," + std::to_string(r.parse_failures);
    out += "\n";
  }
  return out;
}

void emit_report(const std::vector<RunResult>& results, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open report file " + path.string());
  }
  out << render_report(results, format);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write report file " + path.string());
  }
}

std::vector<RunResult> results_from_json(const Json& j) {
  std::vector<RunResult> out;
  try {
    for (const auto& row : j.at("results")) {
      RunResult r;
      r.config.pool_size = row.at("pool_size").get<std::size_t>();
      r.config.cot = row.at("cot").get<bool>();
      r.config.k = row.at("k").get<std::size_t>();
      r.config.seed = row.at("seed").get<std::uint64_t>();
      r.config.bootstrap_iterations = row.at("bootstrap_iterations").get<std::size_t>();
      r.approach = row.at("approach").get<std::string>();
      r.metrics.precision = row.at("precision").get<double>();
      r.metrics.recall = row.at("recall").get<double>();
      r.metrics.f1 = row.at("f1").get<double>();
      const auto& ci = row.at("ci95");
      r.ci95 = {ci.at("p_lo").get<double>(),  ci.at("p_hi").get<double>(),  ci.at("r_lo").get<double>(),
                ci.at("r_hi").get<double>(),  ci.at("f1_lo").get<double>(), ci.at("f1_hi").get<double>()};
      r.n_predictions = row.at("n").get<std::size_t>();
      r.parse_failures = row.at("parse_failures").get<std::size_t>();
      const auto& c = row.at("counts");
      r.counts = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("fn").get<std::size_t>(),
                  c.at("tn").get<std::size_t>()};
      out.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed report: ") + e.what());
  }
  return out;
}

}  // namespace hlc::eval
