#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hlc/eval/simulation.hpp"
#include "hlc/json.hpp"

namespace hlc::eval {

enum class ReportFormat { csv, json };

/// Columns: pool_size, approach, cot, k, precision, recall, f1, p_lo, p_hi,
/// r_lo, r_hi, f1_lo, f1_hi, n, parse_failures. Rows sorted by pool size,
/// CoT rows first. CSV rounds to three decimals and prints the zero-shot
/// pool as "--"; JSON keeps full precision plus the confusion counts.
std::string render_report(const std::vector<RunResult>& results, ReportFormat format);

/// Throws IoError.
void emit_report(const std::vector<RunResult>& results, ReportFormat format, const std::filesystem::path& path);

/// Reads the JSON report back (for re-rendering or comparison).
std::vector<RunResult> results_from_json(const Json& j);

}  // namespace hlc::eval
