#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hlc/model.hpp"
#include "hlc/shot_pool.hpp"

namespace hlc {

inline constexpr std::string_view kShotDelimiter = "### Example";
inline constexpr std::string_view kReasoningPrefix = "Reasoning:";
inline constexpr std::string_view kLabelPrefix = "Label:";
inline constexpr std::string_view kFindingKeyPrefix = "Finding-Key:";
inline constexpr std::string_view kGoldLabelPrefix = "Gold-Label:";
inline constexpr std::string_view kMarkOpen = "«";
inline constexpr std::string_view kMarkClose = "»";

/// Identifies a finding for deterministic backends: (requirement id,
/// catalog entry).
struct FindingKey {
  std::string requirement_id;
  std::string weak_word;

  /// "<requirement_id>\t<weak_word>", the form used in script and flip files.
  [[nodiscard]] std::string str() const { return requirement_id + "\t" + weak_word; }
  static FindingKey of(const Finding& finding) {
    return {finding.requirement.id, finding.occurrence.catalog_entry};
  }

  friend auto operator<=>(const FindingKey&, const FindingKey&) = default;
};

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  std::vector<std::string> shot_blocks;
  bool cot = true;
  std::size_t k_used = 0;
};

/// Wraps the code point span of `text` in «…».
std::string mark_span(std::string_view text, const Span& span);

/// Shot template: delimiter, the input (requirement with the weak word
/// marked, weak word), then the output (reasoning iff cot, label).
std::string render_shot(const ValidatedExample& example, bool cot);

/// The answer format the model is asked to produce.
std::string render_answer(std::string_view reasoning, Label label, bool cot);

/// Shots must already be ordered by ascending similarity.
PromptBundle build_prompt(const Finding& finding, std::span<const RetrievedShot> shots, bool cot);

/// Prompt asking for one explanation sentence consistent with a known label.
PromptBundle build_reasoning_prompt(const Finding& finding, Label gold);

/// Appended to the user text when a remote answer could not be parsed.
std::string_view format_reminder(bool cot);

/// Tolerates surrounding whitespace, markdown fences and bold markers. The
/// label comes from the last "Label:" occurrence. Throws MissingLabel,
/// UnknownLabel or (cot only) MissingReasoning.
Prediction parse_output(std::string_view raw, bool cot);

/// Reads the Finding-Key line from a user prompt.
std::optional<FindingKey> extract_finding_key(std::string_view user_text);

/// Reads the Gold-Label line of a reasoning-generation prompt.
std::optional<Label> extract_gold_label(std::string_view user_text);

}  // namespace hlc
