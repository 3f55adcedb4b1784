#include "hlc/prompt.hpp"

#include <cctype>

#include "hlc/error.hpp"
#include "hlc/json.hpp"
#include "hlc/patterns.hpp"
#include "hlc/text.hpp"

namespace hlc {
namespace {

constexpr std::string_view kTaskIntro =
    "You review natural-language software requirements for the weak word smell.\n"
    "A weak word is a vague term such as \"certain\" or \"appropriate\". Its presence can leave a "
    "requirement open to more than one interpretation, but the surrounding requirement often makes "
    "the intended meaning clear.\n"
    "Task: you receive a requirement and one weak word contained in it, marked as «word». Decide "
    "whether this weak word makes the requirement ambiguous. Answer \"defect\" if it does and "
    "\"not defect\" if its meaning is clear in context.\n";

constexpr std::string_view kCotInstruction =
    "Before the prediction, produce exactly one reasoning sentence explaining how the weak word is "
    "used in this requirement. Then give the label.\n"
    "Answer in exactly this format:\n"
    "Reasoning: <one sentence>\n"
    "Label: <defect | not defect>\n";

constexpr std::string_view kLabelOnlyInstruction =
    "Answer in exactly this format:\n"
    "Label: <defect | not defect>\n";

constexpr std::string_view kKeyNote =
    "The Finding-Key line in the input is a reference identifier; ignore it when deciding.\n";

constexpr std::string_view kShotsIntro =
    "\nValidated examples from this project follow. Each shows an input and the expected output. "
    "They are ordered by similarity to the new requirement; the most similar one comes last.\n";

std::string finding_key_line(const FindingKey& key) {
  Json j{{"requirement_id", key.requirement_id}, {"weak_word", key.weak_word}};
  return std::string(kFindingKeyPrefix) + " " + j.dump() + "\n";
}

std::string render_input(std::string_view marked_text, std::string_view weak_word) {
  std::string out = "Input:\n";
  out += "Requirement: ";
  out += marked_text;
  out += "\nWeak word: ";
  out += weak_word;
  out += "\n";
  return out;
}

std::string marked_requirement(const ValidatedExample& example) {
  if (const auto occurrence = find_weak_word(example.text, example.weak_word)) {
    return mark_span(example.text, occurrence->span);
  }
  return example.text;
}

char ascii_lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool is_word_byte(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

struct PrefixHit {
  std::size_t word_start;  // first byte of the keyword, including leading markup
  std::size_t value_start; // first byte after the colon
};

/// Finds `keyword` (lowercase, without colon) followed by optional markup
/// and a colon. Case-insensitive, word-bounded on the left.
std::vector<PrefixHit> find_prefixes(std::string_view text, std::string_view keyword) {
  std::vector<PrefixHit> hits;
  std::string lower(text.size(), '\0');
  for (std::size_t i = 0; i < text.size(); ++i) lower[i] = ascii_lower(text[i]);

  std::size_t pos = 0;
  while ((pos = lower.find(keyword, pos)) != std::string::npos) {
    const std::size_t after = pos + keyword.size();
    if (pos > 0 && is_word_byte(lower[pos - 1])) {
      pos = after;
      continue;
    }
    std::size_t i = after;
    while (i < lower.size() && (lower[i] == ' ' || lower[i] == '*' || lower[i] == '_')) ++i;
    if (i < lower.size() && lower[i] == ':') {
      std::size_t start = pos;
      while (start > 0 && (text[start - 1] == '*' || text[start - 1] == '_')) --start;
      hits.push_back({start, i + 1});
    }
    pos = after;
  }
  return hits;
}

std::string strip_chars(std::string_view s, std::string_view chars) {
  std::string t = trim(s);
  std::size_t b = 0;
  std::size_t e = t.size();
  while (b < e && chars.find(t[b]) != std::string_view::npos) ++b;
  while (e > b && chars.find(t[e - 1]) != std::string_view::npos) --e;
  return trim(std::string_view(t).substr(b, e - b));
}

std::string remove_fence_lines(std::string_view raw) {
  std::string out;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const std::size_t nl = raw.find('\n', pos);
    const std::string_view line = raw.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (trim(line).rfind("```", 0) != 0) {
      out.append(line);
      if (nl != std::string_view::npos) out.push_back('\n');
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::optional<std::string> line_value(std::string_view text, std::string_view prefix) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (line.rfind(prefix, 0) == 0) {
      return trim(line.substr(prefix.size()));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return std::nullopt;
}

}  // namespace

std::string mark_span(std::string_view text, const Span& span) {
  const auto cps = to_code_points(text);
  if (span.start > span.end || span.end > cps.size()) {
    throw Error(ErrorCode::InvalidRequirement, "span out of range");
  }
  const std::u32string_view v(cps);
  std::string out = to_utf8(v.substr(0, span.start));
  out += kMarkOpen;
  out += to_utf8(v.substr(span.start, span.length()));
  out += kMarkClose;
  out += to_utf8(v.substr(span.end));
  return out;
}

std::string render_answer(std::string_view reasoning, Label label, bool cot) {
  std::string out;
  if (cot) {
    out += kReasoningPrefix;
    out += " ";
    out += reasoning;
    out += "\n";
  }
  out += kLabelPrefix;
  out += " ";
  out += display_name(label);
  out += "\n";
  return out;
}

std::string render_shot(const ValidatedExample& example, bool cot) {
  std::string out(kShotDelimiter);
  out += "\n";
  out += render_input(marked_requirement(example), example.weak_word);
  out += "Output:\n";
  out += render_answer(example.reasoning, example.label, cot);
  return out;
}

PromptBundle build_prompt(const Finding& finding, std::span<const RetrievedShot> shots, bool cot) {
  PromptBundle bundle;
  bundle.cot = cot;
  bundle.k_used = shots.size();

  std::string system(kTaskIntro);
  system += cot ? kCotInstruction : kLabelOnlyInstruction;
  system += kKeyNote;
  if (!shots.empty()) {
    system += kShotsIntro;
    for (const auto& shot : shots) {
      bundle.shot_blocks.push_back(render_shot(*shot.example, cot));
      system += "\n";
      system += bundle.shot_blocks.back();
    }
  }
  bundle.system_text = std::move(system);

  bundle.user_text = finding_key_line(FindingKey::of(finding));
  bundle.user_text += render_input(mark_span(finding.requirement.text, finding.occurrence.span),
                                   finding.occurrence.catalog_entry);
  return bundle;
}

PromptBundle build_reasoning_prompt(const Finding& finding, Label gold) {
  PromptBundle bundle;
  bundle.cot = true;
  std::string system(kTaskIntro);
  system +=
      "The correct label for this input is already known and given in the Gold-Label line. Write "
      "exactly one reasoning sentence that explains why the label is correct, referring to how the "
      "weak word is used in the requirement.\n"
      "Answer in exactly this format:\n"
      "Reasoning: <one sentence>\n"
      "Label: <the given label>\n";
  system += kKeyNote;
  bundle.system_text = std::move(system);

  bundle.user_text = finding_key_line(FindingKey::of(finding));
  bundle.user_text += render_input(mark_span(finding.requirement.text, finding.occurrence.span),
                                   finding.occurrence.catalog_entry);
  bundle.user_text += std::string(kGoldLabelPrefix) + " " + std::string(display_name(gold)) + "\n";
  return bundle;
}

std::string_view format_reminder(bool cot) {
  return cot ? "\nReminder: reply with exactly two lines, \"Reasoning: <one sentence>\" followed by "
               "\"Label: defect\" or \"Label: not defect\".\n"
             : "\nReminder: reply with exactly one line, \"Label: defect\" or \"Label: not defect\".\n";
}

Prediction parse_output(std::string_view raw, bool cot) {
  Prediction prediction;
  prediction.raw_output = std::string(raw);
  const std::string text = remove_fence_lines(raw);

  const auto label_hits = find_prefixes(text, "label");
  if (label_hits.empty()) {
    throw Error(ErrorCode::MissingLabel, "no 'Label:' line in model output");
  }
  const auto& label_hit = label_hits.back();
  const std::size_t eol = text.find('\n', label_hit.value_start);
  const std::string token = strip_chars(
      std::string_view(text).substr(label_hit.value_start,
                                    eol == std::string::npos ? std::string::npos : eol - label_hit.value_start),
      "*_`\"'.");
  prediction.label = parse_label(token);

  const auto reasoning_hits = find_prefixes(text, "reasoning");
  if (!reasoning_hits.empty() && reasoning_hits.front().value_start <= label_hit.word_start) {
    const auto& r = reasoning_hits.front();
    prediction.reasoning =
        strip_chars(std::string_view(text).substr(r.value_start, label_hit.word_start - r.value_start), "*_");
  }
  if (cot && prediction.reasoning.empty()) {
    throw Error(ErrorCode::MissingReasoning, "no reasoning sentence before the label");
  }
  return prediction;
}

std::optional<FindingKey> extract_finding_key(std::string_view user_text) {
  const auto value = line_value(user_text, kFindingKeyPrefix);
  if (!value) {
    return std::nullopt;
  }
  const auto j = Json::parse(*value, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("requirement_id") || !j.contains("weak_word") ||
      !j["requirement_id"].is_string() || !j["weak_word"].is_string()) {
    return std::nullopt;
  }
  return FindingKey{j["requirement_id"].get<std::string>(), j["weak_word"].get<std::string>()};
}

std::optional<Label> extract_gold_label(std::string_view user_text) {
  const auto value = line_value(user_text, kGoldLabelPrefix);
  if (!value) {
    return std::nullopt;
  }
  try {
    return parse_label(*value);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace hlc
