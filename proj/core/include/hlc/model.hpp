#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>

namespace hlc {

/// Binary verdict for one weak-word occurrence. `defect` is the positive
/// class for metrics and sorts first.
enum class Label { defect = 0, not_defect = 1 };

/// Wire form: "defect" / "not_defect".
std::string_view to_string(Label label);

/// Human-facing form used in prompts: "defect" / "not defect".
std::string_view display_name(Label label);

/// Case-insensitive and whitespace-trimmed. Accepts "defect", "not defect",
/// "not_defect" and "no defect"; anything else throws UnknownLabel.
Label parse_label(std::string_view token);

constexpr Label flipped(Label label) {
  return label == Label::defect ? Label::not_defect : Label::defect;
}

struct Requirement {
  std::string id;
  std::string text;

  /// Throws InvalidRequirement on an empty id or blank text.
  void validate() const;

  friend bool operator==(const Requirement&, const Requirement&) = default;
};

/// Code point offsets into the requirement text, end-exclusive.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  [[nodiscard]] std::size_t length() const { return end - start; }
  [[nodiscard]] bool overlaps(const Span& other) const {
    return start < other.end && other.start < end;
  }

  friend auto operator<=>(const Span&, const Span&) = default;
};

struct WeakWordOccurrence {
  std::string surface;
  std::string catalog_entry;
  Span span;

  friend bool operator==(const WeakWordOccurrence&, const WeakWordOccurrence&) = default;
};

struct Finding {
  Requirement requirement;
  WeakWordOccurrence occurrence;

  /// Checks the span against the requirement text and the surface/entry
  /// relationship. Throws InvalidRequirement.
  void validate() const;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct Prediction {
  Label label = Label::not_defect;
  std::string reasoning;
  std::string raw_output;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

}  // namespace hlc
