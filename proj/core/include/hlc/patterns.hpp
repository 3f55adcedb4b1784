#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hlc/model.hpp"

namespace hlc {

/// Ordered, normalized weak-word list. Order is significant: it breaks ties
/// between overlapping matches and between duplicate dataset instances.
class WeakWordCatalog {
 public:
  /// Normalizes every entry. Throws EmptyCatalog, DuplicateEntry, or
  /// ConfigError for an entry without any word characters.
  static WeakWordCatalog from_entries(const std::vector<std::string>& entries,
                                      std::optional<std::filesystem::path> source = std::nullopt);

  [[nodiscard]] const std::vector<std::string>& entries() const { return entries_; }
  [[nodiscard]] const std::optional<std::filesystem::path>& source_path() const { return source_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

  /// Position of a normalized entry, or nullopt.
  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view entry) const;

  struct Pattern {
    std::size_t index;
    std::size_t token_count;
  };
  /// Entries whose first token normalizes to `first_token`.
  [[nodiscard]] const std::vector<Pattern>* patterns_starting_with(const std::string& first_token) const;

 private:
  std::vector<std::string> entries_;
  std::optional<std::filesystem::path> source_;
  std::unordered_map<std::string, std::vector<Pattern>> by_first_token_;
};

/// One entry per non-blank line; lines starting with '#' are comments.
WeakWordCatalog load_catalog(const std::filesystem::path& path);

/// Whole-token, case-insensitive matches sorted by start offset. Overlaps
/// are resolved longest match first (in tokens), then catalog order.
std::vector<WeakWordOccurrence> detect(std::string_view text, const WeakWordCatalog& catalog);

std::vector<Finding> extract_findings(const Requirement& requirement, const WeakWordCatalog& catalog);

/// First occurrence of a single catalog entry in `text`, if any.
std::optional<WeakWordOccurrence> find_weak_word(std::string_view text, std::string_view weak_word);

/// Code point ranges of the maximal token-character runs in `text`.
std::vector<Span> tokenize(std::u32string_view text);

}  // namespace hlc
