#include "hlc/patterns.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "hlc/error.hpp"
#include "hlc/text.hpp"

namespace hlc {

std::vector<Span> tokenize(std::u32string_view text) {
  std::vector<Span> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_token_char(text[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && is_token_char(text[i])) ++i;
    tokens.push_back({start, i});
  }
  return tokens;
}

WeakWordCatalog WeakWordCatalog::from_entries(const std::vector<std::string>& entries,
                                              std::optional<std::filesystem::path> source) {
  WeakWordCatalog catalog;
  catalog.source_ = std::move(source);
  std::unordered_set<std::string> seen;
  for (const auto& raw : entries) {
    std::string entry = normalize_text(raw);
    if (entry.empty()) {
      throw Error(ErrorCode::ConfigError, "catalog entry is empty");
    }
    if (!seen.insert(entry).second) {
      throw Error(ErrorCode::DuplicateEntry, "duplicate catalog entry '" + entry + "'");
    }
    const auto cps = to_code_points(entry);
    const auto tokens = tokenize(cps);
    if (tokens.empty()) {
      throw Error(ErrorCode::ConfigError, "catalog entry '" + entry + "' has no word characters");
    }
    const std::string first = to_utf8(std::u32string_view(cps).substr(
        tokens.front().start, tokens.front().length()));
    catalog.by_first_token_[normalize_text(first)].push_back(
        {catalog.entries_.size(), tokens.size()});
    catalog.entries_.push_back(std::move(entry));
  }
  if (catalog.entries_.empty()) {
    throw Error(ErrorCode::EmptyCatalog, "weak word catalog has no entries");
  }
  return catalog;
}

std::optional<std::size_t> WeakWordCatalog::index_of(std::string_view entry) const {
  const auto it = std::find(entries_.begin(), entries_.end(), entry);
  if (it == entries_.end()) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - entries_.begin());
}

const std::vector<WeakWordCatalog::Pattern>* WeakWordCatalog::patterns_starting_with(
    const std::string& first_token) const {
  const auto it = by_first_token_.find(first_token);
  return it == by_first_token_.end() ? nullptr : &it->second;
}

WeakWordCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open catalog " + path.string());
  }
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') {
      continue;
    }
    entries.push_back(t);
  }
  if (in.bad()) {
    throw Error(ErrorCode::IoError, "error reading catalog " + path.string());
  }
  return WeakWordCatalog::from_entries(entries, path);
}

std::vector<WeakWordOccurrence> detect(std::string_view text, const WeakWordCatalog& catalog) {
  const std::u32string cps = to_code_points(text);
  const std::u32string_view view(cps);
  const auto tokens = tokenize(view);

  struct Candidate {
    std::size_t token_count;
    std::size_t catalog_index;
    Span span;
  };
  std::vector<Candidate> candidates;

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string first = normalize_text(to_utf8(view.substr(tokens[i].start, tokens[i].length())));
    const auto* patterns = catalog.patterns_starting_with(first);
    if (patterns == nullptr) {
      continue;
    }
    for (const auto& p : *patterns) {
      if (i + p.token_count > tokens.size()) {
        continue;
      }
      const Span span{tokens[i].start, tokens[i + p.token_count - 1].end};
      const std::string surface = to_utf8(view.substr(span.start, span.length()));
      if (normalize_text(surface) == catalog.entries()[p.index]) {
        candidates.push_back({p.token_count, p.index, span});
      }
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.token_count != b.token_count) return a.token_count > b.token_count;
    if (a.catalog_index != b.catalog_index) return a.catalog_index < b.catalog_index;
    return a.span.start < b.span.start;
  });

  std::vector<Candidate> accepted;
  for (const auto& c : candidates) {
    const bool clashes = std::any_of(accepted.begin(), accepted.end(),
                                     [&](const Candidate& a) { return a.span.overlaps(c.span); });
    if (!clashes) {
      accepted.push_back(c);
    }
  }
  std::sort(accepted.begin(), accepted.end(),
            [](const Candidate& a, const Candidate& b) { return a.span.start < b.span.start; });

  std::vector<WeakWordOccurrence> out;
  out.reserve(accepted.size());
  for (const auto& c : accepted) {
    out.push_back({to_utf8(view.substr(c.span.start, c.span.length())),
                   catalog.entries()[c.catalog_index], c.span});
  }
  return out;
}

std::vector<Finding> extract_findings(const Requirement& requirement, const WeakWordCatalog& catalog) {
  requirement.validate();
  std::vector<Finding> findings;
  for (auto& occurrence : detect(requirement.text, catalog)) {
    findings.push_back({requirement, std::move(occurrence)});
  }
  return findings;
}

std::optional<WeakWordOccurrence> find_weak_word(std::string_view text, std::string_view weak_word) {
  const auto catalog = WeakWordCatalog::from_entries({std::string(weak_word)});
  auto occurrences = detect(text, catalog);
  if (occurrences.empty()) {
    return std::nullopt;
  }
  return occurrences.front();
}

}  // namespace hlc
