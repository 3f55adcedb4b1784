#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hlc/model.hpp"
#include "hlc/patterns.hpp"

namespace hlc::eval {

/// One labeled (requirement, weak word) instance.
struct DatasetRecord {
  std::string id;
  std::string text;
  std::string weak_word;
  Label label = Label::not_defect;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

/// A requirement row as read from disk; weak_word and label are optional so
/// the same files serve detection, prediction and evaluation.
struct InputRecord {
  std::string id;
  std::string text;
  std::optional<std::string> weak_word;
  std::optional<Label> label;
};

/// JSONL (one object per line) or CSV with a header row, chosen by the
/// ".csv" extension. Fields: id, text, weak_word, label. Throws IoError or
/// CorruptRecordError with the 1-based line number.
std::vector<InputRecord> read_records(const std::filesystem::path& path);

/// read_records plus the requirement that weak_word and label are present.
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);

void write_dataset_jsonl(std::ostream& out, const std::vector<DatasetRecord>& records);

/// Splits one CSV record (RFC 4180 quoting). Exposed for tests.
std::vector<std::string> split_csv_line(std::string_view line);

/// The finding a record refers to: the first occurrence of its weak word.
/// Throws InvalidRequirement when the weak word is not detectable.
Finding finding_for(const DatasetRecord& record);

/// Keeps one instance per requirement id, preferring a defect instance
/// (ties: catalog order, then lexicographic weak word; words missing from
/// the catalog rank last), then undersamples the majority class with a
/// seeded shuffle. Output is sorted by id.
std::vector<DatasetRecord> prepare_dataset(const std::vector<DatasetRecord>& records, std::uint64_t seed,
                                           const WeakWordCatalog* catalog = nullptr);

}  // namespace hlc::eval
