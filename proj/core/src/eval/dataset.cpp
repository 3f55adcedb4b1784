#include "hlc/eval/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>

#include "hlc/error.hpp"
#include "hlc/eval/rng.hpp"
#include "hlc/json.hpp"
#include "hlc/text.hpp"

namespace hlc::eval {
namespace {

InputRecord record_from_fields(const std::map<std::string, std::string>& fields) {
  InputRecord r;
  const auto id = fields.find("id");
  const auto text = fields.find("text");
  if (id == fields.end() || text == fields.end()) {
    throw Error(ErrorCode::ConfigError, "record needs id and text");
  }
  r.id = id->second;
  r.text = text->second;
  Requirement{r.id, r.text}.validate();
  if (const auto w = fields.find("weak_word"); w != fields.end() && !w->second.empty()) {
    r.weak_word = w->second;
  }
  if (const auto l = fields.find("label"); l != fields.end() && !l->second.empty()) {
    r.label = parse_label(l->second);
  }
  return r;
}

std::vector<InputRecord> read_jsonl(std::istream& in) {
  std::vector<InputRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = Json::parse(line);
      if (!j.is_object()) throw Error(ErrorCode::ConfigError, "not a JSON object");
      std::map<std::string, std::string> fields;
      for (const auto& [key, value] : j.items()) {
        if (value.is_string()) {
          fields[key] = value.get<std::string>();
        } else if (value.is_number_integer() && key == "id") {
          fields[key] = std::to_string(value.get<long long>());
        } else if (!value.is_null()) {
          throw Error(ErrorCode::ConfigError, "field '" + key + "' must be a string");
        }
      }
      out.push_back(record_from_fields(fields));
    } catch (const Json::exception& e) {
      throw CorruptRecordError(line_no, e.what());
    } catch (const Error& e) {
      throw CorruptRecordError(line_no, e.what());
    }
  }
  return out;
}

/// Reads one logical CSV record, which may span physical lines inside quotes.
bool read_csv_record(std::istream& in, std::string& record, std::size_t& line_no) {
  record.clear();
  std::string line;
  bool in_quotes = false;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (any) record += '\n';
    record += line;
    any = true;
    for (char c : line) {
      if (c == '"') in_quotes = !in_quotes;
    }
    if (!in_quotes) return true;
  }
  return any;
}

std::vector<InputRecord> read_csv(std::istream& in) {
  std::vector<InputRecord> out;
  std::string record;
  std::size_t line_no = 0;
  if (!read_csv_record(in, record, line_no)) {
    return out;
  }
  const auto header = split_csv_line(record);
  while (true) {
    const std::size_t start_line = line_no + 1;
    if (!read_csv_record(in, record, line_no)) break;
    if (trim(record).empty()) continue;
    try {
      const auto cells = split_csv_line(record);
      if (cells.size() != header.size()) {
        throw Error(ErrorCode::ConfigError, "expected " + std::to_string(header.size()) + " fields, got " +
                                                std::to_string(cells.size()));
      }
      std::map<std::string, std::string> fields;
      for (std::size_t i = 0; i < header.size(); ++i) fields[trim(header[i])] = cells[i];
      out.push_back(record_from_fields(fields));
    } catch (const Error& e) {
      throw CorruptRecordError(start_line, e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::ConfigError, "unterminated quoted CSV field");
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::vector<InputRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  auto records = path.extension() == ".csv" ? read_csv(in) : read_jsonl(in);
  if (in.bad()) {
    throw Error(ErrorCode::IoError, "error reading " + path.string());
  }
  return records;
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
  std::vector<DatasetRecord> out;
  std::size_t index = 0;
  for (auto& r : read_records(path)) {
    ++index;
    if (!r.weak_word || !r.label) {
      throw Error(ErrorCode::CorruptRecord,
                  "dataset record " + std::to_string(index) + " (id " + r.id + ") lacks weak_word or label");
    }
    out.push_back({std::move(r.id), std::move(r.text), std::move(*r.weak_word), *r.label});
  }
  return out;
}

void write_dataset_jsonl(std::ostream& out, const std::vector<DatasetRecord>& records) {
  for (const auto& r : records) {
    out << Json{{"id", r.id}, {"text", r.text}, {"weak_word", r.weak_word}, {"label", to_string(r.label)}}.dump()
        << '\n';
  }
}

Finding finding_for(const DatasetRecord& record) {
  const Requirement requirement{record.id, record.text};
  requirement.validate();
  auto occurrence = find_weak_word(record.text, record.weak_word);
  if (!occurrence) {
    throw Error(ErrorCode::InvalidRequirement,
                "weak word '" + record.weak_word + "' not found in requirement " + record.id);
  }
  return Finding{requirement, std::move(*occurrence)};
}

std::vector<DatasetRecord> prepare_dataset(const std::vector<DatasetRecord>& records, std::uint64_t seed,
                                           const WeakWordCatalog* catalog) {
  const auto rank = [&](const DatasetRecord& r) {
    std::size_t order = std::numeric_limits<std::size_t>::max();
    if (catalog != nullptr) {
      if (const auto idx = catalog->index_of(normalize_text(r.weak_word))) order = *idx;
    }
    return std::pair<std::size_t, const std::string&>(order, r.weak_word);
  };
  const auto preferred = [&](const DatasetRecord& a, const DatasetRecord& b) {
    if (a.label != b.label) return a.label == Label::defect;
    return rank(a) < rank(b);
  };

  std::map<std::string, const DatasetRecord*> kept;
  for (const auto& r : records) {
    auto [it, inserted] = kept.try_emplace(r.id, &r);
    if (!inserted && preferred(r, *it->second)) {
      it->second = &r;
    }
  }

  std::vector<DatasetRecord> defects;
  std::vector<DatasetRecord> benign;
  for (const auto& [id, r] : kept) {
    (r->label == Label::defect ? defects : benign).push_back(*r);
  }

  auto& majority = benign.size() >= defects.size() ? benign : defects;
  const std::size_t target = std::min(benign.size(), defects.size());
  Rng rng(seed);
  rng.shuffle(majority);
  majority.resize(target);

  std::vector<DatasetRecord> out;
  out.reserve(defects.size() + benign.size());
  out.insert(out.end(), defects.begin(), defects.end());
  out.insert(out.end(), benign.begin(), benign.end());
  std::sort(out.begin(), out.end(), [](const DatasetRecord& a, const DatasetRecord& b) { return a.id < b.id; });
  return out;
}

}  // namespace hlc::eval
