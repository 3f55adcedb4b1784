#include "hlc/shot_pool.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>

#include "hlc/error.hpp"
#include "hlc/patterns.hpp"
#include "hlc/text.hpp"

namespace hlc {

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0;
  int h = 0, mi = 0, sec = 0;
  char tail = 0;
  const std::string str(s);
  if (std::sscanf(str.c_str(), "%4d-%2u-%2uT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &sec, &tail) != 7 ||
      tail != 'Z' || str.size() != 20) {
    throw Error(ErrorCode::ConfigError, "malformed UTC timestamp '" + str + "'");
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59 || h < 0 || mi < 0 || sec < 0) {
    throw Error(ErrorCode::ConfigError, "out-of-range UTC timestamp '" + str + "'");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
}

Timestamp now_utc() {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

std::string_view to_string(ExampleSource source) {
  switch (source) {
    case ExampleSource::llm_accepted: return "llm_accepted";
    case ExampleSource::user_corrected: return "user_corrected";
    case ExampleSource::simulated: return "simulated";
  }
  return "simulated";
}

ExampleSource parse_example_source(std::string_view s) {
  if (s == "llm_accepted") return ExampleSource::llm_accepted;
  if (s == "user_corrected") return ExampleSource::user_corrected;
  if (s == "simulated") return ExampleSource::simulated;
  throw Error(ErrorCode::ConfigError, "unknown example source '" + std::string(s) + "'");
}

void ValidatedExample::validate() const {
  if (example_id.empty() || requirement_id.empty()) {
    throw Error(ErrorCode::InvalidRequirement, "validated example needs example_id and requirement_id");
  }
  if (trim(reasoning).empty()) {
    throw Error(ErrorCode::EmptyReasoning, "validated example " + example_id + " has empty reasoning");
  }
  if (!find_weak_word(text, weak_word)) {
    throw Error(ErrorCode::InvalidRequirement,
                "weak word '" + weak_word + "' does not occur in example " + example_id);
  }
}

Json to_json(const ValidatedExample& e) {
  Json embedding = Json::array();
  for (double v : e.embedding.values()) {
    embedding.push_back(v);
  }
  return Json{{"example_id", e.example_id},
              {"requirement_id", e.requirement_id},
              {"text", e.text},
              {"weak_word", e.weak_word},
              {"reasoning", e.reasoning},
              {"label", to_string(e.label)},
              {"embedding", std::move(embedding)},
              {"source", to_string(e.source)},
              {"validated_at", format_timestamp(e.validated_at)}};
}

ValidatedExample example_from_json(const Json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::ConfigError, "record is not a JSON object");
  }
  constexpr const char* kFields[] = {"example_id", "requirement_id", "text", "weak_word", "reasoning",
                                     "label", "embedding", "source", "validated_at"};
  for (const char* field : kFields) {
    if (!j.contains(field)) {
      throw Error(ErrorCode::ConfigError, std::string("missing field '") + field + "'");
    }
  }
  if (j.size() != std::size(kFields)) {
    throw Error(ErrorCode::ConfigError, "unexpected extra fields in record");
  }
  auto str = [&](const char* field) {
    const auto& v = j.at(field);
    if (!v.is_string()) {
      throw Error(ErrorCode::ConfigError, std::string("field '") + field + "' must be a string");
    }
    return v.get<std::string>();
  };
  ValidatedExample e;
  e.example_id = str("example_id");
  e.requirement_id = str("requirement_id");
  e.text = str("text");
  e.weak_word = str("weak_word");
  e.reasoning = str("reasoning");
  const std::string label = str("label");
  if (label != "defect" && label != "not_defect") {
    throw Error(ErrorCode::UnknownLabel, "label must be \"defect\" or \"not_defect\"");
  }
  e.label = parse_label(label);
  const auto& emb = j.at("embedding");
  if (!emb.is_array()) {
    throw Error(ErrorCode::ConfigError, "field 'embedding' must be an array");
  }
  std::vector<double> values;
  values.reserve(emb.size());
  for (const auto& v : emb) {
    if (!v.is_number()) {
      throw Error(ErrorCode::ConfigError, "embedding contains a non-number");
    }
    values.push_back(v.get<double>());
  }
  e.embedding = EmbeddingVector(std::move(values));
  e.source = parse_example_source(str("source"));
  e.validated_at = parse_timestamp(str("validated_at"));
  return e;
}

Json to_json(const PoolStats& stats) {
  return Json{{"total", stats.total},
              {"per_label", {{"defect", stats.defect}, {"not_defect", stats.not_defect}}},
              {"dim", stats.dim}};
}

PoolStats PoolSnapshot::stats() const {
  PoolStats s;
  s.dim = dim_;
  s.total = records_.size();
  for (const auto& r : records_) {
    (r->label == Label::defect ? s.defect : s.not_defect) += 1;
  }
  return s;
}

std::vector<RetrievedShot> retrieve_balanced(const PoolSnapshot& pool, const EmbeddingVector& target,
                                             std::size_t k,
                                             std::optional<std::string_view> exclude_requirement_id) {
  if (k % 2 != 0) {
    throw Error(ErrorCode::ConfigError, "k must be even, got " + std::to_string(k));
  }
  if (target.dim() != pool.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "target dim " + std::to_string(target.dim()) +
                                                  " does not match pool dim " + std::to_string(pool.dim()));
  }
  if (k == 0) {
    return {};
  }

  std::vector<RetrievedShot> by_label[2];
  for (const auto& record : pool.records()) {
    if (exclude_requirement_id && record->requirement_id == *exclude_requirement_id) {
      continue;
    }
    by_label[static_cast<int>(record->label)].push_back(
        {record, cosine_similarity(target, record->embedding)});
  }

  const auto more_similar = [](const RetrievedShot& a, const RetrievedShot& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.example->example_id < b.example->example_id;
  };

  std::vector<RetrievedShot> out;
  const std::size_t per_label = k / 2;
  for (auto& candidates : by_label) {
    const std::size_t take = std::min(per_label, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), more_similar);
    out.insert(out.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(out.begin(), out.end(), [](const RetrievedShot& a, const RetrievedShot& b) {
    if (a.similarity != b.similarity) return a.similarity < b.similarity;
    return a.example->example_id < b.example->example_id;
  });
  return out;
}

ShotPool::ShotPool(std::size_t dim, std::optional<std::filesystem::path> path)
    : dim_(dim), path_(std::move(path)) {
  if (dim_ == 0) {
    throw Error(ErrorCode::ConfigError, "pool dim must be positive");
  }
}

namespace {

void append_line(const std::filesystem::path& path, const std::string& line) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::IoError, "cannot open pool file " + path.string() + ": " + std::strerror(errno));
  }
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw Error(ErrorCode::IoError, "cannot write pool file " + path.string() + ": " + std::strerror(err));
    }
    written += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) {
    throw Error(ErrorCode::IoError, "cannot sync pool file " + path.string());
  }
}

}  // namespace

std::size_t ShotPool::append(ValidatedExample example) {
  example.validate();
  if (example.embedding.dim() != dim_) {
    throw Error(ErrorCode::DimensionMismatch, "example " + example.example_id + " has dim " +
                                                  std::to_string(example.embedding.dim()) + ", pool dim is " +
                                                  std::to_string(dim_));
  }
  std::unique_lock lock(mutex_);
  if (ids_.count(example.example_id) != 0) {
    throw Error(ErrorCode::DuplicateExampleId, "example id '" + example.example_id + "' already in pool");
  }
  if (path_) {
    append_line(*path_, to_json(example).dump() + "\n");
  }
  ids_.insert(example.example_id);
  records_.push_back(std::make_shared<const ValidatedExample>(std::move(example)));
  return records_.size();
}

void ShotPool::insert_loaded(ValidatedExample example) {
  ids_.insert(example.example_id);
  records_.push_back(std::make_shared<const ValidatedExample>(std::move(example)));
}

PoolSnapshot ShotPool::snapshot() const {
  std::shared_lock lock(mutex_);
  return PoolSnapshot(dim_, records_);
}

PoolStats ShotPool::stats() const { return snapshot().stats(); }

std::size_t ShotPool::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

bool ShotPool::contains(const std::string& example_id) const {
  std::shared_lock lock(mutex_);
  return ids_.count(example_id) != 0;
}

std::unique_ptr<ShotPool> load_pool(const std::filesystem::path& path, std::size_t dim) {
  auto pool = std::make_unique<ShotPool>(dim, path);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) {
    return pool;
  }
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open pool file " + path.string());
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    ValidatedExample example;
    try {
      example = example_from_json(Json::parse(line));
      example.validate();
    } catch (const Json::exception& e) {
      throw CorruptRecordError(line_no, e.what());
    } catch (const Error& e) {
      throw CorruptRecordError(line_no, e.what());
    }
    if (example.embedding.dim() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "pool record at line " + std::to_string(line_no) +
                                                    " has dim " + std::to_string(example.embedding.dim()) +
                                                    ", expected " + std::to_string(dim));
    }
    if (pool->ids_.count(example.example_id) != 0) {
      throw CorruptRecordError(line_no, "duplicate example_id '" + example.example_id + "'");
    }
    pool->insert_loaded(std::move(example));
  }
  if (in.bad()) {
    throw Error(ErrorCode::IoError, "error reading pool file " + path.string());
  }
  return pool;
}

}  // namespace hlc
