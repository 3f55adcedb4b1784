#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hlc/embedding.hpp"
#include "hlc/error.hpp"
#include "hlc/eval/dataset.hpp"
#include "hlc/eval/rng.hpp"
#include "hlc/shot_pool.hpp"

namespace hlc::testing {

inline constexpr const char* kText255 =
    "The TCU is connected to the ORC redundantly via CAN and LIN to execute automatic emergency calls on "
    "certain crash levels.";
inline constexpr const char* kText92 =
    "In case of a Rear Seat Entertainment System (RSU or Tablet PC), the system shall play the alarm and send it "
    "to the appropriate audio output of the selected occupants.";
inline constexpr const char* kReasoning255 =
    "The word 'certain' is used to describe which crash levels trigger automatic emergency calls, yet no specific "
    "crash levels are defined, making it unclear which crash levels should trigger emergency calls.";
inline constexpr const char* kReasoning92 =
    "The word 'appropriate' refers to the audio output corresponding to the selected occupants, which is "
    "contextually clear as it relates to the specific occupant selection mentioned in the requirement.";

/// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hlc-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> words{
      "system", "shall", "signal",  "brake",  "door",    "window", "display", "audio",  "vehicle", "driver",
      "sensor", "level", "warning", "engine", "battery", "camera", "seat",    "mirror", "light",   "speed",
      "alarm",  "menu",  "button",  "cabin",  "network", "module", "status",  "timer",  "fault",   "output"};
  return words;
}

/// A random requirement sentence that contains `weak_word` once.
inline std::string random_requirement(eval::Rng& rng, const std::string& weak_word) {
  const auto& v = vocabulary();
  std::string text = "The";
  const std::size_t n = 4 + rng.uniform_index(8);
  const std::size_t at = rng.uniform_index(n);
  for (std::size_t i = 0; i < n; ++i) {
    text += ' ';
    text += i == at ? weak_word : v[rng.uniform_index(v.size())];
  }
  return text + ".";
}

inline ValidatedExample make_example(const std::string& id, const std::string& requirement_id, const std::string& text,
                                     const std::string& weak_word, Label label, std::size_t dim = 64) {
  ValidatedExample e;
  e.example_id = id;
  e.requirement_id = requirement_id;
  e.text = text;
  e.weak_word = weak_word;
  e.reasoning = label == Label::defect ? "The word '" + weak_word + "' is left undefined."
                                       : "The word '" + weak_word + "' is clear from context.";
  e.label = label;
  e.embedding = deterministic_fallback_embed(text, dim);
  e.source = ExampleSource::simulated;
  e.validated_at = parse_timestamp("2024-05-01T12:00:00Z");
  return e;
}

/// Balanced synthetic dataset with ids "r0000".."rNNNN"; even positions are defects.
inline std::vector<eval::DatasetRecord> balanced_dataset(std::size_t n, std::uint64_t seed = 1) {
  eval::Rng rng(seed);
  std::vector<eval::DatasetRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "r%04zu", i);
    const std::string word = i % 3 == 0 ? "appropriate" : "certain";
    out.push_back({id, random_requirement(rng, word), word, i % 2 == 0 ? Label::defect : Label::not_defect});
  }
  return out;
}

}  // namespace hlc::testing

#include <deque>
#include <mutex>

#include "hlc/http.hpp"

namespace hlc::testing {

/// Replays canned responses and records requests. A response with status
/// -1 simulates a transport failure.
class MockTransport : public HttpTransport {
 public:
  explicit MockTransport(std::deque<HttpResponse> responses) : responses_(std::move(responses)) {}

  HttpResponse post(const HttpRequest& request) override {
    std::lock_guard lock(mutex_);
    requests.push_back(request);
    if (responses_.empty()) throw Error(ErrorCode::ProviderError, "no canned response left");
    auto r = responses_.front();
    responses_.pop_front();
    if (r.status == -1) throw Error(ErrorCode::ProviderError, "connection refused");
    return r;
  }

  std::vector<HttpRequest> requests;

 private:
  std::mutex mutex_;
  std::deque<HttpResponse> responses_;
};

inline RetryPolicy fast_retry() { return RetryPolicy{3, std::chrono::milliseconds(1)}; }

}  // namespace hlc::testing
