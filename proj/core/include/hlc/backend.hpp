#pragma once

#include <map>
#include <memory>
#include <semaphore>
#include <set>
#include <string>

#include "hlc/http.hpp"
#include "hlc/model.hpp"
#include "hlc/prompt.hpp"

namespace hlc {

struct CompletionRequest {
  std::string system_text;
  std::string user_text;
  std::size_t max_output_tokens = 256;

  /// Throws ConfigError on empty texts or a zero token limit.
  void validate() const;
};

enum class BackendKind { remote_chat, scripted, oracle };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view s);

struct RemoteChatConfig {
  std::string endpoint_url;
  std::string model_name;
  std::string api_key_env = "HLC_LLM_API_KEY";
  double temperature = 0.0;
  RetryPolicy retry;
  std::size_t max_in_flight = 4;
};

/// Answers from gold labels. `{weak_word}` and `{requirement_id}` in the
/// templates are substituted.
struct OracleConfig {
  std::map<FindingKey, Label> gold;
  std::set<FindingKey> flip;
  std::string defect_template =
      "The weak word '{weak_word}' is not made concrete anywhere in the requirement, so readers "
      "can interpret it differently.";
  std::string not_defect_template =
      "The weak word '{weak_word}' is made clear by the surrounding context of the requirement.";
};

struct BackendConfig {
  BackendKind kind = BackendKind::oracle;
  RemoteChatConfig remote;
  /// FindingKey::str() -> verbatim model output.
  std::map<std::string, std::string> script;
  OracleConfig oracle;

  /// Throws ConfigError when required fields are missing or fields of
  /// another kind are populated.
  void validate() const;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;

  /// Raw model text. Throws BackendUnavailable, ScriptMiss or ConfigError.
  virtual std::string complete(const CompletionRequest& request) = 0;

  /// Remote backends get one format-reminder retry on unparseable output.
  [[nodiscard]] virtual bool is_remote() const { return false; }

  /// Short identifier used as the report's approach column.
  [[nodiscard]] virtual std::string name() const = 0;
};

/// Chat-completions style endpoint: POST {"model", "messages", "temperature",
/// "max_tokens"}, answer read from choices[0].message.content.
class RemoteChatBackend final : public CompletionBackend {
 public:
  RemoteChatBackend(RemoteChatConfig config, std::shared_ptr<HttpTransport> transport);

  std::string complete(const CompletionRequest& request) override;
  [[nodiscard]] bool is_remote() const override { return true; }
  [[nodiscard]] std::string name() const override { return config_.model_name; }

 private:
  RemoteChatConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::counting_semaphore<> in_flight_;
};

class ScriptedBackend final : public CompletionBackend {
 public:
  explicit ScriptedBackend(std::map<std::string, std::string> script) : script_(std::move(script)) {}

  std::string complete(const CompletionRequest& request) override;
  [[nodiscard]] std::string name() const override { return "scripted"; }

 private:
  std::map<std::string, std::string> script_;
};

class OracleBackend final : public CompletionBackend {
 public:
  explicit OracleBackend(OracleConfig config) : config_(std::move(config)) {}

  std::string complete(const CompletionRequest& request) override;
  [[nodiscard]] std::string name() const override { return "oracle"; }

  /// Templated reasoning for a label.
  [[nodiscard]] std::string reasoning_for(const FindingKey& key, Label label) const;

 private:
  OracleConfig config_;
};

/// A null transport means the default httplib transport for remote chat.
std::shared_ptr<CompletionBackend> make_backend(const BackendConfig& config,
                                                std::shared_ptr<HttpTransport> transport = nullptr);

/// One-off completion through a freshly built backend.
std::string complete(const CompletionRequest& request, const BackendConfig& config);

}  // namespace hlc
