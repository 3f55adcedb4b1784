#include "hlc/backend.hpp"

#include <thread>

#include "hlc/error.hpp"
#include "hlc/json.hpp"

namespace hlc {
namespace {

std::string substitute(std::string text, std::string_view placeholder, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(placeholder, pos)) != std::string::npos) {
    text.replace(pos, placeholder.size(), value);
    pos += value.size();
  }
  return text;
}

FindingKey require_key(const CompletionRequest& request) {
  auto key = extract_finding_key(request.user_text);
  if (!key) {
    throw Error(ErrorCode::ScriptMiss, "prompt carries no Finding-Key line");
  }
  return *key;
}

std::string extract_chat_content(const std::string& body) {
  const auto doc = Json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty()) {
    throw Error(ErrorCode::BackendUnavailable, "chat response has no choices");
  }
  const auto& choice = doc["choices"][0];
  if (choice.contains("message") && choice["message"].contains("content") &&
      choice["message"]["content"].is_string()) {
    return choice["message"]["content"].get<std::string>();
  }
  if (choice.contains("text") && choice["text"].is_string()) {
    return choice["text"].get<std::string>();
  }
  throw Error(ErrorCode::BackendUnavailable, "chat response choice has no text");
}

}  // namespace

void CompletionRequest::validate() const {
  if (system_text.empty() || user_text.empty()) {
    throw Error(ErrorCode::ConfigError, "completion request needs system and user text");
  }
  if (max_output_tokens == 0) {
    throw Error(ErrorCode::ConfigError, "max_output_tokens must be positive");
  }
}

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::remote_chat: return "remote_chat";
    case BackendKind::scripted: return "scripted";
    case BackendKind::oracle: return "oracle";
  }
  return "oracle";
}

BackendKind parse_backend_kind(std::string_view s) {
  if (s == "remote_chat" || s == "remote") return BackendKind::remote_chat;
  if (s == "scripted") return BackendKind::scripted;
  if (s == "oracle") return BackendKind::oracle;
  throw Error(ErrorCode::ConfigError, "unknown backend kind '" + std::string(s) + "'");
}

void BackendConfig::validate() const {
  const bool has_remote = !remote.endpoint_url.empty() || !remote.model_name.empty();
  const bool has_script = !script.empty();
  const bool has_oracle = !oracle.gold.empty() || !oracle.flip.empty();
  switch (kind) {
    case BackendKind::remote_chat:
      if (remote.endpoint_url.empty() || remote.model_name.empty()) {
        throw Error(ErrorCode::ConfigError, "remote_chat backend needs endpoint_url and model_name");
      }
      if (has_script || has_oracle) {
        throw Error(ErrorCode::ConfigError, "remote_chat backend config carries scripted/oracle fields");
      }
      if (remote.retry.max_attempts < 1 || remote.max_in_flight == 0) {
        throw Error(ErrorCode::ConfigError, "retry attempts and in-flight bound must be positive");
      }
      break;
    case BackendKind::scripted:
      if (has_remote || has_oracle) {
        throw Error(ErrorCode::ConfigError, "scripted backend config carries remote/oracle fields");
      }
      break;
    case BackendKind::oracle:
      if (has_remote || has_script) {
        throw Error(ErrorCode::ConfigError, "oracle backend config carries remote/scripted fields");
      }
      if (oracle.defect_template.empty() || oracle.not_defect_template.empty()) {
        throw Error(ErrorCode::ConfigError, "oracle reasoning templates must be non-empty");
      }
      break;
  }
}

RemoteChatBackend::RemoteChatBackend(RemoteChatConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      in_flight_(static_cast<std::ptrdiff_t>(config_.max_in_flight)) {
  if (!transport_) {
    throw Error(ErrorCode::ConfigError, "remote chat backend needs a transport");
  }
}

std::string RemoteChatBackend::complete(const CompletionRequest& request) {
  request.validate();
  HttpRequest http;
  http.url = config_.endpoint_url;
  http.headers["Content-Type"] = "application/json";
  if (const auto key = api_key_from_env(config_.api_key_env); !key.empty()) {
    http.headers["Authorization"] = "Bearer " + key;
  }
  http.body = Json{{"model", config_.model_name},
                   {"messages",
                    Json::array({Json{{"role", "system"}, {"content", request.system_text}},
                                 Json{{"role", "user"}, {"content", request.user_text}}})},
                   {"temperature", config_.temperature},
                   {"max_tokens", request.max_output_tokens}}
                  .dump();

  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(config_.retry.base_delay * (1 << (attempt - 2)));
    }
    HttpResponse response;
    in_flight_.acquire();
    try {
      response = transport_->post(http);
    } catch (const Error& e) {
      in_flight_.release();
      last_error = e.what();
      continue;
    }
    in_flight_.release();

    if (response.status >= 200 && response.status < 300) {
      return extract_chat_content(response.body);
    }
    last_error = "HTTP status " + std::to_string(response.status);
    if (!is_transient_status(response.status)) {
      break;
    }
  }
  throw Error(ErrorCode::BackendUnavailable, "chat completion failed: " + last_error);
}

std::string ScriptedBackend::complete(const CompletionRequest& request) {
  const auto key = require_key(request);
  const auto it = script_.find(key.str());
  if (it == script_.end()) {
    throw Error(ErrorCode::ScriptMiss,
                "no scripted output for requirement '" + key.requirement_id + "', weak word '" + key.weak_word + "'");
  }
  return it->second;
}

std::string OracleBackend::reasoning_for(const FindingKey& key, Label label) const {
  std::string text = label == Label::defect ? config_.defect_template : config_.not_defect_template;
  text = substitute(std::move(text), "{weak_word}", key.weak_word);
  return substitute(std::move(text), "{requirement_id}", key.requirement_id);
}

std::string OracleBackend::complete(const CompletionRequest& request) {
  const auto key = require_key(request);
  if (const auto given = extract_gold_label(request.user_text)) {
    return render_answer(reasoning_for(key, *given), *given, true);
  }
  const auto it = config_.gold.find(key);
  if (it == config_.gold.end()) {
    throw Error(ErrorCode::ScriptMiss,
                "oracle has no gold label for requirement '" + key.requirement_id + "', weak word '" + key.weak_word + "'");
  }
  const Label label = config_.flip.count(key) != 0 ? flipped(it->second) : it->second;
  return render_answer(reasoning_for(key, label), label, true);
}

std::shared_ptr<CompletionBackend> make_backend(const BackendConfig& config, std::shared_ptr<HttpTransport> transport) {
  config.validate();
  switch (config.kind) {
    case BackendKind::remote_chat:
      if (!transport) {
        transport = make_http_transport();
      }
      return std::make_shared<RemoteChatBackend>(config.remote, std::move(transport));
    case BackendKind::scripted:
      return std::make_shared<ScriptedBackend>(config.script);
    case BackendKind::oracle:
      return std::make_shared<OracleBackend>(config.oracle);
  }
  throw Error(ErrorCode::ConfigError, "unknown backend kind");
}

std::string complete(const CompletionRequest& request, const BackendConfig& config) {
  return make_backend(config)->complete(request);
}

}  // namespace hlc
