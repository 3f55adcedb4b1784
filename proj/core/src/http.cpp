#include "hlc/http.hpp"

#include <httplib.h>

#include <cstdlib>

#include "hlc/error.hpp"

namespace hlc {
namespace {

struct SplitUrl {
  std::string origin;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::ConfigError, "url without scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::milliseconds timeout) : timeout_(timeout) {}

  HttpResponse post(const HttpRequest& request) override {
    const auto [origin, path] = split_url(request.url);
    httplib::Client client(origin);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [name, value] : request.headers) {
      if (name == "Content-Type") {
        content_type = value;
      } else {
        headers.emplace(name, value);
      }
    }
    auto result = client.Post(path, headers, request.body, content_type);
    if (!result) {
      throw Error(ErrorCode::ProviderError,
                  "HTTP request to " + origin + " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  }

 private:
  std::chrono::milliseconds timeout_;
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(std::chrono::milliseconds timeout) {
  return std::make_shared<HttplibTransport>(timeout);
}

std::string api_key_from_env(const std::string& variable) {
  if (variable.empty()) {
    return {};
  }
  const char* value = std::getenv(variable.c_str());
  return value == nullptr ? std::string() : std::string(value);
}

}  // namespace hlc
