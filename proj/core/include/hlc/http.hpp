#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>

namespace hlc {

struct HttpRequest {
  std::string url;
  std::string body;
  std::map<std::string, std::string> headers;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Minimal POST-only transport so remote providers can be tested without a
/// network. Implementations throw hlc::Error(ProviderError) on transport
/// failure (connection refused, timeout) and return non-2xx statuses as-is.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport. Supports http:// and https:// URLs.
std::shared_ptr<HttpTransport> make_http_transport(
    std::chrono::milliseconds timeout = std::chrono::seconds(60));

/// Reads an API key from the named environment variable; empty when unset.
std::string api_key_from_env(const std::string& variable);

}  // namespace hlc

namespace hlc {

/// Attempts and exponential backoff for remote calls. Delay before retry n
/// (1-based) is base_delay * 2^(n-1).
struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
};

/// True for statuses worth retrying (429 and 5xx).
inline bool is_transient_status(int status) { return status == 429 || status >= 500; }

}  // namespace hlc
