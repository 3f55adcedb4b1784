#include <httplib.h>

#include "hlc/review_service.hpp"

namespace hlc {

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownItem: return 404;
    case ErrorCode::AlreadyValidated:
    case ErrorCode::DuplicateRequirementId:
    case ErrorCode::DuplicateExampleId: return 409;
    case ErrorCode::EmptyReasoning:
    case ErrorCode::UnknownLabel:
    case ErrorCode::InvalidRequirement:
    case ErrorCode::ConfigError: return 400;
    case ErrorCode::BackendUnavailable:
    case ErrorCode::ProviderError: return 502;
    default: return 500;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, http_status_for(code), Json{{"code", to_string(code)}, {"message", message}});
}

Json parse_body(const httplib::Request& req) {
  auto j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded()) {
    throw Error(ErrorCode::ConfigError, "request body is not valid JSON");
  }
  return j;
}

std::vector<Requirement> requirements_from(const Json& body) {
  const Json* list = &body;
  if (body.is_object() && body.contains("requirements")) {
    list = &body["requirements"];
  }
  if (!list->is_array()) {
    throw Error(ErrorCode::ConfigError, "expected an array of requirements");
  }
  std::vector<Requirement> out;
  for (const auto& r : *list) {
    if (!r.is_object() || !r.contains("id") || !r.contains("text") || !r["id"].is_string() || !r["text"].is_string()) {
      throw Error(ErrorCode::ConfigError, "each requirement needs string fields id and text");
    }
    out.push_back({r["id"].get<std::string>(), r["text"].get<std::string>()});
  }
  return out;
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const std::exception& e) {
      send_json(res, 500, Json{{"code", "InternalError"}, {"message", e.what()}});
    }
  };
}

}  // namespace

struct ReviewServer::Impl {
  explicit Impl(ReviewService& s) : service(s) { routes(); }

  void routes() {
    server.Post("/requirements", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto items = service.ingest_requirements(requirements_from(parse_body(req)));
      Json out = Json::array();
      for (const auto& item : items) out.push_back(to_json(item));
      send_json(res, 201, Json{{"items", std::move(out)}});
    }));

    server.Get("/items/next", guarded([this](const httplib::Request&, httplib::Response& res) {
      const auto item = service.next_item();
      send_json(res, 200, Json{{"item", item ? to_json(*item) : Json(nullptr)}});
    }));

    server.Get(R"(/items/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, to_json(service.get_item(req.matches[1])));
    }));

    server.Post(R"(/items/([^/]+)/validation)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const Json body = parse_body(req);
      if (!body.is_object() || !body.contains("final_label") || !body["final_label"].is_string()) {
        throw Error(ErrorCode::ConfigError, "validation needs a string final_label");
      }
      const std::string wire_label = body["final_label"].get<std::string>();
      if (wire_label != "defect" && wire_label != "not_defect") {
        throw Error(ErrorCode::UnknownLabel, "final_label must be \"defect\" or \"not_defect\"");
      }
      const std::string reasoning =
          body.contains("final_reasoning") && body["final_reasoning"].is_string() ? body["final_reasoning"].get<std::string>() : "";
      const auto result = service.submit_validation(req.matches[1], parse_label(wire_label), reasoning);
      send_json(res, 200, Json{{"pool_size_after", result.pool_size_after}, {"source", to_string(result.source)}});
    }));

    server.Get("/stats", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, to_json(service.stats()));
    }));

    server.Get("/pool/records", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::optional<std::size_t> limit;
      if (req.has_param("limit")) {
        try {
          const long v = std::stol(req.get_param_value("limit"));
          if (v < 0) throw std::invalid_argument("negative");
          limit = static_cast<std::size_t>(v);
        } catch (const std::exception&) {
          throw Error(ErrorCode::ConfigError, "limit must be a non-negative integer");
        }
      }
      Json records = Json::array();
      for (const auto& r : service.pool_records(limit)) records.push_back(to_json(*r));
      send_json(res, 200, Json{{"records", std::move(records)}});
    }));
  }

  ReviewService& service;
  httplib::Server server;
};

ReviewServer::ReviewServer(ReviewService& service) : impl_(std::make_unique<Impl>(service)) {}

ReviewServer::~ReviewServer() { stop(); }

void ReviewServer::bind(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
}

int ReviewServer::bind_to_any_port(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port < 0) {
    throw Error(ErrorCode::IoError, "cannot bind " + host);
  }
  return port;
}

void ReviewServer::listen() { impl_->server.listen_after_bind(); }

void ReviewServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace hlc
