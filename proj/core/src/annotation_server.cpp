#include "sisynth/annotation_server.hpp"

#include <httplib.h>

#include "sisynth/error.hpp"

namespace sisynth {
namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

Label label_from_body(const nlohmann::json& body) {
  auto it = body.find("label");
  if (it == body.end() || !it->is_string()) throw Error(ErrorCode::kInvalidLabel, "body needs a string label");
  auto label = find_label(it->get<std::string>());
  if (!label) throw Error(ErrorCode::kInvalidLabel, "unknown label " + it->get<std::string>());
  return *label;
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConflict:
    case ErrorCode::kState:
    case ErrorCode::kIncompleteSession:
      return 409;
    case ErrorCode::kAuthorization: return 403;
    case ErrorCode::kInvalidLabel: return 422;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kSession:
    case ErrorCode::kParameter:
      return 400;
    default: return 500;
  }
}

struct AnnotationServer::Impl {
  AnnotationService& service;
  httplib::Server server;

  explicit Impl(AnnotationService& s) : service(s) {}

  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, http_status_for(e.code()), to_string(e.code()), e.what());
      } catch (const nlohmann::json::exception& e) {
        send_error(res, 400, "bad_request", e.what());
      }
    };
  }

  nlohmann::json body_of(const httplib::Request& req) {
    auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw Error(ErrorCode::kParameter, "request body must be a JSON object");
    return body;
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& id : service.session_ids()) out.push_back(service.summary(id));
      send_json(res, 200, out);
    }));
    server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, service.summary(req.matches[1]));
    }));
    server.Get(R"(/sessions/([^/]+)/tasks)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::optional<TaskStatus> status;
      if (req.has_param("status")) status = parse_task_status(req.get_param_value("status"));
      const std::string annotator = req.has_param("annotator") ? req.get_param_value("annotator") : "";
      send_json(res, 200, service.task_views(req.matches[1], annotator, status));
    }));
    server.Post(R"(/sessions/([^/]+)/tasks/([^/]+)/labels)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = body_of(req);
                  const auto annotator = body.value("annotator", std::string{});
                  if (annotator.empty()) throw Error(ErrorCode::kParameter, "body needs an annotator");
                  const auto status = service.submit_label(req.matches[1], req.matches[2], annotator, label_from_body(body));
                  send_json(res, 200, {{"task_id", std::string(req.matches[2])}, {"status", to_string(status)}});
                }));
    server.Post(R"(/sessions/([^/]+)/tasks/([^/]+)/resolve)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = body_of(req);
                  const auto status = service.resolve(req.matches[1], req.matches[2], label_from_body(body),
                                                      body.value("note", std::string{}));
                  send_json(res, 200, {{"task_id", std::string(req.matches[2])}, {"status", to_string(status)}});
                }));
    server.Get(R"(/sessions/([^/]+)/report)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, to_json(service.report(req.matches[1])));
    }));
  }
};

AnnotationServer::AnnotationServer(AnnotationService& service) : impl_(std::make_unique<Impl>(service)) {
  impl_->routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void AnnotationServer::listen() { impl_->server.listen_after_bind(); }

int AnnotationServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  thread_ = std::jthread([this] { listen(); });
  impl_->server.wait_until_ready();
  return bound;
}

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace sisynth
