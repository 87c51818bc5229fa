#include "incat/service.hpp"

#include <charconv>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "incat/api.hpp"
#include "incat/error.hpp"

namespace incat {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json error_body(std::string_view error, std::string_view message, std::string_view field = {}) {
  json j{{"error", error}, {"message", message}};
  if (!field.empty()) j["field"] = field;
  return j;
}

// Maps library exceptions onto HTTP status codes.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const FieldError& e) {
    send_json(res, 400, error_body("invalid", e.what(), e.field()));
  } catch (const NotFoundError& e) {
    send_json(res, 404, error_body("not_found", e.what()));
  } catch (const ValidationError& e) {
    send_json(res, 400, error_body("invalid", e.what()));
  } catch (const ParseError& e) {
    send_json(res, 400, error_body("malformed", e.what()));
  } catch (const std::exception& e) {
    send_json(res, 500, error_body("internal", e.what()));
  }
}

} // namespace

struct Service::Impl {
  Impl(Store& s, ServiceConfig c) : store(s), config(std::move(c)) { routes(); }

  void routes();
  void post_response(const httplib::Request& req, httplib::Response& res);

  Store& store;
  ServiceConfig config;
  httplib::Server server;
  std::thread worker;
};

void Service::Impl::routes() {
  server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (config.bearer_token.empty() || req.method == "OPTIONS") return httplib::Server::HandlerResponse::Unhandled;
    if (req.get_header_value("Authorization") == "Bearer " + config.bearer_token)
      return httplib::Server::HandlerResponse::Unhandled;
    send_json(res, 401, error_body("unauthorized", "missing or wrong bearer token"));
    return httplib::Server::HandlerResponse::Handled;
  });
  server.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
    if (config.cors_origin.empty()) return;
    res.set_header("Access-Control-Allow-Origin", config.cors_origin);
    res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  });
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/api/themes", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, api::themes(store)); });
  });
  server.Get("/api/clusters", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, api::clusters(store)); });
  });
  server.Get("/api/elbow", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, api::elbow(store)); });
  });
  server.Get("/api/combos", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::size_t top = 0;
      if (req.has_param("top")) {
        const auto v = req.get_param_value("top");
        if (std::from_chars(v.data(), v.data() + v.size(), top).ec != std::errc())
          throw FieldError("top", "must be a non-negative integer");
      }
      send_json(res, 200, api::combos(store, top));
    });
  });
  server.Get(R"(/api/assessments/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      auto a = store.assessment(id);
      if (!a) throw NotFoundError("unknown assessment '" + id + "'");
      send_json(res, 200, assessment_to_json(*a));
    });
  });
  server.Post("/api/responses",
              [this](const httplib::Request& req, httplib::Response& res) { post_response(req, res); });
  server.Get("/api/readiness", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, api::readiness(store)); });
  });
  server.Post(R"(/api/targeting/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string theme = req.matches[1];
      std::optional<std::size_t> quota;
      if (req.has_param("quota")) {
        const auto v = req.get_param_value("quota");
        std::size_t q = 0;
        if (std::from_chars(v.data(), v.data() + v.size(), q).ec != std::errc())
          throw FieldError("quota", "must be a non-negative integer");
        quota = q;
      }
      auto payload = api::targeting(store, theme, quota);
      json record = payload;
      record["kind"] = "targeting";
      store.append(Collection::Reports, record);
      send_json(res, 200, payload);
    });
  });
}

void Service::Impl::post_response(const httplib::Request& req, httplib::Response& res) {
  guarded(res, [&] {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("request body: ") + e.what(), e.byte);
    }
    const auto resp = response_from_json(body);
    const auto assessment = store.assessment(resp.assessment_id);
    if (!assessment) throw NotFoundError("unknown assessment '" + resp.assessment_id + "'");
    const auto scores = score_response(resp, *assessment);
    store.append(Collection::Responses, response_to_json(resp));
    std::vector<json> docs;
    for (const auto& d : response_documents(resp)) docs.push_back({{"kind", "document"}, {"document", document_to_json(d)}});
    if (!docs.empty()) store.append_all(Collection::Corpora, docs);
    send_json(res, 201, json{{"assessment_id", resp.assessment_id}, {"scores", tag_scores_to_json(scores)}});
  });
}

Service::Service(Store& store, ServiceConfig config) : impl_(std::make_unique<Impl>(store, std::move(config))) {}

Service::~Service() { stop(); }

int Service::start(int port) {
  auto& server = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(impl_->config.host);
  } else if (!server.bind_to_port(impl_->config.host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error("cannot bind " + impl_->config.host + ":" + std::to_string(port));
  impl_->worker = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return bound;
}

void Service::run(int port) {
  start(port);
  if (impl_->worker.joinable()) impl_->worker.join();
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable() && impl_->worker.get_id() != std::this_thread::get_id()) impl_->worker.join();
}

} // namespace incat
