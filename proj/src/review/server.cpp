#include "softid/review/server.hpp"

#include <httplib.h>

#include "softid/harvest/decision.hpp"

namespace softid::review {

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind, const std::string& message) {
  send_json(res, status, {{"error", kind}, {"message", message}});
}

std::string ndjson(const std::vector<nlohmann::json>& lines) {
  std::string out;
  for (const auto& l : lines) out += l.dump() + "\n";
  return out;
}

}  // namespace

std::pair<std::string, int> parse_listen(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw ValidationError("listen address must be host:port, got '" + addr + "'");
  std::string host = addr.substr(0, colon);
  if (host.empty()) host = "127.0.0.1";
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ValidationError("bad port in listen address '" + addr + "'");
  }
  if (port < 0 || port > 65535) throw ValidationError("port out of range in '" + addr + "'");
  return {host, port};
}

ReviewServer::ReviewServer(ReviewStore& store, ServerOptions options)
    : store_(store), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool ReviewServer::serve() { return server_->listen_after_bind(); }

void ReviewServer::stop() {
  if (server_) server_->stop();
}

void ReviewServer::wait_until_ready() const { server_->wait_until_ready(); }

void ReviewServer::install_routes() {
  auto& s = *server_;

  s.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
    res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    if (req.method == "OPTIONS") {
      res.status = 204;
      return httplib::Server::HandlerResponse::Handled;
    }
    if (!options_.token.empty() && req.get_header_value("Authorization") != "Bearer " + options_.token) {
      send_error(res, 401, "unauthorized", "missing or wrong bearer token");
      return httplib::Server::HandlerResponse::Handled;
    }
    return httplib::Server::HandlerResponse::Unhandled;
  });

  s.Get("/queue", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<ItemState> filter;
    if (req.has_param("state")) {
      const auto v = req.get_param_value("state");
      if (v == "pending") {
        filter = ItemState::kPending;
      } else if (v == "resolved") {
        filter = ItemState::kResolved;
      } else if (v != "all") {
        return send_error(res, 400, "validation", "state must be pending, resolved or all");
      }
    }
    const auto all = store_.items();
    nlohmann::json items = nlohmann::json::array();
    std::size_t pending = 0;
    for (const auto& item : all) {
      pending += item.state == ItemState::kPending;
      if (!filter || item.state == *filter) items.push_back(summary_json(item));
    }
    send_json(res, 200,
              {{"total", all.size()}, {"pending", pending}, {"resolved", all.size() - pending}, {"items", items}});
  });

  s.Get(R"(/items/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto item = store_.item(req.matches[1]);
    if (!item) return send_error(res, 404, "not_found", "no review item for pair " + std::string(req.matches[1]));
    send_json(res, 200, *item);
  });

  s.Post(R"(/items/(.+)/verdict)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return send_error(res, 400, "validation", "request body is not JSON");
    try {
      const auto submission = parse_submission(body, store_.now_ms());
      send_json(res, 200, store_.submit_verdict(req.matches[1], submission));
    } catch (const NotFoundError& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const ConflictError& e) {
      send_error(res, 409, "conflict", e.what());
    } catch (const ValidationError& e) {
      send_error(res, 400, "validation", e.what());
    }
  });

  s.Get("/export/gold", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(export_gold(store_.gold_cases()), "application/x-ndjson");
  });

  s.Get("/decisions", [this](const httplib::Request&, httplib::Response& res) {
    std::vector<nlohmann::json> lines;
    for (const auto& d : store_.decisions()) lines.emplace_back(d);
    res.set_content(ndjson(lines), "application/x-ndjson");
  });

  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    } catch (...) {
      send_error(res, 500, "internal", "unknown error");
    }
  });
}

}  // namespace softid::review
