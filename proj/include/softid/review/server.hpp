#pragma once

#include <memory>
#include <string>

#include "softid/review/store.hpp"

namespace httplib {
class Server;
}

namespace softid::review {

struct ServerOptions {
  /// Shared bearer token; empty disables the check.
  std::string token;
  /// Value of Access-Control-Allow-Origin.
  std::string cors_origin = "*";
};

/// JSON over HTTP front end for a ReviewStore.
///
///   GET  /queue[?state=pending|resolved]
///   GET  /items/{pair_id}
///   POST /items/{pair_id}/verdict
///   GET  /export/gold
///   GET  /decisions
///
/// Errors come back as {"error": kind, "message": text} with 400, 401, 404
/// or 409.
class ReviewServer {
 public:
  ReviewServer(ReviewStore& store, ServerOptions options = {});
  ~ReviewServer();

  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Call after bind().
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  void install_routes();

  ReviewStore& store_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
};

/// Parses "host:port" (host may be empty, meaning 127.0.0.1).
std::pair<std::string, int> parse_listen(const std::string& addr);

}  // namespace softid::review
