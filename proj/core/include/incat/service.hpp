#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "incat/store.hpp"

namespace incat {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  // Empty disables authentication.
  std::string bearer_token;
  // Value for Access-Control-Allow-Origin; empty disables CORS headers.
  std::string cors_origin = "*";
};

/// HTTP/JSON front end over a Store.
///
///   GET  /api/themes            GET /api/clusters      GET /api/elbow
///   GET  /api/combos            GET /api/assessments/{id}
///   POST /api/responses         GET /api/readiness
///   POST /api/targeting/{theme_id}?quota=N
///
/// Handlers only load from the store and call the library.
class Service {
public:
  Service(Store& store, ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on a background thread. Port 0 picks a free port.
  // Returns the bound port; throws Error if binding fails.
  int start(int port);
  // Blocks the caller until stop() is called from elsewhere.
  void run(int port);
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace incat
