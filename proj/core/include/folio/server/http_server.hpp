#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "folio/error.hpp"
#include "folio/rag/engine.hpp"
#include "folio/server/config.hpp"

namespace folio::server {

struct ApiError {
  int status = 500;
  std::string code;  // bad_request | not_found | provider_unreachable | conflict | internal
  std::string message;

  nlohmann::json to_json() const { return {{"status", status}, {"code", code}, {"message", message}}; }
};

ApiError to_api_error(Errc code, const std::string& message);

nlohmann::json to_json(const rag::Turn& turn);
nlohmann::json to_json(const rag::Citation& c);

// JSON-over-HTTP front end for an Engine. Routes:
//   POST /v1/documents                 manifest body (JSONL) or multipart with
//                                      a "manifest" field plus image files
//   GET  /v1/documents, /v1/documents/{doc_id}
//   POST /v1/sessions, GET /v1/sessions/{id}
//   POST /v1/sessions/{id}/messages    {"text"}; ?stream=1 for server-sent events
//   GET  /v1/pages/{doc}/{page}/image  ?label= selects a figure image
//   GET  /v1/healthz
//   POST /v1/eval/run                  {"items": [...]} or {"benchmark_path"}
class HttpServer {
 public:
  HttpServer(std::shared_ptr<rag::Engine> engine, ServerConfig cfg);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds cfg.bind_addr:cfg.port (port 0 picks a free one) and returns the
  // bound port. Throws Io when binding fails.
  int bind();

  // Serves until stop(); call bind() first.
  void run();
  void stop();
  bool is_running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace folio::server
