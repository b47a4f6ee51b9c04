#include "folio/server/http_server.hpp"

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "folio/corpus/manifest.hpp"
#include "folio/error.hpp"
#include "folio/eval/benchmark.hpp"
#include "folio/rag/prompt.hpp"
#include "folio/util/text.hpp"

namespace folio::server {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, const ApiError& err) { send_json(res, err.status, err.to_json()); }

std::string content_type_for(const fs::path& p) {
  auto ext = text::to_lower_ascii(p.extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  if (ext == ".bmp") return "image/bmp";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".tif" || ext == ".tiff") return "image/tiff";
  return "application/octet-stream";
}

int parse_page_no(const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || v < 1) throw Error(Errc::NotFound, "no page '" + s + "'");
  return v;
}

std::string random_token() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::ostringstream ss;
  ss << std::hex << rng();
  return ss.str();
}

json summary_json(const corpus::DocumentSummary& d) {
  return {{"doc_id", d.doc_id}, {"title", d.title}, {"pages", d.pages}};
}

// Runs a handler and converts any failure into an ApiError body.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    send_error(res, to_api_error(e.code(), e.what()));
  } catch (const json::exception& e) {
    send_error(res, {400, "bad_request", std::string("invalid JSON: ") + e.what()});
  } catch (const std::exception& e) {
    send_error(res, {500, "internal", e.what()});
  }
}

}  // namespace

ApiError to_api_error(Errc code, const std::string& message) {
  switch (code) {
    case Errc::MalformedManifest:
    case Errc::InvalidChunking:
    case Errc::EmptyInput:
    case Errc::InvalidArgument:
    case Errc::DimMismatch:
    case Errc::EmptyBenchmark:
    case Errc::BudgetTooSmall:
    case Errc::MissingImage:
    case Errc::EfTooSmall:
      return {400, "bad_request", message};
    case Errc::NotFound:
    case Errc::SessionNotFound:
      return {404, "not_found", message};
    case Errc::DuplicateDocId:
    case Errc::AlternationViolation:
      return {409, "conflict", message};
    case Errc::ProviderUnreachable:
    case Errc::ProviderBadResponse:
      return {502, "provider_unreachable", message};
    default:
      return {500, "internal", message};
  }
}

json to_json(const rag::Citation& c) {
  json j{{"doc_id", c.doc_id},
         {"page_no", c.page_no},
         {"kind", std::string(index::to_string(c.kind))},
         {"score", c.score},
         {"snippet", c.snippet}};
  j["label"] = c.label ? json(*c.label) : json(nullptr);
  return j;
}

json to_json(const rag::Turn& turn) {
  json cites = json::array();
  for (const auto& c : turn.citations) cites.push_back(to_json(c));
  return {{"role", turn.role == rag::Role::User ? "user" : "assistant"},
          {"text", turn.text},
          {"citations", cites},
          {"timestamp_ms", turn.timestamp_ms}};
}

struct HttpServer::Impl {
  std::shared_ptr<rag::Engine> engine;
  ServerConfig cfg;
  httplib::Server http;
  int port = -1;

  fs::path data_dir() const {
    return engine->config().data_dir.empty() ? fs::current_path() : fs::absolute(engine->config().data_dir);
  }

  void ingest(const httplib::Request& req, httplib::Response& res) {
    corpus::DocumentBundle bundle;
    std::optional<fs::path> upload_dir;
    if (req.is_multipart_form_data()) {
      if (!req.has_file("manifest")) throw Error(Errc::MalformedManifest, "multipart upload lacks a 'manifest' part");
      upload_dir = data_dir() / "uploads" / random_token();
      fs::create_directories(*upload_dir);
      for (const auto& [name, part] : req.files) {
        if (name == "manifest" || part.filename.empty()) continue;
        const auto file = fs::path(part.filename).filename();
        if (file.empty() || file == "." || file == "..") continue;
        std::ofstream out(*upload_dir / file, std::ios::binary);
        out.write(part.content.data(), static_cast<std::streamsize>(part.content.size()));
      }
      try {
        bundle = corpus::parse_manifest(req.get_file_value("manifest").content, *upload_dir);
      } catch (...) {
        fs::remove_all(*upload_dir);
        throw;
      }
    } else {
      bundle = corpus::parse_manifest(req.body, data_dir());
    }
    try {
      const auto result = engine->ingest(bundle);
      send_json(res, 201, {{"doc_id", result.doc_id}, {"pages", result.pages}});
    } catch (...) {
      if (upload_dir) fs::remove_all(*upload_dir);
      throw;
    }
  }

  void document_detail(const httplib::Request& req, httplib::Response& res) {
    const auto& doc_id = req.path_params.at("doc_id");
    const auto doc = engine->document(doc_id);
    if (!doc) throw Error(Errc::NotFound, "no document '" + doc_id + "'");
    json pages = json::array();
    for (const auto& p : doc->pages) {
      json figures = json::array();
      for (const auto& f : p.figures) {
        json fig{{"label", f.label}, {"caption", f.caption_clean}};
        fig["image_url"] = f.image_ref ? json(rag::image_endpoint("", doc_id, p.page_no, f.label)) : json(nullptr);
        figures.push_back(std::move(fig));
      }
      pages.push_back({{"page_no", p.page_no},
                       {"image_url", rag::image_endpoint("", doc_id, p.page_no, std::nullopt)},
                       {"chunks", p.chunks.size()},
                       {"figures", figures}});
    }
    send_json(res, 200, {{"doc_id", doc->doc_id}, {"title", doc->title}, {"pages", pages}});
  }

  void page_image(const httplib::Request& req, httplib::Response& res) {
    const auto& doc_id = req.path_params.at("doc_id");
    const int page_no = parse_page_no(req.path_params.at("page_no"));
    std::optional<std::string> label;
    if (req.has_param("label")) label = req.get_param_value("label");
    const auto loc = engine->page_image(doc_id, page_no, label);
    if (!loc) throw Error(Errc::NotFound, "no image for " + rag::evidence_tag(doc_id, page_no, label));
    if (loc->is_url) {
      res.set_redirect(loc->image_ref);
      return;
    }
    std::ifstream in(loc->image_ref, std::ios::binary);
    if (!in) throw Error(Errc::NotFound, "image file for " + rag::evidence_tag(doc_id, page_no, label) + " is missing");
    std::ostringstream ss;
    ss << in.rdbuf();
    res.status = 200;
    res.set_content(ss.str(), content_type_for(loc->image_ref));
  }

  void message(const httplib::Request& req, httplib::Response& res) {
    const auto& session_id = req.path_params.at("session_id");
    const auto body = json::parse(req.body);
    const auto text = body.at("text").get<std::string>();
    const auto turn = engine->chat_answer(session_id, text);
    const auto turn_json = to_json(turn);
    if (req.get_param_value("stream") != "1") {
      send_json(res, 200, turn_json);
      return;
    }
    std::string events;
    const auto tokens = text::split_whitespace(turn.text);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::string chunk = std::string(tokens[i]) + (i + 1 < tokens.size() ? " " : "");
      events += "event: token\ndata: " + json{{"text", chunk}}.dump() + "\n\n";
    }
    events += "event: done\ndata: " + turn_json.dump() + "\n\n";
    res.status = 200;
    res.set_header("Cache-Control", "no-cache");
    res.set_content(events, "text/event-stream");
  }

  void eval_run(const httplib::Request& req, httplib::Response& res) {
    const auto body = req.body.empty() ? json::object() : json::parse(req.body);
    std::vector<eval::BenchmarkItem> items;
    if (body.contains("items")) {
      for (const auto& it : body.at("items")) items.push_back(eval::benchmark_item_from_json(it));
    } else if (body.contains("benchmark_path")) {
      items = eval::load_benchmark(body.at("benchmark_path").get<std::string>());
    } else {
      throw Error(Errc::InvalidArgument, "eval request needs 'items' or 'benchmark_path'");
    }
    std::vector<std::size_t> ks{1, 3, 5};
    if (body.contains("ks")) ks = body.at("ks").get<std::vector<std::size_t>>();
    const bool qa = body.value("qa", true);
    send_json(res, 200, eval::to_json(eval::run_eval(*engine, items, ks, qa)));
  }

  void routes() {
    http.Get("/v1/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

    http.Post("/v1/documents", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { ingest(req, res); });
    });
    http.Get("/v1/documents", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        json out = json::array();
        for (const auto& d : engine->documents()) out.push_back(summary_json(d));
        send_json(res, 200, out);
      });
    });
    http.Get("/v1/documents/:doc_id", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { document_detail(req, res); });
    });

    http.Post("/v1/sessions", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 201, {{"session_id", engine->create_session()}}); });
    });
    http.Get("/v1/sessions/:session_id", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto& id = req.path_params.at("session_id");
        json turns = json::array();
        for (const auto& t : engine->session_turns(id)) turns.push_back(to_json(t));
        send_json(res, 200, {{"session_id", id}, {"turns", turns}});
      });
    });
    http.Post("/v1/sessions/:session_id/messages", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { message(req, res); });
    });

    http.Get("/v1/pages/:doc_id/:page_no/image", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { page_image(req, res); });
    });

    http.Post("/v1/eval/run", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { eval_run(req, res); });
    });

    http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return;
      if (res.status == 404) {
        send_error(res, {404, "not_found", "no route for " + req.method + " " + req.path});
      } else if (res.status >= 400 && res.status < 500) {
        send_error(res, {res.status, "bad_request", "bad request"});
      } else {
        send_error(res, {500, "internal", "internal error"});
      }
    });
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        send_error(res, {500, "internal", e.what()});
      } catch (...) {
        send_error(res, {500, "internal", "unknown error"});
      }
    });
  }
};

HttpServer::HttpServer(std::shared_ptr<rag::Engine> engine, ServerConfig cfg) : impl_(std::make_unique<Impl>()) {
  impl_->engine = std::move(engine);
  impl_->cfg = std::move(cfg);
  const auto threads = impl_->cfg.threads;
  impl_->http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& i = *impl_;
  if (i.cfg.port == 0) {
    i.port = i.http.bind_to_any_port(i.cfg.bind_addr);
  } else {
    i.port = i.http.bind_to_port(i.cfg.bind_addr, i.cfg.port) ? i.cfg.port : -1;
  }
  if (i.port < 0) {
    throw Error(Errc::Io, "cannot bind " + i.cfg.bind_addr + ":" + std::to_string(i.cfg.port));
  }
  return i.port;
}

void HttpServer::run() { impl_->http.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->http.stop();
}

bool HttpServer::is_running() const { return impl_->http.is_running(); }

}  // namespace folio::server
