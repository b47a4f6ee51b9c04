#include "cli.hpp"

#include <CLI11.hpp>

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <thread>

#include "folio/align/model_io.hpp"
#include "folio/align/train.hpp"
#include "folio/corpus/manifest.hpp"
#include "folio/error.hpp"
#include "folio/eval/benchmark.hpp"
#include "folio/eval/curve.hpp"
#include "folio/rag/engine.hpp"
#include "folio/server/config.hpp"
#include "folio/server/http_server.hpp"

namespace folio::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::string config;
  std::string data_dir;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

server::ServerConfig resolve(const GlobalOptions& g, std::ostream& err) {
  std::optional<fs::path> file;
  if (!g.config.empty()) file = g.config;
  auto j = server::resolve_config_json(file, server::process_env);
  if (!g.data_dir.empty()) j["data_dir"] = g.data_dir;
  if (g.seed) j["seed"] = *g.seed;
  auto cfg = server::config_from_json(j);
  if (g.verbose) err << "folio: resolved config " << j.dump() << "\n";
  return cfg;
}

json hit_json(const index::SearchHit& h) {
  json j{{"id", h.id},
         {"score", h.score},
         {"kind", std::string(index::to_string(h.kind))},
         {"space", std::string(index::to_string(h.space))},
         {"doc_id", h.payload.doc_id},
         {"page_no", h.payload.page_no}};
  if (h.payload.chunk_id) j["chunk_id"] = *h.payload.chunk_id;
  if (h.payload.label) j["label"] = *h.payload.label;
  if (h.payload.text) j["text"] = *h.payload.text;
  if (h.payload.image_ref) j["image_ref"] = *h.payload.image_ref;
  return j;
}

struct PairsFile {
  std::vector<std::pair<std::vector<double>, std::vector<double>>> train;
  std::vector<std::pair<std::vector<double>, std::vector<double>>> val;
};

std::vector<double> to_doubles(std::span<const float> v) { return {v.begin(), v.end()}; }

// Each line: {"image": [..] | "path", "text": [..] | "caption", "split"?: "train"|"val"}.
// Strings are embedded with the configured providers; image paths resolve
// against the pairs file's directory.
PairsFile load_pairs(const fs::path& path, const rag::EngineConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  auto text_embedder = embed::make_embedder(cfg.text_embedder);
  auto image_config = cfg.image_embedder;
  image_config.modality = embed::Modality::Image;
  auto image_embedder = embed::make_embedder(image_config);

  PairsFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      const auto& img = j.at("image");
      const auto& txt = j.at("text");
      std::vector<double> x = img.is_string()
                                  ? to_doubles(image_embedder->embed_image(path.parent_path() / img.get<std::string>()).values())
                                  : img.get<std::vector<double>>();
      std::vector<double> t = txt.is_string() ? to_doubles(text_embedder->embed_text(txt.get<std::string>()).values())
                                              : txt.get<std::vector<double>>();
      auto& dest = j.value("split", "train") == "val" ? out.val : out.train;
      dest.emplace_back(std::move(x), std::move(t));
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidArgument, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.train.empty()) throw Error(Errc::EmptyInput, path.string() + " holds no training pairs");
  return out;
}

int serve(rag::Engine& engine, const server::ServerConfig& cfg, std::ostream& err) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  server::HttpServer http(std::shared_ptr<rag::Engine>(&engine, [](rag::Engine*) {}), cfg);
  const int port = http.bind();
  err << "folio: listening on " << cfg.bind_addr << ":" << port << std::endl;

  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    signalled = true;
    http.stop();
  });
  http.run();
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"folio: multimodal document retrieval and chat"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "JSON config file");
  app.add_option("--data-dir", g.data_dir, "Directory holding corpus, index and projection");
  app.add_option("--seed", g.seed, "Seed for projection init and training");
  app.add_flag("--verbose", g.verbose, "Log the resolved configuration to stderr");

  std::string manifest;
  auto* ingest = app.add_subcommand("ingest", "Ingest a document bundle manifest");
  ingest->add_option("manifest", manifest, "Bundle manifest (JSON lines)")->required();

  auto* reindex = app.add_subcommand("reindex", "Re-project images and rebuild the HNSW graph");

  std::string query_text;
  std::size_t k = 5;
  auto* query = app.add_subcommand("query", "Retrieve the top-k records for a query");
  query->add_option("text", query_text, "Query text")->required();
  query->add_option("-k", k, "Number of hits")->check(CLI::NonNegativeNumber);

  std::string pairs_path;
  std::string model_out;
  std::string curve_out;
  std::string mode = "infonce";
  align::TrainConfig train_cfg;
  bool no_apply = false;
  auto* train = app.add_subcommand("train-projection", "Train the image-to-text projection");
  train->add_option("pairs", pairs_path, "Alignment pairs (JSON lines)")->required();
  train->add_option("--out", model_out, "Also write the trained model here");
  train->add_option("--curve", curve_out, "Curve CSV path (default <data-dir>/curve.csv)");
  train->add_option("--mode", mode, "infonce or least-squares")
      ->check(CLI::IsMember({"infonce", "least-squares"}));
  train->add_option("--epochs", train_cfg.epochs)->check(CLI::PositiveNumber);
  train->add_option("--lr", train_cfg.lr)->check(CLI::PositiveNumber);
  train->add_option("--batch-size", train_cfg.batch_size, "0 for full batch");
  train->add_option("--tau", train_cfg.tau)->check(CLI::PositiveNumber);
  train->add_flag("--no-apply", no_apply, "Do not install the model into the index");

  std::string bench_path;
  std::vector<std::size_t> ks{1, 3, 5};
  bool no_qa = false;
  auto* evalc = app.add_subcommand("eval", "Run a benchmark and print the report");
  evalc->add_option("benchmark", bench_path, "Benchmark (JSON lines)")->required();
  evalc->add_option("--ks", ks, "hit@k cutoffs")->delimiter(',');
  evalc->add_flag("--no-qa", no_qa, "Skip answer generation and scoring");

  std::optional<int> port;
  std::string bind_addr;
  auto* servec = app.add_subcommand("serve", "Run the HTTP server until interrupted");
  servec->add_option("--port", port, "Port (0 picks a free one)");
  servec->add_option("--bind", bind_addr, "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "folio: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    auto cfg = resolve(g, err);
    if (*train && no_apply && model_out.empty()) {
      err << "folio: --no-apply needs --out\n";
      return kExitUsage;
    }
    if (*servec) {
      if (port) cfg.port = *port;
      if (!bind_addr.empty()) cfg.bind_addr = bind_addr;
    }
    rag::Engine engine(cfg.engine);

    if (*ingest) {
      const auto result = engine.ingest(corpus::load_manifest(manifest));
      out << json{{"doc_id", result.doc_id}, {"pages", result.pages}}.dump() << "\n";
    } else if (*reindex) {
      engine.reindex();
      const auto idx = engine.index();
      out << json{{"records", idx->size()}, {"hnsw", idx->has_hnsw()}}.dump() << "\n";
    } else if (*query) {
      for (const auto& h : engine.search(query_text, k)) out << hit_json(h).dump() << "\n";
    } else if (*train) {
      const auto pairs = load_pairs(pairs_path, cfg.engine);
      train_cfg.mode = mode == "infonce" ? align::TrainMode::InfoNCE : align::TrainMode::LeastSquares;
      train_cfg.seed = cfg.engine.seed;
      auto result = align::train_projection(align::AlignmentPairs::from_vectors(pairs.train), train_cfg,
                                            engine.projection(), align::AlignmentPairs::from_vectors(pairs.val));
      const fs::path curve = curve_out.empty() ? cfg.engine.data_dir / "curve.csv" : fs::path(curve_out);
      if (curve.has_parent_path()) fs::create_directories(curve.parent_path());
      eval::emit_curve(result.log, curve);
      if (!model_out.empty()) align::save_model(result.model, model_out);
      if (!no_apply) engine.set_projection(result.model);
      const auto& rows = result.log.rows;
      double final_loss = 0.0;
      for (const auto& r : rows) {
        if (r.split == align::Split::Train) final_loss = r.loss;
      }
      out << json{{"pairs", pairs.train.size()},
                  {"val_pairs", pairs.val.size()},
                  {"epochs", train_cfg.epochs},
                  {"initial_train_loss", result.log.initial_train_loss},
                  {"final_train_loss", final_loss},
                  {"trainable_parameters", result.log.trainable_parameters},
                  {"curve", curve.string()},
                  {"applied", !no_apply}}
                 .dump()
          << "\n";
    } else if (*evalc) {
      const auto items = eval::load_benchmark(bench_path);
      out << eval::to_json(eval::run_eval(engine, items, ks, !no_qa)).dump() << "\n";
    } else if (*servec) {
      return serve(engine, cfg, err);
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& c : msg) {
      if (c == '\n') c = ' ';
    }
    err << "folio: " << msg << "\n";
    return kExitFailure;
  }
}

}  // namespace folio::cli
