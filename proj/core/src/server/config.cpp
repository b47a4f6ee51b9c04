#include "folio/server/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "folio/error.hpp"

namespace folio::server {

using nlohmann::json;

namespace {

json embedder_json(const embed::EmbedderConfig& e) {
  return {{"provider", e.provider_kind == embed::ProviderKind::Stub ? "stub" : "remote"},
          {"endpoint", e.endpoint ? json(*e.endpoint) : json(nullptr)},
          {"dim", e.dim},
          {"timeout_ms", e.timeout_ms},
          {"stub_seed", e.stub_seed},
          {"max_in_flight", e.max_in_flight},
          {"batch_size", e.batch_size}};
}

std::optional<std::string> opt_endpoint(const json& j) {
  if (j.is_null()) return std::nullopt;
  auto s = j.get<std::string>();
  if (s.empty()) return std::nullopt;
  return s;
}

embed::EmbedderConfig embedder_from(const json& j, embed::Modality modality) {
  embed::EmbedderConfig e;
  e.modality = modality;
  const auto provider = j.at("provider").get<std::string>();
  if (provider == "stub") {
    e.provider_kind = embed::ProviderKind::Stub;
  } else if (provider == "remote") {
    e.provider_kind = embed::ProviderKind::RemoteHttp;
  } else {
    throw Error(Errc::InvalidArgument, "embedder provider must be 'stub' or 'remote', got '" + provider + "'");
  }
  e.endpoint = opt_endpoint(j.at("endpoint"));
  e.dim = j.at("dim").get<std::size_t>();
  e.timeout_ms = j.at("timeout_ms").get<int>();
  e.stub_seed = j.at("stub_seed").get<std::uint64_t>();
  e.max_in_flight = j.at("max_in_flight").get<std::size_t>();
  e.batch_size = j.at("batch_size").get<std::size_t>();
  return e;
}

// Recursively overlays `over` onto `base`, rejecting keys absent from base and
// values whose JSON type disagrees with the default.
void merge_into(json& base, const json& over, const std::string& path) {
  if (!over.is_object()) throw Error(Errc::InvalidArgument, "config " + (path.empty() ? "root" : path) + " must be an object");
  for (const auto& [key, value] : over.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw Error(Errc::InvalidArgument, "unknown config key '" + here + "'");
    json& slot = base[key];
    if (slot.is_object()) {
      merge_into(slot, value, here);
      continue;
    }
    const bool ok = slot.is_null() ? (value.is_null() || value.is_string())
                    : slot.is_number() ? value.is_number()
                    : slot.type() == value.type() || (slot.is_string() && value.is_null());
    if (!ok) throw Error(Errc::InvalidArgument, "config key '" + here + "' has the wrong type");
    if (slot.is_number_unsigned() && value.is_number_integer() && value.get<std::int64_t>() < 0) {
      throw Error(Errc::InvalidArgument, "config key '" + here + "' must not be negative");
    }
    slot = value;
  }
}

void overlay_env(json& node, const json& defaults, const std::string& path, const EnvLookup& env) {
  for (auto& [key, value] : node.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (value.is_object()) {
      overlay_env(value, defaults.at(key), here, env);
      continue;
    }
    const auto name = env_var_name(here);
    const auto raw = env(name);
    if (!raw) continue;
    const json& d = defaults.at(key);
    try {
      if (d.is_boolean()) {
        if (*raw == "1" || *raw == "true") value = true;
        else if (*raw == "0" || *raw == "false") value = false;
        else throw std::invalid_argument("expected true/false");
      } else if (d.is_number_unsigned()) {
        if (raw->empty() || raw->front() == '-') throw std::invalid_argument("expected a non-negative integer");
        std::size_t used = 0;
        value = std::stoull(*raw, &used);
        if (used != raw->size()) throw std::invalid_argument("trailing characters");
      } else if (d.is_number_integer()) {
        std::size_t used = 0;
        value = std::stoll(*raw, &used);
        if (used != raw->size()) throw std::invalid_argument("trailing characters");
      } else if (d.is_number_float()) {
        std::size_t used = 0;
        value = std::stod(*raw, &used);
        if (used != raw->size()) throw std::invalid_argument("trailing characters");
      } else {
        value = *raw;
      }
    } catch (const std::exception& e) {
      throw Error(Errc::InvalidArgument, name + "='" + *raw + "' is not valid: " + e.what());
    }
  }
}

}  // namespace

rag::EngineConfig default_engine_config() {
  rag::EngineConfig e;
  e.data_dir = "folio-data";
  return e;
}

json default_config_json() { return to_json(ServerConfig{}); }

json to_json(const ServerConfig& cfg) {
  const auto& e = cfg.engine;
  return {
      {"bind_addr", cfg.bind_addr},
      {"port", cfg.port},
      {"threads", cfg.threads},
      {"data_dir", e.data_dir.string()},
      {"seed", e.seed},
      {"require_images", e.require_images},
      {"projection_rank", e.projection_rank},
      {"embedder", {{"text", embedder_json(e.text_embedder)}, {"image", embedder_json(e.image_embedder)}}},
      {"generator",
       {{"kind", e.generator.kind == rag::GeneratorKind::DeterministicStub ? "stub" : "remote"},
        {"endpoint", e.generator.endpoint ? json(*e.generator.endpoint) : json(nullptr)},
        {"timeout_ms", e.generator.timeout_ms},
        {"max_output_units", e.generator.max_output_units}}},
      {"retrieval",
       {{"k_text", e.retrieval.k_text},
        {"k_image", e.retrieval.k_image},
        {"history_turns", e.retrieval.history_turns},
        {"budget_units", e.retrieval.budget_units},
        {"image_base_url", e.retrieval.image_base_url}}},
      {"hnsw",
       {{"M", e.hnsw.M},
        {"ef_construction", e.hnsw.ef_construction},
        {"ef_search", e.hnsw.ef_search},
        {"seed", e.hnsw.seed},
        {"auto_build_threshold", e.hnsw_auto_threshold}}},
      {"chunking", {{"max_units", e.chunking.max_units}, {"overlap_units", e.chunking.overlap}}},
  };
}

ServerConfig config_from_json(const json& input) {
  json j = default_config_json();
  merge_into(j, input, "");
  ServerConfig cfg;
  try {
    cfg.bind_addr = j.at("bind_addr").get<std::string>();
    cfg.port = j.at("port").get<int>();
    cfg.threads = j.at("threads").get<std::size_t>();
    auto& e = cfg.engine;
    e.data_dir = j.at("data_dir").get<std::string>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.require_images = j.at("require_images").get<bool>();
    e.projection_rank = j.at("projection_rank").get<std::size_t>();
    e.text_embedder = embedder_from(j.at("embedder").at("text"), embed::Modality::Text);
    e.image_embedder = embedder_from(j.at("embedder").at("image"), embed::Modality::Image);

    const auto& g = j.at("generator");
    const auto kind = g.at("kind").get<std::string>();
    if (kind == "stub") {
      e.generator.kind = rag::GeneratorKind::DeterministicStub;
    } else if (kind == "remote") {
      e.generator.kind = rag::GeneratorKind::RemoteHttp;
    } else {
      throw Error(Errc::InvalidArgument, "generator kind must be 'stub' or 'remote', got '" + kind + "'");
    }
    e.generator.endpoint = opt_endpoint(g.at("endpoint"));
    e.generator.timeout_ms = g.at("timeout_ms").get<int>();
    e.generator.max_output_units = g.at("max_output_units").get<std::size_t>();

    const auto& r = j.at("retrieval");
    e.retrieval.k_text = r.at("k_text").get<std::size_t>();
    e.retrieval.k_image = r.at("k_image").get<std::size_t>();
    e.retrieval.history_turns = r.at("history_turns").get<std::size_t>();
    e.retrieval.budget_units = r.at("budget_units").get<std::size_t>();
    e.retrieval.image_base_url = r.at("image_base_url").get<std::string>();

    const auto& h = j.at("hnsw");
    e.hnsw.M = h.at("M").get<std::size_t>();
    e.hnsw.ef_construction = h.at("ef_construction").get<std::size_t>();
    e.hnsw.ef_search = h.at("ef_search").get<std::size_t>();
    e.hnsw.seed = h.at("seed").get<std::uint64_t>();
    e.hnsw_auto_threshold = h.at("auto_build_threshold").get<std::size_t>();

    e.chunking.max_units = j.at("chunking").at("max_units").get<std::size_t>();
    e.chunking.overlap = j.at("chunking").at("overlap_units").get<std::size_t>();
  } catch (const json::exception& ex) {
    throw Error(Errc::InvalidArgument, std::string("invalid config: ") + ex.what());
  }
  if (cfg.port < 0 || cfg.port > 65535) throw Error(Errc::InvalidArgument, "port out of range");
  if (cfg.threads == 0) throw Error(Errc::InvalidArgument, "threads must be positive");
  embed::validate(cfg.engine.text_embedder);
  embed::validate(cfg.engine.image_embedder);
  rag::validate(cfg.engine.generator);
  index::validate(cfg.engine.hnsw);
  return cfg;
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

std::string env_var_name(const std::string& dotted_path) {
  std::string out = "FOLIO_";
  for (char c : dotted_path) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

json apply_env_overrides(json j, const EnvLookup& env) {
  overlay_env(j, default_config_json(), "", env);
  return j;
}

json resolve_config_json(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  json j = default_config_json();
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open config file " + file->string());
    std::ostringstream ss;
    ss << in.rdbuf();
    json parsed;
    try {
      parsed = json::parse(ss.str());
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidArgument, "config file " + file->string() + " is not valid JSON: " + e.what());
    }
    merge_into(j, parsed, "");
  }
  return apply_env_overrides(std::move(j), env);
}

ServerConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  return config_from_json(resolve_config_json(file, env));
}

}  // namespace folio::server
