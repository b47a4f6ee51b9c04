#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "folio/rag/engine.hpp"

namespace folio::server {

// Engine defaults for a served or CLI-driven deployment: persists under ./folio-data.
rag::EngineConfig default_engine_config();

struct ServerConfig {
  std::string bind_addr = "127.0.0.1";
  int port = 8080;
  std::size_t threads = 8;
  rag::EngineConfig engine = default_engine_config();
};

// Every key with its default value; the shape accepted by config_from_json.
nlohmann::json default_config_json();
nlohmann::json to_json(const ServerConfig& cfg);

// Missing keys keep their defaults; unknown keys and wrong types throw
// InvalidArgument naming the key path.
ServerConfig config_from_json(const nlohmann::json& j);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

// Each leaf key path maps to FOLIO_<PATH> with dots turned into underscores and
// letters upper-cased, e.g. embedder.text.endpoint -> FOLIO_EMBEDDER_TEXT_ENDPOINT.
std::string env_var_name(const std::string& dotted_path);

// Overlays environment values onto j, parsed according to the type of the
// default at that path. Throws InvalidArgument on unparsable values.
nlohmann::json apply_env_overrides(nlohmann::json j, const EnvLookup& env);

// defaults < file < environment. A missing file path means defaults + env.
// Throws Io for an unreadable file and InvalidArgument for bad content.
nlohmann::json resolve_config_json(const std::optional<std::filesystem::path>& file, const EnvLookup& env);
ServerConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

}  // namespace folio::server
