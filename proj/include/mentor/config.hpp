#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mentor/content.hpp"
#include "mentor/gateway.hpp"
#include "mentor/service.hpp"

namespace mentor {

struct BackendConfig {
    std::string id;
    std::string kind = "heuristic";  // heuristic | openai
    std::string base_url;
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_seconds = 120;
};

struct SearchConfig {
    std::string kind = "synthetic";  // none | synthetic | fixtures | http
    std::string fixtures;
    std::string endpoint = "https://api.bing.microsoft.com/v7.0/search";
    std::string api_key_env = "MENTOR_SEARCH_API_KEY";
};

struct EmbeddingConfig {
    std::string kind = "hash";  // hash | openai
    std::optional<std::size_t> dimension;  // 256 for hash, 1536 for openai
    std::string base_url = "https://api.openai.com";
    std::string model = "text-embedding-3-small";
    std::string api_key_env = "OPENAI_API_KEY";
};

struct AppConfig {
    std::filesystem::path storage_dir = "mentor-data";
    GatewaySettings gateway;
    std::vector<BackendConfig> backends{BackendConfig{"mock"}};
    std::map<std::string, std::string> routes;
    std::string default_backend = "mock";
    ServiceSettings service;
    SearchConfig search;
    EmbeddingConfig embedding;
    ServerOptions server;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

// Defaults, then the JSON file (if any), then environment overrides:
//   MENTOR_STORAGE_DIR, MENTOR_DEFAULT_BACKEND, MENTOR_HOST, MENTOR_PORT,
//   MENTOR_API_TOKEN, MENTOR_SEARCH, MENTOR_TEMPERATURE, MENTOR_MAX_RETRIES.
// Unknown keys in the file are rejected.
AppConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);
AppConfig config_from_json(const json& j, AppConfig base = {});

// Registers every configured backend and route.
void configure_gateway(const AppConfig& config, Gateway& gateway, const EnvLookup& env = process_env);
std::shared_ptr<SearchProvider> make_search(const AppConfig& config, const EnvLookup& env = process_env);
std::shared_ptr<Embedder> make_embedder(const AppConfig& config, const EnvLookup& env = process_env);

}  // namespace mentor
