#include "mentor/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "mentor/mock_agents.hpp"

namespace mentor {

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, _] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end()) {
            throw ConfigError("unknown config key '" + where + "." + k + "'");
        }
    }
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j[key].get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

}  // namespace

AppConfig config_from_json(const json& j, AppConfig c) {
    only_keys(j, "config", {"storage_dir", "gateway", "backends", "routes", "default_backend", "thresholds",
                            "budgets", "search", "embedding", "server"});
    if (j.contains("storage_dir")) c.storage_dir = j["storage_dir"].get<std::string>();
    if (j.contains("gateway")) {
        only_keys(j["gateway"], "gateway", {"temperature", "max_retries"});
        read(j["gateway"], "temperature", c.gateway.temperature);
        read(j["gateway"], "max_retries", c.gateway.max_retries);
    }
    if (j.contains("backends")) {
        c.backends.clear();
        for (const auto& b : j["backends"]) {
            only_keys(b, "backends[]", {"id", "kind", "base_url", "model", "api_key_env", "timeout_seconds"});
            BackendConfig bc;
            read(b, "id", bc.id);
            read(b, "kind", bc.kind);
            read(b, "base_url", bc.base_url);
            read(b, "model", bc.model);
            read(b, "api_key_env", bc.api_key_env);
            read(b, "timeout_seconds", bc.timeout_seconds);
            if (bc.id.empty()) throw ConfigError("every backend needs an id");
            c.backends.push_back(std::move(bc));
        }
    }
    read(j, "routes", c.routes);
    read(j, "default_backend", c.default_backend);
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        only_keys(t, "thresholds", {"mastery", "struggling_score", "low_usage_per_week", "long_session_minutes",
                                    "progress_step", "max_weight_shift"});
        auto& p = c.service.profiler;
        read(t, "mastery", p.mastery_threshold);
        read(t, "struggling_score", p.struggling_score);
        read(t, "low_usage_per_week", p.low_usage_per_week);
        read(t, "long_session_minutes", p.long_session_minutes);
        read(t, "progress_step", p.progress_step);
        read(t, "max_weight_shift", p.max_weight_shift);
    }
    if (j.contains("budgets")) {
        const auto& b = j["budgets"];
        only_keys(b, "budgets", {"path_refinement", "content_refinement", "max_sessions", "quiz_size",
                                 "search_results", "chunk_size", "chunk_overlap", "retrieval_top_k"});
        read(b, "path_refinement", c.service.scheduler.refinement_budget);
        read(b, "max_sessions", c.service.scheduler.max_sessions);
        read(b, "content_refinement", c.service.content.refinement_budget);
        read(b, "quiz_size", c.service.content.quiz_size);
        read(b, "search_results", c.service.content.search_results);
        read(b, "chunk_size", c.service.content.chunk_size);
        read(b, "chunk_overlap", c.service.content.chunk_overlap);
        read(b, "retrieval_top_k", c.service.content.retrieval_top_k);
    }
    if (j.contains("search")) {
        only_keys(j["search"], "search", {"kind", "fixtures", "endpoint", "api_key_env"});
        read(j["search"], "kind", c.search.kind);
        read(j["search"], "fixtures", c.search.fixtures);
        read(j["search"], "endpoint", c.search.endpoint);
        read(j["search"], "api_key_env", c.search.api_key_env);
    }
    if (j.contains("embedding")) {
        only_keys(j["embedding"], "embedding", {"kind", "dimension", "base_url", "model", "api_key_env"});
        read(j["embedding"], "kind", c.embedding.kind);
        if (j["embedding"].contains("dimension")) c.embedding.dimension = j["embedding"]["dimension"].get<std::size_t>();
        read(j["embedding"], "base_url", c.embedding.base_url);
        read(j["embedding"], "model", c.embedding.model);
        read(j["embedding"], "api_key_env", c.embedding.api_key_env);
    }
    if (j.contains("server")) {
        only_keys(j["server"], "server", {"host", "port", "bearer_token"});
        read(j["server"], "host", c.server.host);
        read(j["server"], "port", c.server.port);
        read(j["server"], "bearer_token", c.server.bearer_token);
    }
    return c;
}

AppConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
    AppConfig c;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw ConfigError("cannot open config file " + file->string());
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(file->string() + ": " + e.what());
        }
        c = config_from_json(j, c);
    }
    auto num = [](const std::string& name, const std::string& v) {
        try {
            std::size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError(name + " is not a number: " + v);
        }
    };
    if (auto v = env("MENTOR_STORAGE_DIR")) c.storage_dir = *v;
    if (auto v = env("MENTOR_DEFAULT_BACKEND")) c.default_backend = *v;
    if (auto v = env("MENTOR_HOST")) c.server.host = *v;
    if (auto v = env("MENTOR_PORT")) c.server.port = static_cast<int>(num("MENTOR_PORT", *v));
    if (auto v = env("MENTOR_API_TOKEN")) c.server.bearer_token = *v;
    if (auto v = env("MENTOR_SEARCH")) c.search.kind = *v;
    if (auto v = env("MENTOR_TEMPERATURE")) c.gateway.temperature = num("MENTOR_TEMPERATURE", *v);
    if (auto v = env("MENTOR_MAX_RETRIES")) c.gateway.max_retries = static_cast<int>(num("MENTOR_MAX_RETRIES", *v));
    return c;
}

void configure_gateway(const AppConfig& config, Gateway& gateway, const EnvLookup& env) {
    for (const auto& b : config.backends) {
        if (b.kind == "heuristic") {
            gateway.register_backend(b.id, std::make_shared<HeuristicBackend>());
        } else if (b.kind == "openai") {
            HttpBackendOptions o;
            o.base_url = b.base_url.empty() ? "https://api.openai.com" : b.base_url;
            o.model = b.model;
            o.api_key = env(b.api_key_env).value_or("");
            o.timeout_seconds = b.timeout_seconds;
            gateway.register_backend(b.id, make_http_chat_backend(o));
        } else {
            throw ConfigError("unknown backend kind '" + b.kind + "' for " + b.id);
        }
    }
    for (const auto& [role, id] : config.routes) gateway.route(role, id);
    if (!config.default_backend.empty()) gateway.set_default_backend(config.default_backend);
}

std::shared_ptr<SearchProvider> make_search(const AppConfig& config, const EnvLookup& env) {
    const auto& s = config.search;
    if (s.kind == "none") return nullptr;
    if (s.kind == "synthetic") return std::make_shared<SyntheticSearch>();
    if (s.kind == "fixtures") return FixtureSearch::from_file(s.fixtures);
    if (s.kind == "http") {
        HttpSearchOptions o;
        o.endpoint = s.endpoint;
        o.api_key = env(s.api_key_env).value_or("");
        return make_http_search(o);
    }
    throw ConfigError("unknown search kind '" + s.kind + "'");
}

std::shared_ptr<Embedder> make_embedder(const AppConfig& config, const EnvLookup& env) {
    const auto& e = config.embedding;
    if (e.kind == "hash") return std::make_shared<HashEmbedder>(e.dimension.value_or(256));
    if (e.kind == "openai") {
        HttpEmbedderOptions o;
        o.base_url = e.base_url;
        o.model = e.model;
        o.api_key = env(e.api_key_env).value_or("");
        o.dimension = e.dimension.value_or(1536);
        return make_http_embedder(o);
    }
    throw ConfigError("unknown embedding kind '" + e.kind + "'");
}

}  // namespace mentor
