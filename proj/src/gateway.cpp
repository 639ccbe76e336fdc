#include "mentor/gateway.hpp"

#include "mentor/schema.hpp"

namespace mentor {

namespace {

std::string join_lines(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        out += "- ";
        out += s;
        out += '\n';
    }
    return out;
}

std::string schema_echo(const json& schema) {
    return "\n\nRespond with a single JSON value and nothing else. It must conform to this schema:\n" +
           schema.dump(2);
}

}  // namespace

Gateway::Gateway(GatewaySettings settings) : settings_(settings) {}

void Gateway::register_backend(const std::string& backend_id, std::shared_ptr<CompletionBackend> backend) {
    if (backend_id.empty() || !backend) throw ConfigError("backend id and provider are required");
    std::unique_lock lock(mutex_);
    if (!backends_.emplace(backend_id, std::move(backend)).second) {
        throw ConfigError("backend already registered: " + backend_id);
    }
}

void Gateway::route(const std::string& role_name, const std::string& backend_id) {
    std::unique_lock lock(mutex_);
    if (!backends_.contains(backend_id)) throw ConfigError("route to unknown backend: " + backend_id);
    routes_[role_name] = backend_id;
}

void Gateway::set_default_backend(const std::string& backend_id) {
    std::unique_lock lock(mutex_);
    if (!backends_.contains(backend_id)) throw ConfigError("default backend not registered: " + backend_id);
    default_backend_ = backend_id;
}

bool Gateway::has_backend(const std::string& backend_id) const {
    std::shared_lock lock(mutex_);
    return backends_.contains(backend_id);
}

std::string Gateway::resolve(const std::string& role_name) const {
    std::shared_lock lock(mutex_);
    if (auto it = routes_.find(role_name); it != routes_.end()) return it->second;
    if (default_backend_) return *default_backend_;
    throw GatewayError(GatewayError::Kind::Configuration, "no backend for role '" + role_name + "'");
}

ModelResponse Gateway::complete(const ModelRequest& request) const {
    if (request.output_schema.is_null() || request.output_schema.empty()) {
        throw ConfigError("structured call for role '" + request.role_name + "' has no output schema");
    }
    const std::string backend_id = resolve(request.role_name);
    std::shared_ptr<CompletionBackend> backend;
    {
        std::shared_lock lock(mutex_);
        backend = backends_.at(backend_id);
    }

    const int max_retries = request.max_retries.value_or(settings_.max_retries);
    ChatRequest chat;
    chat.role_name = request.role_name;
    chat.temperature = request.temperature.value_or(settings_.temperature);
    chat.messages.push_back({"system", request.system_prompt + schema_echo(request.output_schema)});
    chat.messages.push_back({"user", request.user_prompt});

    std::string raw;
    std::vector<std::string> problems;
    for (int attempt = 1; attempt <= max_retries + 1; ++attempt) {
        try {
            raw = backend->complete(chat);
        } catch (const GatewayError& e) {
            throw GatewayError(GatewayError::Kind::BackendUnreachable,
                               "backend '" + backend_id + "' unreachable: " + e.what(), raw);
        }

        problems.clear();
        auto parsed = extract_json(raw);
        if (!parsed) {
            problems.push_back("reply is not valid JSON");
        } else {
            problems = schema_violations(*parsed, request.output_schema);
            if (problems.empty() && request.check) {
                try {
                    problems = request.check(*parsed);
                } catch (const std::exception& e) {
                    problems.push_back(e.what());
                }
            }
        }
        if (problems.empty()) return ModelResponse{raw, std::move(*parsed), attempt, backend_id};

        chat.messages.push_back({"assistant", raw});
        chat.messages.push_back({"user", "Your previous reply was rejected:\n" + join_lines(problems) +
                                             "Reply again with only the corrected JSON."});
    }
    throw GatewayError(GatewayError::Kind::SchemaViolation,
                       "role '" + request.role_name + "': output invalid after " +
                           std::to_string(max_retries + 1) + " attempt(s): " + problems.front(),
                       raw);
}

std::optional<json> extract_json(const std::string& text) {
    auto try_parse = [](const std::string& s) -> std::optional<json> {
        auto j = json::parse(s, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded()) return std::nullopt;
        return j;
    };
    if (auto j = try_parse(text)) return j;

    std::string body = text;
    if (auto fence = body.find("```"); fence != std::string::npos) {
        auto start = body.find('\n', fence);
        auto end = body.find("```", fence + 3);
        if (start != std::string::npos && end != std::string::npos && end > start) {
            if (auto j = try_parse(body.substr(start + 1, end - start - 1))) return j;
        }
    }
    for (auto [open, close] : {std::pair{'{', '}'}, std::pair{'[', ']'}}) {
        auto a = body.find(open);
        auto b = body.rfind(close);
        if (a != std::string::npos && b != std::string::npos && b > a) {
            if (auto j = try_parse(body.substr(a, b - a + 1))) return j;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

void ScriptedBackend::enqueue(const std::string& role_name, std::string reply) {
    std::lock_guard lock(mutex_);
    scripts_[role_name].push_back(Reply{std::move(reply), false});
}

void ScriptedBackend::enqueue_unreachable(const std::string& role_name) {
    std::lock_guard lock(mutex_);
    scripts_[role_name].push_back(Reply{{}, true});
}

void ScriptedBackend::set_fallback(Responder fallback) {
    std::lock_guard lock(mutex_);
    fallback_ = std::move(fallback);
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
    Responder fallback;
    {
        std::lock_guard lock(mutex_);
        log_.push_back(request);
        auto& q = scripts_[request.role_name];
        if (!q.empty()) {
            Reply r = std::move(q.front());
            q.pop_front();
            if (r.unreachable) {
                throw GatewayError(GatewayError::Kind::BackendUnreachable, "scripted outage");
            }
            return r.text;
        }
        fallback = fallback_;
    }
    if (!fallback) {
        throw GatewayError(GatewayError::Kind::BackendUnreachable,
                           "script exhausted for role '" + request.role_name + "'");
    }
    return fallback(request);
}

std::size_t ScriptedBackend::call_count() const {
    std::lock_guard lock(mutex_);
    return log_.size();
}

std::size_t ScriptedBackend::call_count(const std::string& role_name) const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& r : log_) n += (r.role_name == role_name);
    return n;
}

std::vector<ChatRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mutex_);
    return log_;
}

}  // namespace mentor
