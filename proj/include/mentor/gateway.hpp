#pragma once

// Single choke point for model calls. Agents build a ModelRequest and call
// Gateway::complete; the gateway routes by agent role to a registered
// backend, echoes the output schema into the prompt, and runs the
// validate-and-repair loop.

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mentor/errors.hpp"

namespace mentor {

using json = nlohmann::json;

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

// What a backend sees for one attempt. Every call is stateless: the full
// context travels in `messages`.
struct ChatRequest {
    std::string role_name;
    std::vector<ChatMessage> messages;
    double temperature = 0.7;
};

// A completion provider. Implementations throw GatewayError with
// Kind::BackendUnreachable when the provider cannot be reached.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

// Semantic post-check run after the schema passes. Returned messages are fed
// back to the model in the repair prompt.
using OutputCheck = std::function<std::vector<std::string>(const json& parsed)>;

struct ModelRequest {
    std::string role_name;
    std::string system_prompt;
    std::string user_prompt;
    json output_schema;
    std::optional<double> temperature;  // gateway default when unset
    std::optional<int> max_retries;     // gateway default when unset
    OutputCheck check;
};

struct ModelResponse {
    std::string raw_text;
    json parsed;
    int attempts = 1;
    std::string backend_id;
};

struct GatewaySettings {
    double temperature = 0.7;
    int max_retries = 2;
};

class Gateway {
public:
    explicit Gateway(GatewaySettings settings = {});

    const GatewaySettings& settings() const noexcept { return settings_; }

    // Throws ConfigError on a duplicate id.
    void register_backend(const std::string& backend_id, std::shared_ptr<CompletionBackend> backend);
    // Route an agent role to a registered backend. Unknown backend ids are a
    // ConfigError.
    void route(const std::string& role_name, const std::string& backend_id);
    void set_default_backend(const std::string& backend_id);
    bool has_backend(const std::string& backend_id) const;

    // Backend id that would serve `role_name`; throws GatewayError
    // (Kind::Configuration) when the role is unrouted and no default exists.
    std::string resolve(const std::string& role_name) const;

    ModelResponse complete(const ModelRequest& request) const;

private:
    GatewaySettings settings_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<CompletionBackend>> backends_;
    std::map<std::string, std::string> routes_;
    std::optional<std::string> default_backend_;
};

// Extracts a JSON value from model text: tolerates surrounding prose and
// ``` fences. Returns nullopt when nothing parses.
std::optional<json> extract_json(const std::string& text);

// ---------------------------------------------------------------------------
// Deterministic test backend.
//
// Replies come from per-role FIFO scripts; when a role's script is empty the
// optional fallback responder is asked. With no fallback the backend reports
// itself unreachable. The reply is a pure function of (role, prompts, script
// state), and the script cursor is guarded by a mutex.

class ScriptedBackend : public CompletionBackend {
public:
    using Responder = std::function<std::string(const ChatRequest&)>;

    ScriptedBackend() = default;
    explicit ScriptedBackend(Responder fallback) : fallback_(std::move(fallback)) {}

    void enqueue(const std::string& role_name, std::string reply);
    void enqueue(const std::string& role_name, const json& reply) { enqueue(role_name, reply.dump()); }
    // Next call for the role fails as if the provider were down.
    void enqueue_unreachable(const std::string& role_name);
    void set_fallback(Responder fallback);

    std::string complete(const ChatRequest& request) override;

    std::size_t call_count() const;
    std::size_t call_count(const std::string& role_name) const;
    std::vector<ChatRequest> requests() const;

private:
    struct Reply {
        std::string text;
        bool unreachable = false;
    };

    mutable std::mutex mutex_;
    std::map<std::string, std::deque<Reply>> scripts_;
    Responder fallback_;
    std::vector<ChatRequest> log_;
};

// OpenAI-compatible chat-completions adapter over HTTP(S).
struct HttpBackendOptions {
    std::string base_url;  // e.g. "https://api.openai.com"
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;
    int timeout_seconds = 120;
};

std::shared_ptr<CompletionBackend> make_http_chat_backend(HttpBackendOptions options);

}  // namespace mentor
