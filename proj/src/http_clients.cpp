// HTTP adapters for hosted model, embedding and search providers.

#include <httplib.h>

#include "mentor/content.hpp"
#include "mentor/gateway.hpp"

namespace mentor {

namespace {

struct UrlParts {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Client make_client(const std::string& origin, int timeout_seconds) {
    httplib::Client cli(origin);
    cli.set_connection_timeout(timeout_seconds, 0);
    cli.set_read_timeout(timeout_seconds, 0);
    cli.set_write_timeout(timeout_seconds, 0);
    return cli;
}

[[noreturn]] void unreachable(const std::string& what, const httplib::Result& res) {
    if (!res) throw GatewayError(GatewayError::Kind::BackendUnreachable, what + ": " + httplib::to_string(res.error()));
    throw GatewayError(GatewayError::Kind::BackendUnreachable,
                       what + ": HTTP " + std::to_string(res->status) + " " + res->body.substr(0, 300));
}

json parse_body(const std::string& what, const std::string& body) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw GatewayError(GatewayError::Kind::BackendUnreachable, what + ": malformed response: " + e.what());
    }
}

class HttpChatBackend final : public CompletionBackend {
public:
    explicit HttpChatBackend(HttpBackendOptions o) : o_(std::move(o)) {
        if (o_.base_url.empty()) throw ConfigError("chat backend needs a base_url");
        if (o_.model.empty()) throw ConfigError("chat backend needs a model name");
    }

    std::string complete(const ChatRequest& request) override {
        json messages = json::array();
        for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
        const json body = {{"model", o_.model}, {"messages", messages}, {"temperature", request.temperature}};

        auto cli = make_client(o_.base_url, o_.timeout_seconds);
        httplib::Headers headers;
        if (!o_.api_key.empty()) headers.emplace("Authorization", "Bearer " + o_.api_key);
        auto res = cli.Post(o_.path, headers, body.dump(), "application/json");
        if (!res || res->status != 200) unreachable("chat completion", res);
        auto j = parse_body("chat completion", res->body);
        try {
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw GatewayError(GatewayError::Kind::BackendUnreachable,
                               std::string("chat completion: unexpected response shape: ") + e.what());
        }
    }

private:
    HttpBackendOptions o_;
};

class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(HttpEmbedderOptions o) : o_(std::move(o)) {}

    std::size_t dimension() const override { return o_.dimension; }

    std::vector<float> embed(const std::string& text) override {
        auto cli = make_client(o_.base_url, o_.timeout_seconds);
        httplib::Headers headers;
        if (!o_.api_key.empty()) headers.emplace("Authorization", "Bearer " + o_.api_key);
        const json body = {{"model", o_.model}, {"input", text}};
        auto res = cli.Post(o_.path, headers, body.dump(), "application/json");
        if (!res || res->status != 200) unreachable("embedding", res);
        auto j = parse_body("embedding", res->body);
        auto v = j.at("data").at(0).at("embedding").get<std::vector<float>>();
        if (v.size() != o_.dimension) {
            throw ConfigError("embedding dimension " + std::to_string(v.size()) + " != configured " +
                              std::to_string(o_.dimension));
        }
        return v;
    }

private:
    HttpEmbedderOptions o_;
};

class HttpSearch final : public SearchProvider {
public:
    explicit HttpSearch(HttpSearchOptions o) : o_(std::move(o)), url_(split_url(o_.endpoint)) {}

    std::vector<SearchResult> search(const std::string& query, int k) override {
        auto cli = make_client(url_.origin, o_.timeout_seconds);
        httplib::Headers headers;
        if (!o_.api_key.empty()) headers.emplace("Ocp-Apim-Subscription-Key", o_.api_key);
        httplib::Params params{{"q", query}, {"count", std::to_string(k)}};
        auto res = cli.Get(url_.path, params, headers);
        if (!res || res->status != 200) unreachable("web search", res);
        auto j = parse_body("web search", res->body);
        std::vector<SearchResult> out;
        const auto now = now_ms();
        if (!j.contains("webPages")) return out;
        for (const auto& item : j["webPages"].value("value", json::array())) {
            if (static_cast<int>(out.size()) == k) break;
            out.push_back(SearchResult{query, item.value("url", ""), item.value("name", ""),
                                       item.value("snippet", ""), now});
        }
        return out;
    }

private:
    HttpSearchOptions o_;
    UrlParts url_;
};

}  // namespace

std::shared_ptr<CompletionBackend> make_http_chat_backend(HttpBackendOptions options) {
    return std::make_shared<HttpChatBackend>(std::move(options));
}

std::shared_ptr<Embedder> make_http_embedder(HttpEmbedderOptions options) {
    return std::make_shared<HttpEmbedder>(std::move(options));
}

std::shared_ptr<SearchProvider> make_http_search(HttpSearchOptions options) {
    return std::make_shared<HttpSearch>(std::move(options));
}

}  // namespace mentor
