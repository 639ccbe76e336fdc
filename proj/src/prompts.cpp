#include "mentor/prompts.hpp"

#include <map>

#include "prompt_assets.hpp"  // generated: kPromptAssets

namespace mentor {

namespace {

constexpr std::string_view kSeparator = "---- user ----";
constexpr std::string_view kOpen = "<input>\n";
constexpr std::string_view kClose = "\n</input>";

std::string trim_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == '\n' || s[i] == '\r')) ++i;
    return s.substr(i);
}

const std::map<std::string, PromptTemplate, std::less<>>& registry() {
    static const auto templates = [] {
        std::map<std::string, PromptTemplate, std::less<>> out;
        for (const auto& asset : kPromptAssets) {
            std::string text(asset.text);
            PromptTemplate t;
            t.name = asset.name;
            t.version = asset.version;
            auto sep = text.find(kSeparator);
            if (sep == std::string::npos) {
                t.system = trim_newlines(text);
                t.user = "{{input}}";
            } else {
                t.system = trim_newlines(text.substr(0, sep));
                t.user = trim_newlines(text.substr(sep + kSeparator.size()));
            }
            auto it = out.find(t.name);
            if (it == out.end() || it->second.version < t.version) out[t.name] = std::move(t);
        }
        return out;
    }();
    return templates;
}

}  // namespace

const PromptTemplate& prompt_template(std::string_view name) {
    const auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end()) throw ConfigError("unknown prompt template: " + std::string(name));
    return it->second;
}

std::vector<std::string> prompt_template_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : registry()) out.push_back(name);
    return out;
}

ModelRequest make_model_request(const std::string& role_name, const std::string& template_name,
                                json input, json output_schema, OutputCheck check) {
    const auto& t = prompt_template(template_name);
    input["task"] = template_name;
    std::string block = std::string(kOpen) + input.dump(2) + std::string(kClose);

    std::string user = t.user;
    if (auto pos = user.find("{{input}}"); pos != std::string::npos) {
        user.replace(pos, 9, block);
    } else {
        user += "\n\n" + block;
    }
    ModelRequest req;
    req.role_name = role_name;
    req.system_prompt = t.system;
    req.user_prompt = std::move(user);
    req.output_schema = std::move(output_schema);
    req.check = std::move(check);
    return req;
}

std::optional<json> prompt_input(const ChatRequest& request) {
    for (const auto& m : request.messages) {
        if (m.role != "user") continue;
        auto a = m.content.find(kOpen);
        auto b = m.content.rfind(kClose);
        if (a == std::string::npos || b == std::string::npos || b < a) return std::nullopt;
        a += kOpen.size();
        auto j = json::parse(m.content.substr(a, b - a), nullptr, false);
        if (j.is_discarded()) return std::nullopt;
        return j;
    }
    return std::nullopt;
}

}  // namespace mentor
