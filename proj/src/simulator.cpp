#include "mentor/simulator.hpp"

#include <algorithm>

#include "mentor/prompts.hpp"

namespace mentor {

bool SimulatedFeedback::satisfied() const {
    return std::all_of(scores.begin(), scores.end(), [](const auto& kv) { return kv.second >= 4; });
}

void to_json(json& j, const RequestedChange& v) { j = json{{"locator", v.locator}, {"request", v.request}}; }
void from_json(const json& j, RequestedChange& v) {
    v.locator = j.at("locator").get<std::string>();
    v.request = j.value("request", "");
}

void to_json(json& j, const SimulatedFeedback& v) {
    j = json{{"target_kind", v.target_kind}, {"scores", v.scores}, {"requested_changes", v.requested_changes}};
}
void from_json(const json& j, SimulatedFeedback& v) {
    const auto kind = j.at("target_kind").get<std::string>();
    if (kind != "path" && kind != "content") throw ValidationError("unknown feedback target: " + kind);
    v.target_kind = kind == "path" ? FeedbackTarget::Path : FeedbackTarget::Content;
    v.scores = j.at("scores").get<std::map<std::string, int>>();
    v.requested_changes = j.value("requested_changes", std::vector<RequestedChange>{});
}

const std::vector<std::string>& path_criteria() {
    static const std::vector<std::string> c = {"efficiency", "engagement", "difficulty_fit"};
    return c;
}

const std::vector<std::string>& content_criteria() {
    static const std::vector<std::string> c = {"clarity", "relevance", "difficulty_fit"};
    return c;
}

namespace {

std::vector<std::string> feedback_problems(const SimulatedFeedback& fb, FeedbackTarget expected,
                                           const std::vector<std::string>& criteria,
                                           const std::set<std::string>& locators) {
    std::vector<std::string> out;
    if (fb.target_kind != expected) out.push_back("feedback targets the wrong artifact kind");
    for (const auto& c : criteria) {
        auto it = fb.scores.find(c);
        if (it == fb.scores.end()) {
            out.push_back("missing score for '" + c + "'");
        } else if (it->second < 1 || it->second > 5) {
            out.push_back("score for '" + c + "' outside 1-5");
        }
    }
    for (const auto& ch : fb.requested_changes) {
        if (!locators.contains(ch.locator)) out.push_back("locator '" + ch.locator + "' does not exist");
    }
    return out;
}

std::set<std::string> session_ids(const LearningPath& path) {
    std::set<std::string> out;
    for (const auto& s : path.sessions) out.insert(s.id);
    return out;
}

std::set<std::string> section_titles(const SessionContent& content) {
    std::set<std::string> out;
    for (const auto& s : content.outline) out.insert(s.title);
    return out;
}

json feedback_schema(const std::vector<std::string>& criteria) {
    json score = {{"type", "integer"}, {"minimum", 1}, {"maximum", 5}};
    json props = json::object();
    for (const auto& c : criteria) props[c] = score;
    return {
        {"type", "object"},
        {"required", {"scores", "requested_changes"}},
        {"properties",
         {{"scores", {{"type", "object"}, {"required", criteria}, {"properties", props}}},
          {"requested_changes",
           {{"type", "array"},
            {"items",
             {{"type", "object"},
              {"required", {"locator", "request"}},
              {"properties", {{"locator", {{"type", "string"}}}, {"request", {{"type", "string"}}}}}}}}}}},
    };
}

SimulatedFeedback run(const Gateway& gateway, const std::string& template_name, FeedbackTarget kind,
                      const std::vector<std::string>& criteria, const std::set<std::string>& locators, json input) {
    OutputCheck check = [&](const json& out) {
        json tagged = out;
        tagged["target_kind"] = kind;
        return feedback_problems(tagged.get<SimulatedFeedback>(), kind, criteria, locators);
    };
    auto resp = gateway.complete(make_model_request(roles::kLearnerSimulator, template_name, std::move(input),
                                                    feedback_schema(criteria), check));
    json tagged = resp.parsed;
    tagged["target_kind"] = kind;
    auto fb = tagged.get<SimulatedFeedback>();
    // Keep only the declared criteria.
    std::erase_if(fb.scores, [&](const auto& kv) {
        return std::find(criteria.begin(), criteria.end(), kv.first) == criteria.end();
    });
    return fb;
}

}  // namespace

void validate_feedback(const SimulatedFeedback& feedback, const LearningPath& path) {
    auto p = feedback_problems(feedback, FeedbackTarget::Path, path_criteria(), session_ids(path));
    if (!p.empty()) throw ValidationError("invalid path feedback: " + p.front());
}

void validate_feedback(const SimulatedFeedback& feedback, const SessionContent& content) {
    auto p = feedback_problems(feedback, FeedbackTarget::Content, content_criteria(), section_titles(content));
    if (!p.empty()) throw ValidationError("invalid content feedback: " + p.front());
}

SimulatedFeedback LearnerSimulator::simulate_path_feedback(const LearnerProfile& profile,
                                                           const LearningPath& path) const {
    auto fb = run(gateway_, "simulator.path", FeedbackTarget::Path, path_criteria(), session_ids(path),
                  {{"profile", profile}, {"path", path}});
    validate_feedback(fb, path);
    return fb;
}

SimulatedFeedback LearnerSimulator::simulate_content_feedback(const LearnerProfile& profile,
                                                              const SessionContent& content) const {
    for (const auto& s : content.outline) {
        if (!content.drafts.contains(s.title)) {
            throw ValidationError("content has no draft for section '" + s.title + "'");
        }
    }
    auto fb = run(gateway_, "simulator.content", FeedbackTarget::Content, content_criteria(),
                  section_titles(content),
                  {{"profile", profile},
                   {"content",
                    {{"outline", content.outline}, {"drafts", content.drafts}, {"document", content.document}}}});
    validate_feedback(fb, content);
    return fb;
}

}  // namespace mentor
