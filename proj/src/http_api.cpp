#include <httplib.h>

#include <iostream>
#include <regex>

#include "mentor/service.hpp"

namespace mentor {

namespace {

HttpReply error_reply(int status, const std::string& message) {
    return {status, {{"error", {{"code", status}, {"message", message}}}}};
}

json parse_request_body(const std::string& body) {
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw std::invalid_argument("request body is not valid JSON");
    if (!j.is_object()) throw std::invalid_argument("request body must be a JSON object");
    return j;
}

std::vector<std::string> string_list(const json& body, const char* key) {
    if (!body.contains(key)) return {};
    if (!body[key].is_array()) throw ValidationError(std::string(key) + " must be a list of skill names");
    std::vector<std::string> out;
    for (const auto& v : body[key]) {
        if (!v.is_string()) throw ValidationError(std::string(key) + " must be a list of skill names");
        out.push_back(v.get<std::string>());
    }
    return out;
}

json path_view_json(const PathView& v) {
    return {{"phase", v.phase},
            {"active", v.active ? json(*v.active) : json(nullptr)},
            {"proposal", v.proposal ? json(*v.proposal) : json(nullptr)}};
}

HttpReply route(TutorService& svc, const std::string& method, const std::string& path, const json& body) {
    static const std::regex learners(R"(^/learners/?$)");
    static const std::regex learner(R"(^/learners/([^/]+)$)");
    static const std::regex confirm(R"(^/learners/([^/]+)/gap/confirm$)");
    static const std::regex path_re(R"(^/learners/([^/]+)/path$)");
    static const std::regex content(R"(^/learners/([^/]+)/sessions/([^/]+)/content$)");
    static const std::regex quiz(R"(^/learners/([^/]+)/sessions/([^/]+)/quiz$)");
    static const std::regex respond(R"(^/learners/([^/]+)/proposal/respond$)");
    static const std::regex profile(R"(^/learners/([^/]+)/profile$)");
    static const std::regex interventions(R"(^/learners/([^/]+)/interventions$)");

    std::smatch m;
    auto allow = [&](std::initializer_list<const char*> methods) {
        for (const char* x : methods) {
            if (method == x) return true;
        }
        return false;
    };
    auto not_allowed = [] { return error_reply(405, "method not allowed"); };

    if (std::regex_match(path, m, learners)) {
        if (!allow({"POST"})) return not_allowed();
        LearningGoal goal;
        if (body.contains("goal") && body["goal"].is_object()) {
            goal.title = body["goal"].value("title", "");
            goal.description = body["goal"].value("description", "");
        } else {
            goal.title = body.value("goal", "");
        }
        auto r = svc.onboard(goal, body.value("onboarding_info", ""));
        return {201, {{"learner_id", r.learner_id}, {"phase", Phase::GapReview}, {"gap", r.gap}}};
    }
    if (std::regex_match(path, m, learner)) {
        if (!allow({"GET"})) return not_allowed();
        auto v = svc.get_learner(m[1]);
        return {200, {{"state", v.state}, {"goal", v.goal}, {"gap", v.gap}}};
    }
    if (std::regex_match(path, m, confirm)) {
        if (!allow({"POST"})) return not_allowed();
        auto gap = svc.confirm_gap(m[1], GapEdits{string_list(body, "add"), string_list(body, "remove")});
        auto view = svc.get_path(m[1]);
        return {200, {{"gap", gap}, {"phase", view.phase}, {"path", view.active ? json(*view.active) : json()}}};
    }
    if (std::regex_match(path, m, path_re)) {
        if (!allow({"GET"})) return not_allowed();
        return {200, path_view_json(svc.get_path(m[1]))};
    }
    if (std::regex_match(path, m, content)) {
        if (!allow({"GET"})) return not_allowed();
        return {200, svc.get_session_content(m[1], m[2])};
    }
    if (std::regex_match(path, m, quiz)) {
        if (!allow({"POST"})) return not_allowed();
        QuizSubmission sub;
        if (!body.contains("answers") || !body["answers"].is_array()) {
            throw ValidationError("answers must be a list of option indices");
        }
        for (const auto& a : body["answers"]) {
            if (!a.is_number_integer()) throw ValidationError("answers must be a list of option indices");
            sub.answers.push_back(a.get<int>());
        }
        if (body.contains("time_spent_minutes") && !body["time_spent_minutes"].is_null()) {
            sub.time_spent_minutes = body["time_spent_minutes"].get<double>();
        }
        if (body.contains("feedback_text") && body["feedback_text"].is_string()) {
            sub.feedback_text = body["feedback_text"].get<std::string>();
        }
        auto r = svc.submit_quiz(m[1], m[2], sub);
        return {200,
                {{"quiz_score", r.quiz_score},
                 {"profile_version", r.profile_version},
                 {"gap", r.gap},
                 {"proposal", r.proposal ? json(*r.proposal) : json(nullptr)},
                 {"phase", r.phase}}};
    }
    if (std::regex_match(path, m, respond)) {
        if (!allow({"POST"})) return not_allowed();
        if (!body.contains("accept") || !body["accept"].is_boolean()) {
            throw ValidationError("accept must be true or false");
        }
        auto p = svc.respond_to_proposal(m[1], body["accept"].get<bool>());
        return {200, {{"path", p}, {"phase", svc.get_learner(m[1]).state.phase}}};
    }
    if (std::regex_match(path, m, profile)) {
        if (method == "GET") return {200, svc.get_profile(m[1])};
        if (method == "PATCH") return {200, svc.update_profile_manual(m[1], body)};
        return not_allowed();
    }
    if (std::regex_match(path, m, interventions)) {
        if (!allow({"GET"})) return not_allowed();
        return {200, {{"interventions", svc.interventions(m[1])}}};
    }
    return error_reply(404, "no route for " + path);
}

}  // namespace

HttpReply handle_request(TutorService& service, const std::string& method, const std::string& path,
                         const std::string& body) {
    try {
        return route(service, method, path, parse_request_body(body));
    } catch (const std::invalid_argument& e) {
        return error_reply(400, e.what());
    } catch (const ValidationError& e) {
        return error_reply(422, e.what());
    } catch (const NotFoundError& e) {
        return error_reply(404, e.what());
    } catch (const ConflictError& e) {
        return error_reply(409, e.what());
    } catch (const GatewayError& e) {
        return error_reply(502, e.what());
    } catch (const json::exception& e) {
        return error_reply(422, e.what());
    } catch (const std::exception& e) {
        return error_reply(500, e.what());
    }
}

void run_http_server(TutorService& service, const ServerOptions& options) {
    httplib::Server server;
    auto dispatch = [&](const httplib::Request& req, httplib::Response& res) {
        if (!options.bearer_token.empty() &&
            req.get_header_value("Authorization") != "Bearer " + options.bearer_token) {
            auto r = error_reply(401, "missing or invalid bearer token");
            res.status = r.status;
            res.set_content(r.body.dump(), "application/json");
            return;
        }
        auto r = handle_request(service, req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    const std::string any = R"(/.*)";
    server.Get(any, dispatch);
    server.Post(any, dispatch);
    server.Patch(any, dispatch);
    server.Put(any, dispatch);
    server.Delete(any, dispatch);
    std::cerr << "listening on " << options.host << ":" << options.port << "\n";
    if (!server.listen(options.host, options.port)) {
        throw ConfigError("cannot listen on " + options.host + ":" + std::to_string(options.port));
    }
}

}  // namespace mentor
