#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "mentor/config.hpp"
#include "mentor/service.hpp"
#include "test_support.hpp"

using namespace mentor;
using mentor::testing::fresh_dir;
using mentor::testing::MockWorld;

namespace {

struct ServiceWorld {
    MockWorld w;
    DocumentStore store{fresh_dir("svc")};
    TutorService svc{w.gateway, store, std::make_shared<SyntheticSearch>(), std::make_shared<HashEmbedder>(),
                     std::make_shared<SequentialIds>()};

    std::string onboard(const std::string& info = "I already know data fundamentals") {
        return svc.onboard(LearningGoal{"", "Data engineer", "build pipelines", {}}, info).learner_id;
    }

    HttpReply call(const std::string& method, const std::string& path, const json& body = nullptr) {
        return handle_request(svc, method, path, body.is_null() ? "" : body.dump());
    }
};

std::vector<int> correct_answers(const SessionContent& c) {
    std::vector<int> out;
    for (const auto& q : c.quiz) out.push_back(q.correct_index);
    return out;
}

std::string first_pending(const LearningPath& p) {
    for (const auto& s : p.sessions) {
        if (s.status == SessionStatus::Pending) return s.id;
    }
    return {};
}

}  // namespace

TEST(Service, OnboardingComputesGapAndWaitsForReview) {
    ServiceWorld sw;
    auto r = sw.svc.onboard(LearningGoal{"", "Data engineer", "build pipelines", {}}, "I already know data fundamentals");
    EXPECT_FALSE(r.gap.required.empty());
    EXPECT_FALSE(r.gap.gap_names().contains("data fundamentals"));
    EXPECT_TRUE(r.gap.required_names().contains("data fundamentals"));
    auto v = sw.svc.get_learner(r.learner_id);
    EXPECT_EQ(v.state.phase, Phase::GapReview);
    EXPECT_EQ(sw.svc.get_profile(r.learner_id).version, 0);
}

TEST(Service, ConfirmGapEdits) {
    ServiceWorld sw;
    auto id = sw.onboard();
    EXPECT_THROW(sw.svc.confirm_gap(id, GapEdits{{}, {"no such skill"}}), ValidationError);
    EXPECT_THROW(sw.svc.confirm_gap(id, GapEdits{{"data fundamentals"}, {}}), ValidationError);
    auto gap = sw.svc.confirm_gap(id, GapEdits{{"Spark tuning"}, {"applied build"}});
    EXPECT_TRUE(gap.gap_names().contains("spark tuning"));
    EXPECT_FALSE(gap.required_names().contains("applied build"));
    auto view = sw.svc.get_path(id);
    EXPECT_EQ(view.phase, Phase::PathActive);
    ASSERT_TRUE(view.active.has_value());
    EXPECT_TRUE(view.active->approved);
    EXPECT_TRUE(path_violations(*view.active, gap.required_names(), gap.gap_names()).empty());
    EXPECT_THROW(sw.svc.confirm_gap(id, {}), ConflictError);
}

TEST(Service, FullJourneyReachesGoal) {
    ServiceWorld sw;
    auto id = sw.onboard();
    sw.svc.confirm_gap(id, {});
    int sessions = 0;
    while (sw.svc.get_learner(id).state.phase != Phase::GoalAchieved) {
        ASSERT_LT(++sessions, 20) << "journey does not converge";
        auto view = sw.svc.get_path(id);
        ASSERT_EQ(view.phase, Phase::PathActive);
        auto sid = first_pending(*view.active);
        ASSERT_FALSE(sid.empty());
        auto content = sw.svc.get_session_content(id, sid);
        EXPECT_EQ(content.quiz.size(), 5u);
        auto before = sw.svc.get_profile(id).version;
        auto r = sw.svc.submit_quiz(id, sid, QuizSubmission{correct_answers(content), 30.0, std::nullopt});
        EXPECT_DOUBLE_EQ(r.quiz_score, 1.0);
        EXPECT_EQ(r.profile_version, before + 1);
        if (r.phase == Phase::RescheduleProposed) {
            ASSERT_TRUE(r.proposal.has_value());
            auto accepted = sw.svc.respond_to_proposal(id, true);
            EXPECT_TRUE(accepted.approved);
            EXPECT_EQ(accepted.id, r.proposal->id);
        }
    }
    EXPECT_TRUE(sw.svc.get_learner(id).gap.empty());
    EXPECT_EQ(sw.svc.get_path(id).active->pending_count(), 0u);
    EXPECT_EQ(sw.svc.replay_profile(id), sw.svc.get_profile(id));
}

TEST(Service, PhaseGuards) {
    ServiceWorld sw;
    auto id = sw.onboard();
    EXPECT_THROW(sw.svc.get_session_content(id, "ses-1"), ConflictError);
    EXPECT_THROW(sw.svc.respond_to_proposal(id, true), ConflictError);
    sw.svc.confirm_gap(id, {});
    auto path = *sw.svc.get_path(id).active;
    auto sid = first_pending(path);
    EXPECT_THROW(sw.svc.submit_quiz(id, sid, QuizSubmission{{0, 1, 2, 3, 0}}), ConflictError);
    EXPECT_THROW(sw.svc.get_session_content(id, "ses-nope"), NotFoundError);

    auto content = sw.svc.get_session_content(id, sid);
    EXPECT_EQ(sw.svc.get_session_content(id, sid), content);  // re-read while active
    EXPECT_EQ(sw.svc.content_generations(), 1u);
    EXPECT_THROW(sw.svc.get_session_content(id, path.sessions.back().id), ConflictError);
    EXPECT_THROW(sw.svc.submit_quiz(id, sid, QuizSubmission{{0}}), ValidationError);
    EXPECT_THROW(sw.svc.submit_quiz(id, sid, QuizSubmission{{9, 9, 9, 9, 9}}), ValidationError);

    sw.svc.submit_quiz(id, sid, QuizSubmission{{0, 0, 0, 0, 0}, 20.0});
    EXPECT_THROW(sw.svc.submit_quiz(id, sid, QuizSubmission{correct_answers(content), 20.0}), ConflictError);
    EXPECT_THROW(sw.svc.get_learner("lrn-404"), NotFoundError);
}

TEST(Service, RejectingProposalKeepsActivePath) {
    ServiceWorld sw;
    auto id = sw.onboard();
    sw.svc.confirm_gap(id, {});
    auto active = *sw.svc.get_path(id).active;
    auto sid = first_pending(active);
    auto content = sw.svc.get_session_content(id, sid);
    auto r = sw.svc.submit_quiz(id, sid, QuizSubmission{correct_answers(content), 25.0});
    ASSERT_EQ(r.phase, Phase::RescheduleProposed);
    ASSERT_TRUE(r.proposal.has_value());

    auto kept = sw.svc.respond_to_proposal(id, false);
    EXPECT_EQ(kept.id, active.id);
    EXPECT_EQ(sw.svc.get_path(id).phase, Phase::PathActive);
    EXPECT_FALSE(sw.svc.get_path(id).proposal.has_value());
    EXPECT_THROW(sw.svc.respond_to_proposal(id, true), ConflictError);
    EXPECT_THROW(sw.svc.get_session_content(id, sid), ConflictError);  // completed
}

TEST(Service, ManualEditsAndReplay) {
    ServiceWorld sw;
    auto id = sw.onboard();
    sw.svc.confirm_gap(id, {});
    auto sid = first_pending(*sw.svc.get_path(id).active);
    auto content = sw.svc.get_session_content(id, sid);
    sw.svc.submit_quiz(id, sid, QuizSubmission{{0, 0, 0, 0, 0}, 95.0, "more practice exercises please"});

    auto p = sw.svc.update_profile_manual(id, json{{"preferences", {{"content_style", "detailed"}}}});
    EXPECT_EQ(p.preferences.content_style, ContentStyle::Detailed);
    EXPECT_EQ(p.version, 2);
    EXPECT_THROW(sw.svc.update_profile_manual(id, json{{"cognitive_status", json::object()}}), ValidationError);
    EXPECT_THROW(sw.svc.update_profile_manual(id, json{{"preferences", {{"mood", "x"}}}}), ValidationError);

    EXPECT_EQ(sw.svc.replay_profile(id), sw.svc.get_profile(id));
    const auto log = sw.svc.interaction_log(id);
    ASSERT_EQ(log.size(), 2u);
    EXPECT_EQ(log[0]["type"], "interaction");
    EXPECT_EQ(log[1]["type"], "manual_edit");

    auto iv = sw.svc.interventions(id);
    ASSERT_FALSE(iv.empty());
    EXPECT_EQ(iv.back().kind, InterventionKind::DifficultyAdjust);
}

TEST(Service, ConcurrentEditsAreSerialized) {
    ServiceWorld sw;
    auto id = sw.onboard();
    const auto v0 = sw.svc.get_profile(id).version;
    std::thread a([&] { sw.svc.update_profile_manual(id, json{{"preferences", {{"content_style", "concise"}}}}); });
    std::thread b([&] { sw.svc.update_profile_manual(id, json{{"preferences", {{"content_style", "detailed"}}}}); });
    a.join();
    b.join();
    EXPECT_EQ(sw.svc.get_profile(id).version, v0 + 2);
    EXPECT_EQ(sw.svc.interaction_log(id).size(), 2u);
}

TEST(Service, ConcurrentEditAndQuizAreSerialized) {
    ServiceWorld sw;
    auto id = sw.onboard();
    sw.svc.confirm_gap(id, {});
    auto sid = first_pending(*sw.svc.get_path(id).active);
    auto content = sw.svc.get_session_content(id, sid);
    const auto v0 = sw.svc.get_profile(id).version;
    std::thread a([&] { sw.svc.update_profile_manual(id, json{{"preferences", {{"content_style", "detailed"}}}}); });
    std::thread b([&] { sw.svc.submit_quiz(id, sid, QuizSubmission{correct_answers(content), 30.0}); });
    a.join();
    b.join();
    const auto p = sw.svc.get_profile(id);
    EXPECT_EQ(p.version, v0 + 2);
    EXPECT_EQ(p.preferences.content_style, ContentStyle::Detailed);
    EXPECT_EQ(sw.svc.replay_profile(id), p);

    // A resubmission is refused and leaves the version alone.
    EXPECT_THROW(sw.svc.submit_quiz(id, sid, QuizSubmission{correct_answers(content), 30.0}), ConflictError);
    EXPECT_EQ(sw.svc.get_profile(id).version, v0 + 2);
}

TEST(Service, FailedOnboardingPersistsNothing) {
    ServiceWorld sw;
    for (int i = 0; i < 3; ++i) sw.w.backend->enqueue(roles::kLearnerProfiler, std::string("not json"));
    EXPECT_THROW(sw.onboard("detailed explanations please"), GatewayError);
    EXPECT_TRUE(sw.store.list("learners").empty());
}

// ---------------------------------------------------------------------------
// HTTP surface

TEST(Http, StatusCodes) {
    ServiceWorld sw;
    auto created = sw.call("POST", "/learners",
                           json{{"goal", {{"title", "Data engineer"}, {"description", "build pipelines"}}},
                                {"onboarding_info", "I know data fundamentals"}});
    ASSERT_EQ(created.status, 201);
    const std::string id = created.body["learner_id"];
    const std::string base = "/learners/" + id;

    EXPECT_EQ(sw.call("GET", base).status, 200);
    EXPECT_EQ(sw.call("GET", "/learners/lrn-missing").status, 404);
    EXPECT_EQ(sw.call("DELETE", base).status, 405);
    EXPECT_EQ(sw.call("GET", "/nowhere").status, 404);
    EXPECT_EQ(handle_request(sw.svc, "POST", "/learners", "{not json").status, 400);
    EXPECT_EQ(sw.call("POST", "/learners", json{{"goal", ""}}).status, 422);
    EXPECT_EQ(sw.call("GET", base + "/sessions/x/content").status, 409);

    auto confirmed = sw.call("POST", base + "/gap/confirm", json::object());
    ASSERT_EQ(confirmed.status, 200);
    EXPECT_EQ(confirmed.body["phase"], "path_active");
    const std::string sid = confirmed.body["path"]["sessions"][0]["id"];

    auto content = sw.call("GET", base + "/sessions/" + sid + "/content");
    ASSERT_EQ(content.status, 200);
    EXPECT_EQ(content.body["quiz"].size(), 5u);
    EXPECT_EQ(sw.call("POST", base + "/sessions/" + sid + "/quiz", json{{"answers", {1}}}).status, 422);
    EXPECT_EQ(sw.call("POST", base + "/sessions/" + sid + "/quiz", json{{"answers", "all"}}).status, 422);

    json answers = json::array();
    for (const auto& q : content.body["quiz"]) answers.push_back(q["correct_index"]);
    auto quiz = sw.call("POST", base + "/sessions/" + sid + "/quiz",
                        json{{"answers", answers}, {"time_spent_minutes", 40}});
    ASSERT_EQ(quiz.status, 200);
    EXPECT_DOUBLE_EQ(quiz.body["quiz_score"].get<double>(), 1.0);
    EXPECT_EQ(quiz.body["phase"], "reschedule_proposed");
    EXPECT_EQ(sw.call("POST", base + "/sessions/" + sid + "/quiz", json{{"answers", answers}}).status, 409);

    EXPECT_EQ(sw.call("POST", base + "/proposal/respond", json{{"accept", "yes"}}).status, 422);
    auto responded = sw.call("POST", base + "/proposal/respond", json{{"accept", true}});
    ASSERT_EQ(responded.status, 200);
    EXPECT_EQ(responded.body["phase"], "path_active");

    EXPECT_EQ(sw.call("GET", base + "/path").body["phase"], "path_active");
    auto patched = sw.call("PATCH", base + "/profile", json{{"preferences", {{"content_style", "example-driven"}}}});
    ASSERT_EQ(patched.status, 200);
    EXPECT_EQ(patched.body["preferences"]["content_style"], "example-driven");
    EXPECT_EQ(sw.call("PATCH", base + "/profile", json{{"version", 9}}).status, 422);
    EXPECT_EQ(sw.call("GET", base + "/profile").body["version"], 2);
    auto iv = sw.call("GET", base + "/interventions");
    ASSERT_EQ(iv.status, 200);
    EXPECT_TRUE(iv.body["interventions"].is_array());

    auto err = sw.call("GET", "/learners/lrn-missing");
    EXPECT_EQ(err.body["error"]["code"], 404);
    EXPECT_TRUE(err.body["error"]["message"].is_string());
}

TEST(Http, BackendOutageMapsTo502) {
    ServiceWorld sw;
    sw.w.backend->enqueue_unreachable(roles::kSkillIdentifier);
    auto r = sw.call("POST", "/learners", json{{"goal", "Data engineer"}});
    EXPECT_EQ(r.status, 502);
}

// ---------------------------------------------------------------------------
// configuration

TEST(Config, FileThenEnvironment) {
    auto dir = fresh_dir("cfg");
    {
        std::ofstream f(dir / "c.json");
        f << R"({"storage_dir": "/tmp/x", "gateway": {"max_retries": 4},
                 "budgets": {"path_refinement": 1, "quiz_size": 7},
                 "thresholds": {"mastery": 0.9}, "server": {"port": 9000}})";
    }
    std::map<std::string, std::string> env{{"MENTOR_PORT", "9100"}, {"MENTOR_TEMPERATURE", "0.2"}};
    auto lookup = [&](const std::string& k) -> std::optional<std::string> {
        if (auto it = env.find(k); it != env.end()) return it->second;
        return std::nullopt;
    };
    auto c = load_config(dir / "c.json", lookup);
    EXPECT_EQ(c.storage_dir, "/tmp/x");
    EXPECT_EQ(c.gateway.max_retries, 4);
    EXPECT_DOUBLE_EQ(c.gateway.temperature, 0.2);
    EXPECT_EQ(c.server.port, 9100);
    EXPECT_EQ(c.service.scheduler.refinement_budget, 1);
    EXPECT_EQ(c.service.content.quiz_size, 7);
    EXPECT_DOUBLE_EQ(c.service.profiler.mastery_threshold, 0.9);

    auto defaults = load_config(std::nullopt, [](const std::string&) { return std::nullopt; });
    EXPECT_DOUBLE_EQ(defaults.gateway.temperature, 0.7);
    EXPECT_EQ(defaults.service.content.search_results, 5);
    EXPECT_EQ(defaults.embedding.model, "text-embedding-3-small");

    EXPECT_THROW(config_from_json(json{{"colour", "red"}}), ConfigError);
    env["MENTOR_PORT"] = "eighty";
    EXPECT_THROW(load_config(std::nullopt, lookup), ConfigError);
}

TEST(Config, BuildsGatewayFromBackends) {
    auto c = config_from_json(json{{"backends", {{{"id", "a"}}, {{"id", "b"}}}},
                                   {"routes", {{"judge", "b"}}},
                                   {"default_backend", "a"}});
    Gateway g;
    configure_gateway(c, g);
    EXPECT_EQ(g.resolve("judge"), "b");
    EXPECT_EQ(g.resolve("path-scheduler"), "a");
    EXPECT_EQ(make_embedder(c)->dimension(), 256u);
    auto bad = config_from_json(json{{"backends", {{{"id", "x"}, {"kind", "telepathy"}}}}});
    Gateway g2;
    EXPECT_THROW(configure_gateway(bad, g2), ConfigError);
}
