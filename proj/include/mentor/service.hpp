#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "mentor/content.hpp"
#include "mentor/gateway.hpp"
#include "mentor/ids.hpp"
#include "mentor/model.hpp"
#include "mentor/profiler.hpp"
#include "mentor/scheduler.hpp"
#include "mentor/simulator.hpp"
#include "mentor/skill_identifier.hpp"
#include "mentor/store.hpp"

namespace mentor {

enum class Phase { Onboarding, GapReview, PathActive, SessionActive, RescheduleProposed, GoalAchieved };

NLOHMANN_JSON_SERIALIZE_ENUM(Phase, {
    {Phase::Onboarding, "onboarding"},
    {Phase::GapReview, "gap_review"},
    {Phase::PathActive, "path_active"},
    {Phase::SessionActive, "session_active"},
    {Phase::RescheduleProposed, "reschedule_proposed"},
    {Phase::GoalAchieved, "goal_achieved"},
})

Phase parse_phase(std::string_view s);

struct LearnerState {
    std::string learner_id;
    Phase phase = Phase::Onboarding;
    std::optional<std::string> active_path_id;
    std::optional<std::string> pending_proposal_id;
    std::optional<std::string> active_session_id;

    bool operator==(const LearnerState&) const = default;
};

void to_json(json& j, const LearnerState& v);
void from_json(const json& j, LearnerState& v);

struct ServiceSettings {
    ProfilerSettings profiler;
    SchedulerSettings scheduler;
    ContentSettings content;
};

struct OnboardResult {
    std::string learner_id;
    SkillGap gap;
};

struct LearnerView {
    LearnerState state;
    LearningGoal goal;
    SkillGap gap;
};

struct PathView {
    Phase phase = Phase::PathActive;
    std::optional<LearningPath> active;
    std::optional<LearningPath> proposal;
};

struct QuizSubmission {
    std::vector<int> answers;
    std::optional<double> time_spent_minutes;  // measured from content open when absent
    std::optional<std::string> feedback_text;
};

struct QuizResult {
    double quiz_score = 0.0;
    std::int64_t profile_version = 0;
    SkillGap gap;
    std::optional<LearningPath> proposal;
    Phase phase = Phase::PathActive;
};

struct GapEdits {
    std::vector<std::string> add;
    std::vector<std::string> remove;
};

// Orchestrates the learner lifecycle over a document store. Mutations on one
// learner are serialized; reads share the lock; learners are independent.
// Phase violations raise ConflictError.
class TutorService {
public:
    TutorService(const Gateway& gateway, DocumentStore& store, std::shared_ptr<SearchProvider> search,
                 std::shared_ptr<Embedder> embedder, std::shared_ptr<IdSource> ids, ServiceSettings settings = {});

    OnboardResult onboard(LearningGoal goal, const std::string& onboarding_info);
    LearnerView get_learner(const std::string& learner_id) const;
    SkillGap confirm_gap(const std::string& learner_id, const GapEdits& edits);
    PathView get_path(const std::string& learner_id) const;
    SessionContent get_session_content(const std::string& learner_id, const std::string& session_id);
    QuizResult submit_quiz(const std::string& learner_id, const std::string& session_id,
                           const QuizSubmission& submission);
    LearningPath respond_to_proposal(const std::string& learner_id, bool accept);
    LearnerProfile get_profile(const std::string& learner_id) const;
    // `edits` may only carry a "preferences" object (content_style and/or
    // activity_weights); anything else is rejected.
    LearnerProfile update_profile_manual(const std::string& learner_id, const json& edits);
    std::vector<Intervention> interventions(const std::string& learner_id) const;

    // Profile rebuilt from the initial profile and the interaction log.
    LearnerProfile replay_profile(const std::string& learner_id) const;
    std::vector<json> interaction_log(const std::string& learner_id) const;

    // Number of content pipeline runs (cache misses) so far.
    std::size_t content_generations() const noexcept { return content_generations_.load(); }

private:
    std::shared_ptr<std::shared_mutex> lock_for(const std::string& learner_id) const;

    const Gateway& gateway_;
    DocumentStore& store_;
    std::shared_ptr<IdSource> ids_;
    ServiceSettings settings_;
    SkillIdentifier identifier_;
    LearnerProfiler profiler_;
    LearnerSimulator simulator_;
    PathScheduler scheduler_;
    ContentCreator creator_;

    mutable std::mutex locks_mutex_;
    mutable std::map<std::string, std::shared_ptr<std::shared_mutex>> locks_;
    std::atomic<std::size_t> content_generations_{0};
};

// ---------------------------------------------------------------------------
// HTTP surface, independent of the transport so it can be driven in-process.

struct HttpReply {
    int status = 200;
    json body;
};

// Routes one request. `path` excludes the query string. Error bodies are
// {"error": {"code": <status>, "message": <text>}}.
HttpReply handle_request(TutorService& service, const std::string& method, const std::string& path,
                         const std::string& body);

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string bearer_token;  // empty disables the check
};

// Blocks serving until the process is stopped.
void run_http_server(TutorService& service, const ServerOptions& options);

}  // namespace mentor
