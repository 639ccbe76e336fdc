#include "mentor/service.hpp"

#include <algorithm>
#include <chrono>

namespace mentor {

Phase parse_phase(std::string_view s) {
    for (auto p : {Phase::Onboarding, Phase::GapReview, Phase::PathActive, Phase::SessionActive,
                   Phase::RescheduleProposed, Phase::GoalAchieved}) {
        if (json(p).get<std::string>() == s) return p;
    }
    throw ValidationError("unknown phase: " + std::string(s));
}

namespace {

template <class T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
    j[key] = v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<T>();
}

}  // namespace

void to_json(json& j, const LearnerState& v) {
    j = json{{"learner_id", v.learner_id}, {"phase", v.phase}};
    put_opt(j, "active_path_id", v.active_path_id);
    put_opt(j, "pending_proposal_id", v.pending_proposal_id);
    put_opt(j, "active_session_id", v.active_session_id);
}

void from_json(const json& j, LearnerState& v) {
    v.learner_id = j.at("learner_id").get<std::string>();
    v.phase = parse_phase(j.at("phase").get<std::string>());
    v.active_path_id = get_opt<std::string>(j, "active_path_id");
    v.pending_proposal_id = get_opt<std::string>(j, "pending_proposal_id");
    v.active_session_id = get_opt<std::string>(j, "active_session_id");
}

namespace {

constexpr const char* kLearners = "learners";
constexpr const char* kContent = "content";

// Everything persisted for one learner; written as a single document.
struct LearnerDoc {
    LearnerState state;
    LearningGoal goal;
    std::vector<Skill> required;
    SkillGap gap;
    LearnerProfile profile;
    LearnerProfile initial_profile;
    std::map<std::string, LearningPath> paths;
    std::vector<std::string> archived_proposals;
    std::map<std::string, std::string> opened_at;  // session id -> timestamp
};

void to_json(json& j, const LearnerDoc& d) {
    j = json{{"state", d.state},
             {"goal", d.goal},
             {"required", d.required},
             {"gap", d.gap},
             {"profile", d.profile},
             {"initial_profile", d.initial_profile},
             {"paths", d.paths},
             {"archived_proposals", d.archived_proposals},
             {"opened_at", d.opened_at}};
}

void from_json(const json& j, LearnerDoc& d) {
    d.state = j.at("state").get<LearnerState>();
    d.goal = j.at("goal").get<LearningGoal>();
    d.required = j.at("required").get<std::vector<Skill>>();
    d.gap = j.at("gap").get<SkillGap>();
    d.profile = j.at("profile").get<LearnerProfile>();
    d.initial_profile = j.at("initial_profile").get<LearnerProfile>();
    d.paths = j.at("paths").get<std::map<std::string, LearningPath>>();
    d.archived_proposals = j.at("archived_proposals").get<std::vector<std::string>>();
    d.opened_at = j.at("opened_at").get<std::map<std::string, std::string>>();
}

std::string content_key(const std::string& learner_id, const std::string& session_id) {
    return learner_id + "__" + session_id;
}

[[noreturn]] void wrong_phase(const LearnerDoc& d, const std::string& op) {
    throw ConflictError(op + " is not allowed in phase " + json(d.state.phase).get<std::string>());
}

void require_phase(const LearnerDoc& d, std::initializer_list<Phase> allowed, const std::string& op) {
    if (std::find(allowed.begin(), allowed.end(), d.state.phase) == allowed.end()) wrong_phase(d, op);
}

LearningPath& active_path(LearnerDoc& d) {
    if (!d.state.active_path_id) throw ConflictError("no active path");
    return d.paths.at(*d.state.active_path_id);
}

}  // namespace

TutorService::TutorService(const Gateway& gateway, DocumentStore& store, std::shared_ptr<SearchProvider> search,
                           std::shared_ptr<Embedder> embedder, std::shared_ptr<IdSource> ids,
                           ServiceSettings settings)
    : gateway_(gateway),
      store_(store),
      ids_(ids ? std::move(ids) : std::make_shared<RandomIds>()),
      settings_(settings),
      identifier_(gateway),
      profiler_(gateway, settings.profiler),
      simulator_(gateway),
      scheduler_(gateway, simulator_, ids_, settings.scheduler),
      creator_(gateway, simulator_, std::move(search), std::move(embedder), settings.content) {}

std::shared_ptr<std::shared_mutex> TutorService::lock_for(const std::string& learner_id) const {
    std::lock_guard guard(locks_mutex_);
    auto& slot = locks_[learner_id];
    if (!slot) slot = std::make_shared<std::shared_mutex>();
    return slot;
}

namespace {

LearnerDoc load(const DocumentStore& store, const std::string& learner_id) {
    std::optional<json> doc;
    try {
        doc = store.get(kLearners, learner_id);
    } catch (const ValidationError&) {
        doc.reset();  // malformed id
    }
    if (!doc) throw NotFoundError("unknown learner " + learner_id);
    return doc->get<LearnerDoc>();
}

void save(DocumentStore& store, const LearnerDoc& d) { store.put(kLearners, d.state.learner_id, d); }

}  // namespace

OnboardResult TutorService::onboard(LearningGoal goal, const std::string& onboarding_info) {
    goal.validate();
    if (goal.id.empty()) goal.id = ids_->next("goal");
    if (goal.created_at == Timestamp{}) goal.created_at = now_ms();

    // Nothing is persisted until every model call has succeeded.
    auto mapping = identifier_.map_goal_to_skills(goal);
    auto gap = identifier_.identify_skill_gap(mapping.required, onboarding_info);
    gap.goal_id = goal.id;
    const auto learner_id = ids_->next("lrn");
    auto profile = profiler_.init_profile(learner_id, onboarding_info, gap);

    LearnerDoc d;
    d.state.learner_id = learner_id;
    d.state.phase = Phase::GapReview;
    d.goal = goal;
    d.required = gap.required;
    d.gap = gap;
    d.profile = profile;
    d.initial_profile = profile;

    auto lock = lock_for(learner_id);
    std::unique_lock guard(*lock);
    save(store_, d);
    return {learner_id, gap};
}

LearnerView TutorService::get_learner(const std::string& learner_id) const {
    auto lock = lock_for(learner_id);
    std::shared_lock guard(*lock);
    auto d = load(store_, learner_id);
    return {d.state, d.goal, d.gap};
}

SkillGap TutorService::confirm_gap(const std::string& learner_id, const GapEdits& edits) {
    auto lock = lock_for(learner_id);
    std::unique_lock guard(*lock);
    auto d = load(store_, learner_id);
    require_phase(d, {Phase::GapReview}, "confirming the gap");

    auto required = d.required;
    auto status = d.profile.cognitive_status;
    for (const auto& name : edits.remove) {
        const auto key = normalize_skill_name(name);
        auto it = std::find_if(d.gap.gap.begin(), d.gap.gap.end(),
                               [&](const GapSkill& g) { return normalize_skill_name(g.skill.name) == key; });
        if (it == d.gap.gap.end()) throw ValidationError("'" + name + "' is not in the skill gap");
        std::erase_if(required, [&](const Skill& s) { return normalize_skill_name(s.name) == key; });
        status.erase(key);
    }
    for (const auto& name : edits.add) {
        const auto key = normalize_skill_name(name);
        if (key.empty()) throw ValidationError("skill name is empty");
        if (std::any_of(required.begin(), required.end(),
                        [&](const Skill& s) { return normalize_skill_name(s.name) == key; })) {
            throw ValidationError("skill '" + name + "' duplicates an existing skill");
        }
        required.push_back(Skill{key, "", Proficiency::Intermediate, "added by learner"});
        status[key] = MasteryProgress{0.0, 0.0};
    }
    auto gap = recompute_gap(d.goal.id, required, status, settings_.profiler.mastery_threshold, d.gap.version);
    if (gap.empty()) throw ValidationError("empty gap: nothing left to learn");
    gap.validate();

    auto profile = d.profile;
    profile.cognitive_status = std::move(status);
    auto path = approve_path(scheduler_.schedule_initial(profile, gap));

    d.required = std::move(required);
    d.gap = gap;
    d.profile = profile;
    d.initial_profile = profile;
    d.paths[path.id] = path;
    d.state.active_path_id = path.id;
    d.state.phase = Phase::PathActive;
    save(store_, d);
    return gap;
}

PathView TutorService::get_path(const std::string& learner_id) const {
    auto lock = lock_for(learner_id);
    std::shared_lock guard(*lock);
    auto d = load(store_, learner_id);
    PathView v;
    v.phase = d.state.phase;
    if (d.state.active_path_id) v.active = d.paths.at(*d.state.active_path_id);
    if (d.state.pending_proposal_id) v.proposal = d.paths.at(*d.state.pending_proposal_id);
    return v;
}

SessionContent TutorService::get_session_content(const std::string& learner_id, const std::string& session_id) {
    auto lock = lock_for(learner_id);
    std::unique_lock guard(*lock);
    auto d = load(store_, learner_id);

    const bool rereading = d.state.phase == Phase::SessionActive && d.state.active_session_id == session_id;
    if (!rereading) require_phase(d, {Phase::PathActive}, "opening a session");

    auto& path = active_path(d);
    const auto* found = path.find(session_id);
    if (found == nullptr) {
        const bool proposed = d.state.pending_proposal_id &&
                              d.paths.at(*d.state.pending_proposal_id).find(session_id) != nullptr;
        if (proposed) throw ConflictError("session " + session_id + " belongs to an unapproved proposal");
        throw NotFoundError("unknown session " + session_id);
    }
    if (found->status == SessionStatus::Completed) throw ConflictError("session " + session_id + " is completed");

    const auto key = content_key(learner_id, session_id);
    SessionContent content;
    if (auto cached = store_.get(kContent, key)) {
        content = cached->get<SessionContent>();
    } else {
        const SessionContext ctx{d.profile, d.gap, path, *found};
        content = creator_.create(ctx).content;
        ++content_generations_;
        store_.put(kContent, key, content);
    }

    if (!rereading) {
        for (auto& s : path.sessions) {
            if (s.id == session_id) s.status = SessionStatus::Active;
        }
        d.state.phase = Phase::SessionActive;
        d.state.active_session_id = session_id;
        d.opened_at[session_id] = format_timestamp(now_ms());
        save(store_, d);
    }
    return content;
}

QuizResult TutorService::submit_quiz(const std::string& learner_id, const std::string& session_id,
                                     const QuizSubmission& submission) {
    auto lock = lock_for(learner_id);
    std::unique_lock guard(*lock);
    auto d = load(store_, learner_id);

    if (d.state.active_path_id) {
        const auto* s = d.paths.at(*d.state.active_path_id).find(session_id);
        if (s != nullptr && s->status == SessionStatus::Completed) {
            throw ConflictError("quiz for session " + session_id + " was already submitted");
        }
    }
    require_phase(d, {Phase::SessionActive}, "submitting a quiz");
    if (d.state.active_session_id != session_id) {
        throw ConflictError("session " + session_id + " is not the active session");
    }
    auto& path = active_path(d);
    const auto* session = path.find(session_id);
    if (session == nullptr) throw NotFoundError("unknown session " + session_id);

    auto cached = store_.get(kContent, content_key(learner_id, session_id));
    if (!cached) throw ConflictError("session content has not been delivered");
    const auto content = cached->get<SessionContent>();
    if (submission.answers.size() != content.quiz.size()) {
        throw ValidationError("expected " + std::to_string(content.quiz.size()) + " answers, got " +
                              std::to_string(submission.answers.size()));
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < content.quiz.size(); ++i) {
        const int a = submission.answers[i];
        if (a < 0 || a >= static_cast<int>(content.quiz[i].options.size())) {
            throw ValidationError("answer " + std::to_string(i) + " is not a valid option index");
        }
        if (a == content.quiz[i].correct_index) ++correct;
    }
    const double score =
        content.quiz.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(content.quiz.size());

    const auto now = now_ms();
    const auto opened = d.opened_at.count(session_id) ? parse_timestamp(d.opened_at.at(session_id)) : now;
    InteractionRecord rec;
    rec.learner_id = learner_id;
    rec.session_id = session_id;
    rec.quiz_score = score;
    rec.time_spent_minutes = submission.time_spent_minutes.value_or(
        std::chrono::duration<double, std::ratio<60>>(now - opened).count());
    rec.feedback_text = submission.feedback_text;
    rec.events = {InteractionEvent{opened, EventType::Opened}, InteractionEvent{now, EventType::SubmittedQuiz}};
    rec.recorded_at = now;
    rec.validate();

    auto update = profiler_.update_profile(d.profile, rec, *session, d.required, d.goal.id);

    for (auto& s : path.sessions) {
        if (s.id == session_id) s.status = SessionStatus::Completed;
    }
    const bool gap_changed = update.gap.gap_names() != d.gap.gap_names();
    const LearningPath completed_path = path;

    QuizResult out;
    out.quiz_score = score;
    out.profile_version = update.profile.version;
    out.gap = update.gap;

    if (update.gap.empty()) {
        auto final_path = approve_path(scheduler_.reschedule(update.profile, update.gap, completed_path));
        d.paths[final_path.id] = final_path;
        d.state.active_path_id = final_path.id;
        d.state.phase = Phase::GoalAchieved;
    } else if (gap_changed || completed_path.pending_count() == 0) {
        auto proposal = scheduler_.reschedule(update.profile, update.gap, completed_path);
        d.paths[proposal.id] = proposal;
        d.state.pending_proposal_id = proposal.id;
        d.state.phase = Phase::RescheduleProposed;
        out.proposal = proposal;
    } else {
        d.state.phase = Phase::PathActive;
    }
    d.state.active_session_id.reset();
    d.profile = update.profile;
    d.gap = update.gap;
    out.phase = d.state.phase;

    store_.append(learner_id, json{{"type", "interaction"},
                                   {"interaction", rec},
                                   {"targets", session_targets(*session, d.required)},
                                   {"adjustment", update.adjustment},
                                   {"profile_version", update.profile.version}});
    save(store_, d);
    return out;
}

LearningPath TutorService::respond_to_proposal(const std::string& learner_id, bool accept) {
    auto lock = lock_for(learner_id);
    std::unique_lock guard(*lock);
    auto d = load(store_, learner_id);
    require_phase(d, {Phase::RescheduleProposed}, "responding to a proposal");

    const auto proposal_id = *d.state.pending_proposal_id;
    if (accept) {
        d.paths[proposal_id] = approve_path(d.paths.at(proposal_id));
        d.state.active_path_id = proposal_id;
    } else {
        d.archived_proposals.push_back(proposal_id);
    }
    d.state.pending_proposal_id.reset();
    d.state.phase = Phase::PathActive;
    save(store_, d);
    return d.paths.at(*d.state.active_path_id);
}

LearnerProfile TutorService::get_profile(const std::string& learner_id) const {
    auto lock = lock_for(learner_id);
    std::shared_lock guard(*lock);
    return load(store_, learner_id).profile;
}

LearnerProfile TutorService::update_profile_manual(const std::string& learner_id, const json& edits) {
    if (!edits.is_object()) throw ValidationError("profile edits must be an object");
    for (const auto& [key, _] : edits.items()) {
        if (key != "preferences") throw ValidationError("'" + key + "' cannot be edited manually");
    }
    if (!edits.contains("preferences") || !edits["preferences"].is_object()) {
        throw ValidationError("expected a \"preferences\" object");
    }

    auto lock = lock_for(learner_id);
    std::unique_lock guard(*lock);
    auto d = load(store_, learner_id);

    Preferences prefs = d.profile.preferences;
    for (const auto& [key, value] : edits["preferences"].items()) {
        if (key == "content_style") {
            if (!value.is_string()) throw ValidationError("content_style must be a string");
            prefs.content_style = parse_content_style(value.get<std::string>());
        } else if (key == "activity_weights") {
            try {
                prefs.activity_weights = value.get<std::map<std::string, double>>();
            } catch (const json::exception&) {
                throw ValidationError("activity_weights must map activity names to numbers");
            }
        } else {
            throw ValidationError("unknown preference '" + key + "'");
        }
    }
    d.profile = apply_preference_edit(d.profile, prefs);
    store_.append(learner_id, json{{"type", "manual_edit"},
                                   {"preferences", prefs},
                                   {"profile_version", d.profile.version}});
    save(store_, d);
    return d.profile;
}

std::vector<Intervention> TutorService::interventions(const std::string& learner_id) const {
    return detect_interventions(get_profile(learner_id), settings_.profiler);
}

std::vector<json> TutorService::interaction_log(const std::string& learner_id) const {
    auto lock = lock_for(learner_id);
    std::shared_lock guard(*lock);
    load(store_, learner_id);
    return store_.read_log(learner_id);
}

LearnerProfile TutorService::replay_profile(const std::string& learner_id) const {
    auto lock = lock_for(learner_id);
    std::shared_lock guard(*lock);
    auto d = load(store_, learner_id);
    LearnerProfile p = d.initial_profile;
    for (const auto& entry : store_.read_log(learner_id)) {
        const auto type = entry.at("type").get<std::string>();
        if (type == "interaction") {
            p = apply_interaction(p, entry.at("interaction").get<InteractionRecord>(),
                                  entry.at("targets").get<std::vector<TargetedSkill>>(),
                                  entry.at("adjustment").get<ProfileAdjustment>(), settings_.profiler);
        } else if (type == "manual_edit") {
            p = apply_preference_edit(p, entry.at("preferences").get<Preferences>());
        } else {
            throw Error("unknown log entry type '" + type + "'");
        }
    }
    return p;
}

}  // namespace mentor
