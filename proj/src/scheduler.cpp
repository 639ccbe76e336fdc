#include "mentor/scheduler.hpp"

#include <algorithm>

#include "mentor/prompts.hpp"

namespace mentor {

namespace {

json sessions_schema(bool with_notes) {
    json session = {
        {"type", "object"},
        {"required", {"title", "target_skills", "difficulty", "estimated_minutes"}},
        {"properties",
         {{"id", {{"type", {"string", "null"}}}},
          {"title", {{"type", "string"}, {"minLength", 1}}},
          {"target_skills", {{"type", "array"}, {"minItems", 1}, {"items", {{"type", "string"}}}}},
          {"difficulty", {{"type", "integer"}, {"minimum", 1}, {"maximum", 5}}},
          {"estimated_minutes", {{"type", "integer"}, {"minimum", 1}}},
          {"rationale", {{"type", "string"}}}}},
    };
    json schema = {{"type", "object"},
                   {"required", {"sessions"}},
                   {"properties", {{"sessions", {{"type", "array"}, {"items", session}}}}}};
    if (with_notes) {
        schema["required"].push_back("change_notes");
        schema["properties"]["change_notes"] = {{"type", "object"},
                                                {"additionalProperties", {{"type", "string"}}}};
    }
    return schema;
}

json gap_input(const SkillGap& gap) {
    json out = json::array();
    for (const auto& g : gap.gap) {
        out.push_back({{"name", normalize_skill_name(g.skill.name)},
                       {"target_proficiency", g.skill.target_proficiency},
                       {"current_mastery", g.current_mastery}});
    }
    return out;
}

json profile_input(const LearnerProfile& p) {
    return {{"cognitive_status", p.cognitive_status},
            {"preferences", p.preferences},
            {"behavior_patterns", p.behavior_patterns}};
}

}  // namespace

PathScheduler::PathScheduler(const Gateway& gateway, const LearnerSimulator& simulator,
                             std::shared_ptr<IdSource> ids, SchedulerSettings settings)
    : gateway_(gateway), simulator_(simulator), ids_(std::move(ids)), settings_(settings) {
    if (!ids_) ids_ = std::make_shared<RandomIds>();
    if (settings_.max_sessions < 1) throw ConfigError("max_sessions must be >= 1");
    if (settings_.refinement_budget < 0) throw ConfigError("refinement_budget must be >= 0");
}

OutputCheck PathScheduler::session_check(const SkillGap& gap, const LearningPath* previous,
                                         std::vector<std::string> required_notes) const {
    const auto required = gap.required_names();
    const auto gap_names = gap.gap_names();
    const int max_sessions = settings_.max_sessions;
    std::set<std::string> completed_ids;
    std::set<std::string> covered_by_completed;
    if (previous != nullptr) {
        for (const auto& s : previous->sessions) {
            if (s.status != SessionStatus::Completed) continue;
            completed_ids.insert(s.id);
            for (const auto& t : s.target_skills) covered_by_completed.insert(normalize_skill_name(t));
        }
    }
    return [=](const json& out) {
        std::vector<std::string> problems;
        std::set<std::string> covered = covered_by_completed;
        int open_sessions = 0;
        for (const auto& s : out.at("sessions")) {
            const bool completed = s.contains("id") && s["id"].is_string() &&
                                   completed_ids.contains(s["id"].get<std::string>());
            if (!completed) ++open_sessions;
            for (const auto& t : s.at("target_skills")) {
                auto key = normalize_skill_name(t.get<std::string>());
                if (!required.contains(key)) {
                    problems.push_back("session '" + s.at("title").get<std::string>() + "' targets '" + key +
                                       "', which is not a required skill");
                }
                covered.insert(key);
            }
        }
        for (const auto& g : gap_names) {
            if (!covered.contains(g)) problems.push_back("gap skill '" + g + "' is not covered by any session");
        }
        if (open_sessions > max_sessions) {
            problems.push_back("at most " + std::to_string(max_sessions) + " open sessions are allowed");
        }
        if (!gap_names.empty() && open_sessions == 0) problems.push_back("the path has no sessions");
        if (!required_notes.empty()) {
            const json notes = out.value("change_notes", json::object());
            for (const auto& loc : required_notes) {
                if (!notes.contains(loc)) {
                    problems.push_back("requested change for '" + loc + "' is neither applied nor justified");
                }
            }
        }
        return problems;
    };
}

LearningPath PathScheduler::finalize(const json& sessions, const LearningPath* previous, const std::string& path_id,
                                     const std::string& goal_id, std::int64_t version) const {
    std::vector<LearningSession> completed;
    std::vector<LearningSession> open;
    std::set<std::string> used;

    for (const auto& s : sessions) {
        LearningSession ses;
        ses.title = s.at("title").get<std::string>();
        for (const auto& t : s.at("target_skills")) {
            auto key = normalize_skill_name(t.get<std::string>());
            if (std::find(ses.target_skills.begin(), ses.target_skills.end(), key) == ses.target_skills.end()) {
                ses.target_skills.push_back(key);
            }
        }
        ses.difficulty = s.at("difficulty").get<int>();
        ses.estimated_minutes = s.at("estimated_minutes").get<int>();
        ses.status = SessionStatus::Pending;

        const LearningSession* prior = nullptr;
        if (s.contains("id") && s["id"].is_string() && previous != nullptr) {
            prior = previous->find(s["id"].get<std::string>());
        }
        if (prior != nullptr && !used.contains(prior->id)) {
            ses.id = prior->id;
            if (prior->status == SessionStatus::Completed) {
                completed.push_back(*prior);  // verbatim
                used.insert(prior->id);
                continue;
            }
            ses.status = prior->status;
        } else {
            ses.id = ids_->next("ses");
        }
        used.insert(ses.id);
        open.push_back(std::move(ses));
    }

    // Preservation: completed sessions the model dropped come back verbatim.
    if (previous != nullptr) {
        std::vector<LearningSession> ordered;
        for (const auto& s : previous->sessions) {
            if (s.status == SessionStatus::Completed) ordered.push_back(s);
        }
        completed = std::move(ordered);
    }

    // Difficulty: stable sort of pending sessions within their own slots.
    std::vector<std::size_t> slots;
    std::vector<LearningSession> pending;
    for (std::size_t i = 0; i < open.size(); ++i) {
        if (open[i].status == SessionStatus::Pending) {
            slots.push_back(i);
            pending.push_back(open[i]);
        }
    }
    std::stable_sort(pending.begin(), pending.end(),
                     [](const auto& a, const auto& b) { return a.difficulty < b.difficulty; });
    for (std::size_t k = 0; k < slots.size(); ++k) open[slots[k]] = std::move(pending[k]);

    LearningPath path;
    path.id = path_id;
    path.goal_id = goal_id;
    path.version = version;
    path.approved = false;
    path.sessions = std::move(completed);
    path.sessions.insert(path.sessions.end(), open.begin(), open.end());
    return path;
}

LearningPath PathScheduler::draft_initial(const LearnerProfile& profile, const SkillGap& gap) const {
    if (gap.empty()) throw ValidationError("nothing to schedule: the skill gap is empty");
    gap.validate();
    auto resp = gateway_.complete(make_model_request(
        roles::kPathScheduler, "scheduler.schedule",
        {{"profile", profile_input(profile)}, {"gap", gap_input(gap)}, {"max_sessions", settings_.max_sessions}},
        sessions_schema(false), session_check(gap, nullptr, {})));
    auto path = finalize(resp.parsed.at("sessions"), nullptr, ids_->next("path"), gap.goal_id, 0);
    auto v = path_violations(path, gap.required_names(), gap.gap_names());
    if (!v.empty()) throw ValidationError("scheduled path invalid: " + v.front());
    return path;
}

RefinementOutcome PathScheduler::refine_loop(const LearnerProfile& profile, const SkillGap& gap,
                                             LearningPath path) const {
    RefinementOutcome out;
    for (int round = 0; round < settings_.refinement_budget; ++round) {
        auto fb = simulator_.simulate_path_feedback(profile, path);
        ++out.simulator_calls;
        out.feedback.push_back(fb);
        if (fb.satisfied()) break;
        path = refine_with_feedback(path, fb, profile, gap);
    }
    out.path = std::move(path);
    return out;
}

RefinementOutcome PathScheduler::schedule_with_trace(const LearnerProfile& profile, const SkillGap& gap) const {
    return refine_loop(profile, gap, draft_initial(profile, gap));
}

LearningPath PathScheduler::schedule_initial(const LearnerProfile& profile, const SkillGap& gap) const {
    return schedule_with_trace(profile, gap).path;
}

LearningPath PathScheduler::refine_with_feedback(const LearningPath& path, const SimulatedFeedback& feedback,
                                                 const LearnerProfile& profile, const SkillGap& gap) const {
    if (feedback.target_kind != FeedbackTarget::Path) throw ValidationError("refinement needs path feedback");
    validate_feedback(feedback, path);
    if (feedback.satisfied()) return path;

    std::vector<std::string> locators;
    for (const auto& c : feedback.requested_changes) locators.push_back(c.locator);
    auto resp = gateway_.complete(make_model_request(
        roles::kPathScheduler, "scheduler.refine",
        {{"profile", profile_input(profile)},
         {"gap", gap_input(gap)},
         {"path", path},
         {"feedback", feedback},
         {"max_sessions", settings_.max_sessions}},
        sessions_schema(true), session_check(gap, &path, locators)));
    auto next = finalize(resp.parsed.at("sessions"), &path, path.id, path.goal_id, path.version + 1);
    auto v = path_violations(next, gap.required_names(), gap.gap_names());
    auto p = preservation_violations(path, next);
    v.insert(v.end(), p.begin(), p.end());
    if (!v.empty()) throw ValidationError("refined path invalid: " + v.front());
    return next;
}

LearningPath prune_mastered_sessions(const LearningPath& path, const SkillGap& gap) {
    const auto gap_names = gap.gap_names();
    LearningPath out = path;
    std::erase_if(out.sessions, [&](const LearningSession& s) {
        if (s.status != SessionStatus::Pending) return false;
        return std::none_of(s.target_skills.begin(), s.target_skills.end(),
                            [&](const std::string& t) { return gap_names.contains(normalize_skill_name(t)); });
    });
    return out;
}

LearningPath PathScheduler::reschedule(const LearnerProfile& profile, const SkillGap& gap,
                                       const LearningPath& previous) const {
    const bool has_completed = std::any_of(previous.sessions.begin(), previous.sessions.end(),
                                           [](const auto& s) { return s.status == SessionStatus::Completed; });
    if (!has_completed && profile.version <= previous.version) {
        throw ValidationError("nothing new to reschedule from: no completed session and no newer profile");
    }
    gap.validate();
    auto baseline = prune_mastered_sessions(previous, gap);
    const std::string new_id = ids_->next("path");
    const std::int64_t version = previous.version + 1;

    if (gap.empty()) {
        LearningPath done = baseline;
        std::erase_if(done.sessions, [](const auto& s) { return s.status == SessionStatus::Pending; });
        done.id = new_id;
        done.version = version;
        done.approved = false;
        return done;
    }

    auto resp = gateway_.complete(make_model_request(
        roles::kPathScheduler, "scheduler.reschedule",
        {{"profile", profile_input(profile)},
         {"gap", gap_input(gap)},
         {"previous", baseline},
         {"max_sessions", settings_.max_sessions}},
        sessions_schema(false), session_check(gap, &previous, {})));
    auto next = finalize(resp.parsed.at("sessions"), &previous, new_id, previous.goal_id, version);
    auto v = path_violations(next, gap.required_names(), gap.gap_names());
    auto p = preservation_violations(previous, next);
    v.insert(v.end(), p.begin(), p.end());
    if (!v.empty()) throw ValidationError("rescheduled path invalid: " + v.front());
    return next;
}

LearningPath approve_path(LearningPath proposal) {
    if (proposal.approved) throw ConflictError("path " + proposal.id + " is already approved");
    proposal.approved = true;
    return proposal;
}

}  // namespace mentor
