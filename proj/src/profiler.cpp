#include "mentor/profiler.hpp"

#include <algorithm>
#include <cmath>

#include "mentor/prompts.hpp"

namespace mentor {

void to_json(json& j, const ProfileAdjustment& v) {
    j = json{{"content_style", v.content_style ? json(*v.content_style) : json(nullptr)},
             {"activity_shifts", v.activity_shifts},
             {"engagement_flags", v.engagement_flags},
             {"annotation", v.annotation}};
}

void from_json(const json& j, ProfileAdjustment& v) {
    v.content_style.reset();
    if (j.contains("content_style") && !j["content_style"].is_null()) {
        v.content_style = parse_content_style(j["content_style"].get<std::string>());
    }
    v.activity_shifts = j.value("activity_shifts", std::map<std::string, double>{});
    v.engagement_flags.clear();
    for (const auto& f : j.value("engagement_flags", json::array())) {
        v.engagement_flags.push_back(parse_engagement_flag(f.get<std::string>()));
    }
    v.annotation = j.value("annotation", "");
}

void to_json(json& j, const TargetedSkill& v) { j = json{{"name", v.name}, {"target_mastery", v.target_mastery}}; }
void from_json(const json& j, TargetedSkill& v) {
    v.name = j.at("name").get<std::string>();
    v.target_mastery = j.at("target_mastery").get<double>();
}

void to_json(json& j, const Intervention& v) { j = json{{"kind", v.kind}, {"reason", v.reason}}; }

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

constexpr double kMsPerWeek = 7.0 * 24 * 3600 * 1000;

void fold_behavior(BehaviorPatterns& b, const InteractionRecord& rec, const ProfilerSettings& s) {
    // Welford update on population statistics.
    const auto n = static_cast<double>(b.sessions_observed);
    const double mean = b.session_duration_stats.mean_minutes;
    const double m2 = b.session_duration_stats.stddev_minutes * b.session_duration_stats.stddev_minutes * n;
    const double x = rec.time_spent_minutes;
    const double new_mean = mean + (x - mean) / (n + 1.0);
    const double new_m2 = m2 + (x - mean) * (x - new_mean);
    b.session_duration_stats.mean_minutes = new_mean;
    b.session_duration_stats.stddev_minutes = std::sqrt(std::max(0.0, new_m2 / (n + 1.0)));
    b.sessions_observed += 1;

    Timestamp first = rec.recorded_at;
    for (const auto& e : rec.events) first = std::min(first, e.at);
    if (!b.first_activity || first < *b.first_activity) b.first_activity = first;
    const double span_ms = static_cast<double>((rec.recorded_at - *b.first_activity).count());
    const double weeks = std::max(1.0, span_ms / kMsPerWeek);
    b.usage_frequency = static_cast<double>(b.sessions_observed) / weeks;

    std::set<EngagementFlag> flags;
    if (rec.quiz_score && *rec.quiz_score < s.struggling_score) flags.insert(EngagementFlag::Struggling);
    if (b.sessions_observed >= 2) {
        flags.insert(b.usage_frequency < s.low_usage_per_week ? EngagementFlag::Disengaged
                                                               : EngagementFlag::Consistent);
    }
    b.engagement_flags.assign(flags.begin(), flags.end());
}

}  // namespace

LearnerProfile apply_interaction(const LearnerProfile& profile, const InteractionRecord& interaction,
                                 std::span<const TargetedSkill> targets, const ProfileAdjustment& adjustment,
                                 const ProfilerSettings& settings) {
    interaction.validate();
    LearnerProfile next = profile;
    next.version = profile.version + 1;

    for (const auto& t : targets) {
        auto& mp = next.cognitive_status[normalize_skill_name(t.name)];
        double progress = clamp01(mp.progress + settings.progress_step);
        if (interaction.quiz_score) {
            mp.mastery = clamp01(std::max(mp.mastery, *interaction.quiz_score * t.target_mastery));
            if (t.target_mastery > 0.0) progress = std::max(progress, clamp01(mp.mastery / t.target_mastery));
        }
        mp.progress = std::max(mp.progress, progress);
    }

    fold_behavior(next.behavior_patterns, interaction, settings);

    if (adjustment.content_style) next.preferences.content_style = *adjustment.content_style;
    for (const auto& [activity, shift] : adjustment.activity_shifts) {
        const double bounded = std::clamp(shift, -settings.max_weight_shift, settings.max_weight_shift);
        auto& w = next.preferences.activity_weights[activity];
        w = clamp01(w + bounded);
    }
    if (!adjustment.engagement_flags.empty()) {
        std::set<EngagementFlag> flags(next.behavior_patterns.engagement_flags.begin(),
                                       next.behavior_patterns.engagement_flags.end());
        flags.insert(adjustment.engagement_flags.begin(), adjustment.engagement_flags.end());
        next.behavior_patterns.engagement_flags.assign(flags.begin(), flags.end());
    }
    if (!adjustment.annotation.empty()) next.annotations.push_back(adjustment.annotation);
    next.validate();
    return next;
}

LearnerProfile apply_preference_edit(const LearnerProfile& profile, const Preferences& preferences) {
    LearnerProfile next = profile;
    next.preferences = preferences;
    next.version = profile.version + 1;
    next.validate();
    return next;
}

std::vector<Intervention> detect_interventions(const LearnerProfile& profile, const ProfilerSettings& settings) {
    std::vector<Intervention> out;
    const auto& b = profile.behavior_patterns;
    if (b.sessions_observed == 0) return out;
    if (b.usage_frequency < settings.low_usage_per_week) {
        out.push_back({InterventionKind::MotivationalPrompt,
                       "usage of " + std::to_string(b.usage_frequency) + " sessions/week is below " +
                           std::to_string(settings.low_usage_per_week)});
    }
    if (b.session_duration_stats.mean_minutes > settings.long_session_minutes) {
        out.push_back({InterventionKind::DifficultyAdjust,
                       "mean session of " + std::to_string(b.session_duration_stats.mean_minutes) +
                           " min exceeds " + std::to_string(settings.long_session_minutes)});
    }
    return out;
}

std::vector<TargetedSkill> session_targets(const LearningSession& session, std::span<const Skill> required) {
    std::vector<TargetedSkill> out;
    for (const auto& name : session.target_skills) {
        auto key = normalize_skill_name(name);
        auto it = std::find_if(required.begin(), required.end(),
                               [&](const Skill& s) { return normalize_skill_name(s.name) == key; });
        if (it == required.end()) throw ValidationError("session targets unknown skill '" + key + "'");
        out.push_back({key, target_mastery(it->target_proficiency)});
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

json adjustment_schema(bool with_weights) {
    json schema = {
        {"type", "object"},
        {"required", {"content_style", "annotation"}},
        {"properties",
         {{"content_style", {{"enum", {"concise", "detailed", "example-driven", nullptr}}}},
          {"engagement_flags",
           {{"type", "array"}, {"items", {{"enum", {"disengaged", "struggling", "consistent"}}}}}},
          {"annotation", {{"type", "string"}}}}},
    };
    if (with_weights) {
        schema["properties"]["activity_weights"] = {
            {"type", "object"}, {"additionalProperties", {{"type", "number"}, {"minimum", 0}, {"maximum", 1}}}};
    } else {
        schema["required"].push_back("activity_shifts");
        schema["properties"]["activity_shifts"] = {{"type", "object"},
                                                   {"additionalProperties", {{"type", "number"}}}};
    }
    return schema;
}

}  // namespace

LearnerProfile LearnerProfiler::init_profile(const std::string& learner_id, const std::string& onboarding_info,
                                             const SkillGap& gap) const {
    gap.validate();
    LearnerProfile p;
    p.learner_id = learner_id;
    p.onboarding_info = onboarding_info;
    p.version = 0;
    for (const auto& s : gap.mastered) {
        p.cognitive_status[normalize_skill_name(s.name)] = {target_mastery(s.target_proficiency), 0.0};
    }
    for (const auto& g : gap.gap) {
        p.cognitive_status[normalize_skill_name(g.skill.name)] = {g.current_mastery, 0.0};
    }
    const double uniform = 1.0 / static_cast<double>(kDefaultActivities.size());
    for (const auto& a : kDefaultActivities) p.preferences.activity_weights[a] = uniform;

    if (normalize_skill_name(onboarding_info).empty()) return p;

    json gap_names = json::array();
    for (const auto& g : gap.gap) gap_names.push_back(normalize_skill_name(g.skill.name));
    auto resp = gateway_.complete(make_model_request(roles::kLearnerProfiler, "profiler.init",
                                                     {{"onboarding_info", onboarding_info},
                                                      {"gap_skills", gap_names},
                                                      {"activities", kDefaultActivities}},
                                                     adjustment_schema(true)));
    const auto& out = resp.parsed;
    if (!out["content_style"].is_null()) {
        p.preferences.content_style = parse_content_style(out["content_style"].get<std::string>());
    }
    if (out.contains("activity_weights") && !out["activity_weights"].empty()) {
        p.preferences.activity_weights = out["activity_weights"].get<std::map<std::string, double>>();
    }
    for (const auto& f : out.value("engagement_flags", json::array())) {
        p.behavior_patterns.engagement_flags.push_back(parse_engagement_flag(f.get<std::string>()));
    }
    if (auto note = out.value("annotation", ""); !note.empty()) p.annotations.push_back(note);
    p.validate();
    return p;
}

ProfileAdjustment LearnerProfiler::interpret(const LearnerProfile& profile, const InteractionRecord& interaction,
                                             const LearningSession& session) const {
    if (!interaction.feedback_text || normalize_skill_name(*interaction.feedback_text).empty()) return {};
    auto resp = gateway_.complete(make_model_request(
        roles::kLearnerProfiler, "profiler.interpret",
        {{"profile", {{"preferences", profile.preferences}, {"behavior_patterns", profile.behavior_patterns}}},
         {"interaction", interaction},
         {"session", session},
         {"max_shift", settings_.max_weight_shift}},
        adjustment_schema(false)));
    return resp.parsed.get<ProfileAdjustment>();
}

ProfileUpdate LearnerProfiler::update_profile(const LearnerProfile& profile, const InteractionRecord& interaction,
                                              const LearningSession& session, std::span<const Skill> required,
                                              const std::string& goal_id) const {
    if (interaction.session_id != session.id) {
        throw ValidationError("interaction for session '" + interaction.session_id + "' applied to '" + session.id +
                              "'");
    }
    auto targets = session_targets(session, required);
    auto adjustment = interpret(profile, interaction, session);
    ProfileUpdate out;
    out.profile = apply_interaction(profile, interaction, targets, adjustment, settings_);
    out.gap = recompute_gap(goal_id, required, out.profile.cognitive_status, settings_.mastery_threshold,
                            out.profile.version);
    out.adjustment = std::move(adjustment);
    return out;
}

}  // namespace mentor
