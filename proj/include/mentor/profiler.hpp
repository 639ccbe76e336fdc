#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mentor/gateway.hpp"
#include "mentor/model.hpp"

namespace mentor {

struct ProfilerSettings {
    double mastery_threshold = kDefaultMasteryThreshold;
    // Progress gained by a session that has no quiz score.
    double progress_step = 0.25;
    // Largest change a single update may apply to any activity weight.
    double max_weight_shift = 0.1;
    double low_usage_per_week = 1.0;
    double long_session_minutes = 60.0;
    // Quiz scores below this flag the learner as struggling.
    double struggling_score = 0.5;
};

inline const std::vector<std::string> kDefaultActivities = {"reading", "querying", "exercises"};

// Preference/behavior adjustment proposed by the profiler model for one
// interaction. Stored in the interaction log so replays need no model call.
struct ProfileAdjustment {
    std::optional<ContentStyle> content_style;
    std::map<std::string, double> activity_shifts;  // clamped to +-max_weight_shift on apply
    std::vector<EngagementFlag> engagement_flags;
    std::string annotation;

    bool operator==(const ProfileAdjustment&) const = default;
};

void to_json(json& j, const ProfileAdjustment& v);
void from_json(const json& j, ProfileAdjustment& v);

struct TargetedSkill {
    std::string name;  // normalized
    double target_mastery = 1.0;

    bool operator==(const TargetedSkill&) const = default;
};

void to_json(json& j, const TargetedSkill& v);
void from_json(const json& j, TargetedSkill& v);

struct ProfileUpdate {
    LearnerProfile profile;
    SkillGap gap;
    ProfileAdjustment adjustment;
};

enum class InterventionKind { MotivationalPrompt, DifficultyAdjust };

NLOHMANN_JSON_SERIALIZE_ENUM(InterventionKind, {
    {InterventionKind::MotivationalPrompt, "motivational_prompt"},
    {InterventionKind::DifficultyAdjust, "difficulty_adjust"},
})

struct Intervention {
    InterventionKind kind;
    std::string reason;

    bool operator==(const Intervention&) const = default;
};

void to_json(json& j, const Intervention& v);

// Deterministic half of a profile update: applies the mastery rule
// mastery <- max(old, score * target) and the progress rule to the targeted
// skills only, folds the interaction into behavior statistics, applies the
// (bounded) model adjustment, and bumps the version by one.
LearnerProfile apply_interaction(const LearnerProfile& profile, const InteractionRecord& interaction,
                                 std::span<const TargetedSkill> targets, const ProfileAdjustment& adjustment,
                                 const ProfilerSettings& settings = {});

// Manual learner edit of preferences only; bumps the version by one.
LearnerProfile apply_preference_edit(const LearnerProfile& profile, const Preferences& preferences);

// Motivational prompt for infrequent use, difficulty adjustment for long
// sessions. A profile with no observed sessions yields nothing.
std::vector<Intervention> detect_interventions(const LearnerProfile& profile, const ProfilerSettings& settings = {});

class LearnerProfiler {
public:
    LearnerProfiler(const Gateway& gateway, ProfilerSettings settings = {})
        : gateway_(gateway), settings_(settings) {}

    const ProfilerSettings& settings() const noexcept { return settings_; }

    // U0: cognitive status from the gap, preferences from onboarding text.
    // Empty onboarding text skips the model and uses defaults.
    LearnerProfile init_profile(const std::string& learner_id, const std::string& onboarding_info,
                                const SkillGap& gap) const;

    // Model interpretation of feedback text; empty adjustment when the
    // interaction carries no feedback.
    ProfileAdjustment interpret(const LearnerProfile& profile, const InteractionRecord& interaction,
                                const LearningSession& session) const;

    // U_t and the recomputed gap. `required` is the goal's full skill set.
    ProfileUpdate update_profile(const LearnerProfile& profile, const InteractionRecord& interaction,
                                 const LearningSession& session, std::span<const Skill> required,
                                 const std::string& goal_id) const;

private:
    const Gateway& gateway_;
    ProfilerSettings settings_;
};

// Targets of a session resolved against the goal's skills.
std::vector<TargetedSkill> session_targets(const LearningSession& session, std::span<const Skill> required);

}  // namespace mentor
