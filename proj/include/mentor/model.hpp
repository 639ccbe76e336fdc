#pragma once

// Domain types shared by every agent and the tutor service. All types are
// plain values; "mutation" produces a new value with a bumped version.

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace mentor {

using json = nlohmann::json;
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

Timestamp now_ms();
// ISO-8601 UTC with millisecond precision, e.g. "2026-10-15T02:07:00.000Z".
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view text);

// Lowercase, trim, collapse inner whitespace runs to a single space.
std::string normalize_skill_name(std::string_view name);

// ---------------------------------------------------------------------------
// Enumerations

enum class Proficiency { Novice, Beginner, Intermediate, Advanced, Expert };

// Mastery level on [0,1] that a proficiency ordinal asks for.
double target_mastery(Proficiency p) noexcept;
// 1 (novice) .. 5 (expert).
int proficiency_rank(Proficiency p) noexcept;

enum class ContentStyle { Concise, Detailed, ExampleDriven };
enum class EngagementFlag { Disengaged, Struggling, Consistent };
enum class SessionStatus { Pending, Active, Completed };
enum class KnowledgeCategory { Foundational, Practical, ProblemSolving };
enum class EventType { Opened, CompletedSection, SubmittedQuiz, AskedQuestion };

NLOHMANN_JSON_SERIALIZE_ENUM(Proficiency, {
    {Proficiency::Novice, "novice"},
    {Proficiency::Beginner, "beginner"},
    {Proficiency::Intermediate, "intermediate"},
    {Proficiency::Advanced, "advanced"},
    {Proficiency::Expert, "expert"},
})
NLOHMANN_JSON_SERIALIZE_ENUM(ContentStyle, {
    {ContentStyle::Concise, "concise"},
    {ContentStyle::Detailed, "detailed"},
    {ContentStyle::ExampleDriven, "example-driven"},
})
NLOHMANN_JSON_SERIALIZE_ENUM(EngagementFlag, {
    {EngagementFlag::Disengaged, "disengaged"},
    {EngagementFlag::Struggling, "struggling"},
    {EngagementFlag::Consistent, "consistent"},
})
NLOHMANN_JSON_SERIALIZE_ENUM(SessionStatus, {
    {SessionStatus::Pending, "pending"},
    {SessionStatus::Active, "active"},
    {SessionStatus::Completed, "completed"},
})
NLOHMANN_JSON_SERIALIZE_ENUM(KnowledgeCategory, {
    {KnowledgeCategory::Foundational, "foundational"},
    {KnowledgeCategory::Practical, "practical"},
    {KnowledgeCategory::ProblemSolving, "problem_solving"},
})
NLOHMANN_JSON_SERIALIZE_ENUM(EventType, {
    {EventType::Opened, "opened"},
    {EventType::CompletedSection, "completed_section"},
    {EventType::SubmittedQuiz, "submitted_quiz"},
    {EventType::AskedQuestion, "asked_question"},
})

// The enum macros above map unknown strings to the first enumerator; these
// strict parsers throw ValidationError instead.
Proficiency parse_proficiency(std::string_view s);
ContentStyle parse_content_style(std::string_view s);
EngagementFlag parse_engagement_flag(std::string_view s);
SessionStatus parse_session_status(std::string_view s);
KnowledgeCategory parse_category(std::string_view s);
EventType parse_event_type(std::string_view s);

// ---------------------------------------------------------------------------
// Aggregates

struct LearningGoal {
    std::string id;
    std::string title;
    std::string description;
    Timestamp created_at{};

    void validate() const;
    bool operator==(const LearningGoal&) const = default;
};

struct Skill {
    std::string name;
    std::string category;
    Proficiency target_proficiency = Proficiency::Intermediate;
    std::string rationale;

    bool operator==(const Skill&) const = default;
};

// Throws ValidationError when two skills collide after normalization or a
// name is empty.
void require_unique_skill_names(std::span<const Skill> skills);
// Keeps the first occurrence of each normalized name, preserving order.
std::vector<Skill> dedupe_skills(std::span<const Skill> skills);

struct GapSkill {
    Skill skill;
    double current_mastery = 0.0;

    bool operator==(const GapSkill&) const = default;
};

struct SkillGap {
    std::string goal_id;
    std::vector<Skill> required;
    std::vector<Skill> mastered;
    std::vector<GapSkill> gap;
    std::int64_t version = 0;

    std::set<std::string> gap_names() const;       // normalized
    std::set<std::string> required_names() const;  // normalized
    bool empty() const noexcept { return gap.empty(); }
    void validate() const;
    bool operator==(const SkillGap&) const = default;
};

// Default mastery level at which a skill leaves the gap.
inline constexpr double kDefaultMasteryThreshold = 0.8;

// A skill whose target sits below the global threshold leaves the gap once its
// own target is reached.
double leave_threshold(const Skill& skill, double mastery_threshold) noexcept;

// Set difference under name normalization. Mastered names outside `required`
// are ignored.
SkillGap compute_gap(std::span<const Skill> required, const std::set<std::string>& mastered_names);

struct MasteryProgress {
    double mastery = 0.0;
    double progress = 0.0;

    bool operator==(const MasteryProgress&) const = default;
};

struct Preferences {
    ContentStyle content_style = ContentStyle::Concise;
    std::map<std::string, double> activity_weights;

    bool operator==(const Preferences&) const = default;
};

struct DurationStats {
    double mean_minutes = 0.0;
    double stddev_minutes = 0.0;

    bool operator==(const DurationStats&) const = default;
};

struct BehaviorPatterns {
    double usage_frequency = 0.0;  // sessions per week
    DurationStats session_duration_stats;
    std::vector<EngagementFlag> engagement_flags;
    std::int64_t sessions_observed = 0;
    std::optional<Timestamp> first_activity;

    bool operator==(const BehaviorPatterns&) const = default;
};

struct LearnerProfile {
    std::string learner_id;
    // keyed by normalized skill name
    std::map<std::string, MasteryProgress> cognitive_status;
    Preferences preferences;
    BehaviorPatterns behavior_patterns;
    std::int64_t version = 0;
    std::string onboarding_info;
    // Free-text insights from the profiler model; never read as control state.
    std::vector<std::string> annotations;

    void validate() const;
    bool operator==(const LearnerProfile&) const = default;
};

// Gap implied by a cognitive status: a required skill is mastered once its
// mastery reaches leave_threshold(). Pure; recompute(recompute(x)) == recompute(x).
SkillGap recompute_gap(const std::string& goal_id, std::span<const Skill> required,
                       const std::map<std::string, MasteryProgress>& cognitive_status,
                       double mastery_threshold, std::int64_t version);

struct LearningSession {
    std::string id;
    std::string title;
    std::vector<std::string> target_skills;
    int difficulty = 1;  // 1..5
    int estimated_minutes = 30;
    SessionStatus status = SessionStatus::Pending;

    bool operator==(const LearningSession&) const = default;
};

struct LearningPath {
    std::string id;
    std::string goal_id;
    std::vector<LearningSession> sessions;
    std::int64_t version = 0;
    bool approved = false;

    const LearningSession* find(std::string_view session_id) const;
    std::size_t pending_count() const;
    bool operator==(const LearningPath&) const = default;
};

// Structural checks on a path: unique ids, session field ranges, target skills
// drawn from `required_names`, monotone pending difficulty, and coverage of
// every name in `gap_names`. Returns a list of human-readable violations.
std::vector<std::string> path_violations(const LearningPath& path,
                                         const std::set<std::string>& required_names,
                                         const std::set<std::string>& gap_names);
// Completed sessions of `previous` that are missing or altered in `next`.
std::vector<std::string> preservation_violations(const LearningPath& previous,
                                                 const LearningPath& next);

struct OutlineSection {
    std::string title;
    std::vector<std::string> knowledge_points;
    KnowledgeCategory category = KnowledgeCategory::Foundational;

    bool operator==(const OutlineSection&) const = default;
};

struct QuizQuestion {
    std::string stem;
    std::vector<std::string> options;
    int correct_index = 0;
    std::string explanation;

    bool operator==(const QuizQuestion&) const = default;
};

struct SourceRef {
    std::string origin;  // url, or a provenance tag such as "unsourced"
    std::string snippet;

    bool operator==(const SourceRef&) const = default;
};

struct SessionContent {
    std::string session_id;
    std::vector<OutlineSection> outline;
    std::map<std::string, std::string> drafts;  // section title -> text
    std::string document;
    std::vector<QuizQuestion> quiz;
    std::vector<SourceRef> sources;
    bool unsourced = false;

    void validate() const;
    bool operator==(const SessionContent&) const = default;
};

std::vector<std::string> outline_violations(const std::vector<OutlineSection>& outline);
std::vector<std::string> quiz_violations(const std::vector<QuizQuestion>& quiz);

struct InteractionEvent {
    Timestamp at{};
    EventType type = EventType::Opened;

    bool operator==(const InteractionEvent&) const = default;
};

struct InteractionRecord {
    std::string learner_id;
    std::string session_id;
    std::optional<double> quiz_score;
    double time_spent_minutes = 0.0;
    std::optional<std::string> feedback_text;
    std::vector<InteractionEvent> events;
    Timestamp recorded_at{};

    void validate() const;
    bool operator==(const InteractionRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Document serialization; field names follow the type definitions.

void to_json(json& j, const LearningGoal& v);
void from_json(const json& j, LearningGoal& v);
void to_json(json& j, const Skill& v);
void from_json(const json& j, Skill& v);
void to_json(json& j, const GapSkill& v);
void from_json(const json& j, GapSkill& v);
void to_json(json& j, const SkillGap& v);
void from_json(const json& j, SkillGap& v);
void to_json(json& j, const MasteryProgress& v);
void from_json(const json& j, MasteryProgress& v);
void to_json(json& j, const Preferences& v);
void from_json(const json& j, Preferences& v);
void to_json(json& j, const BehaviorPatterns& v);
void from_json(const json& j, BehaviorPatterns& v);
void to_json(json& j, const LearnerProfile& v);
void from_json(const json& j, LearnerProfile& v);
void to_json(json& j, const LearningSession& v);
void from_json(const json& j, LearningSession& v);
void to_json(json& j, const LearningPath& v);
void from_json(const json& j, LearningPath& v);
void to_json(json& j, const OutlineSection& v);
void from_json(const json& j, OutlineSection& v);
void to_json(json& j, const QuizQuestion& v);
void from_json(const json& j, QuizQuestion& v);
void to_json(json& j, const SourceRef& v);
void from_json(const json& j, SourceRef& v);
void to_json(json& j, const SessionContent& v);
void from_json(const json& j, SessionContent& v);
void to_json(json& j, const InteractionEvent& v);
void from_json(const json& j, InteractionEvent& v);
void to_json(json& j, const InteractionRecord& v);
void from_json(const json& j, InteractionRecord& v);

}  // namespace mentor
