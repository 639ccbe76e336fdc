#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mentor/gateway.hpp"
#include "mentor/model.hpp"

namespace mentor {

// Chain-of-thought trace behind a goal-to-skill mapping: goal -> key tasks ->
// skills per task -> proficiency rationale.
struct ReasoningTrack {
    std::vector<std::string> key_tasks;
    std::map<std::string, std::vector<std::string>> skills_per_task;
    std::map<std::string, std::string> proficiency_rationale;

    bool operator==(const ReasoningTrack&) const = default;
};

void to_json(json& j, const ReasoningTrack& v);
void from_json(const json& j, ReasoningTrack& v);

// Skills of `skills` that no skills_per_task entry mentions (normalized).
std::vector<std::string> uncovered_skills(const ReasoningTrack& track, std::span<const Skill> skills);

// Output schema shared by the goal mapper and the dataset CoT generator.
json reasoning_track_schema();
json skill_schema();

struct SkillMapping {
    std::vector<Skill> required;
    ReasoningTrack track;
    int attempts = 1;
};

// Prompting presets for A/B comparisons. Tracked mirrors the full reasoning
// pipeline; Direct asks for skills in one unstructured request; ChainOfThought
// asks for one request with a reasoning instruction.
enum class MappingPreset { Tracked, Direct, ChainOfThought };

class SkillIdentifier {
public:
    explicit SkillIdentifier(const Gateway& gateway) : gateway_(gateway) {}

    // Goal -> required skills with a reasoning track that covers every skill.
    SkillMapping map_goal_to_skills(const LearningGoal& goal,
                                    MappingPreset preset = MappingPreset::Tracked) const;

    // The model proposes mastered names from onboarding_info; the gap itself
    // is plain set algebra. Proposals outside `required` are discarded.
    SkillGap identify_skill_gap(std::span<const Skill> required, const std::string& onboarding_info) const;

private:
    const Gateway& gateway_;
};

}  // namespace mentor
