#include "mentor/skill_identifier.hpp"

#include "mentor/prompts.hpp"

namespace mentor {

void to_json(json& j, const ReasoningTrack& v) {
    j = json{{"key_tasks", v.key_tasks},
             {"skills_per_task", v.skills_per_task},
             {"proficiency_rationale", v.proficiency_rationale}};
}

void from_json(const json& j, ReasoningTrack& v) {
    v.key_tasks = j.at("key_tasks").get<std::vector<std::string>>();
    v.skills_per_task = j.at("skills_per_task").get<std::map<std::string, std::vector<std::string>>>();
    v.proficiency_rationale = j.value("proficiency_rationale", std::map<std::string, std::string>{});
}

std::vector<std::string> uncovered_skills(const ReasoningTrack& track, std::span<const Skill> skills) {
    std::set<std::string> mentioned;
    for (const auto& [task, names] : track.skills_per_task) {
        for (const auto& n : names) mentioned.insert(normalize_skill_name(n));
    }
    std::vector<std::string> out;
    for (const auto& s : skills) {
        auto key = normalize_skill_name(s.name);
        if (!mentioned.contains(key)) out.push_back(key);
    }
    return out;
}

json skill_schema() {
    return {
        {"type", "object"},
        {"required", {"name", "target_proficiency"}},
        {"properties",
         {{"name", {{"type", "string"}, {"minLength", 1}}},
          {"category", {{"type", "string"}}},
          {"target_proficiency", {{"enum", {"novice", "beginner", "intermediate", "advanced", "expert"}}}},
          {"rationale", {{"type", "string"}}}}},
    };
}

json reasoning_track_schema() {
    return {
        {"type", "object"},
        {"required", {"key_tasks", "skills_per_task", "proficiency_rationale"}},
        {"properties",
         {{"key_tasks", {{"type", "array"}, {"minItems", 1}, {"items", {{"type", "string"}}}}},
          {"skills_per_task",
           {{"type", "object"},
            {"additionalProperties", {{"type", "array"}, {"items", {{"type", "string"}}}}}}},
          {"proficiency_rationale", {{"type", "object"}, {"additionalProperties", {{"type", "string"}}}}}}},
    };
}

namespace {

json mapping_schema(MappingPreset preset) {
    json skills = {{"type", "array"}, {"minItems", 1}, {"items", skill_schema()}};
    if (preset != MappingPreset::Tracked) {
        return {{"type", "object"}, {"required", {"skills"}}, {"properties", {{"skills", skills}}}};
    }
    json schema = reasoning_track_schema();
    schema["required"].push_back("skills");
    schema["properties"]["skills"] = skills;
    return schema;
}

const char* preset_template(MappingPreset preset) {
    switch (preset) {
        case MappingPreset::Direct: return "skill_identifier.baseline_direct";
        case MappingPreset::ChainOfThought: return "skill_identifier.baseline_cot";
        case MappingPreset::Tracked: break;
    }
    return "skill_identifier.map_goal";
}

std::vector<Skill> parse_skills(const json& arr) {
    std::vector<Skill> out;
    for (const auto& s : arr) {
        Skill skill;
        skill.name = normalize_skill_name(s.at("name").get<std::string>());
        skill.category = s.value("category", "");
        skill.target_proficiency = parse_proficiency(s.at("target_proficiency").get<std::string>());
        skill.rationale = s.value("rationale", "");
        out.push_back(std::move(skill));
    }
    return out;
}

}  // namespace

SkillMapping SkillIdentifier::map_goal_to_skills(const LearningGoal& goal, MappingPreset preset) const {
    goal.validate();
    json input = {{"goal", {{"title", goal.title}, {"description", goal.description}}},
                  {"min_skills", 4},
                  {"max_skills", 12}};

    OutputCheck check = [preset](const json& out) {
        std::vector<std::string> problems;
        auto skills = parse_skills(out.at("skills"));
        try {
            require_unique_skill_names(skills);
        } catch (const ValidationError& e) {
            problems.push_back(e.what());
        }
        if (preset == MappingPreset::Tracked) {
            auto track = out.get<ReasoningTrack>();
            for (const auto& name : uncovered_skills(track, skills)) {
                problems.push_back("skill '" + name + "' does not appear under any key task");
            }
            for (const auto& [task, _] : track.skills_per_task) {
                if (std::find(track.key_tasks.begin(), track.key_tasks.end(), task) == track.key_tasks.end()) {
                    problems.push_back("skills_per_task names unknown task '" + task + "'");
                }
            }
        }
        return problems;
    };

    auto resp = gateway_.complete(make_model_request(roles::kSkillIdentifier, preset_template(preset),
                                                     std::move(input), mapping_schema(preset), check));
    SkillMapping out;
    out.required = parse_skills(resp.parsed.at("skills"));
    out.attempts = resp.attempts;
    if (preset == MappingPreset::Tracked) {
        out.track = resp.parsed.get<ReasoningTrack>();
        for (const auto& s : out.required) {
            if (!out.track.proficiency_rationale.contains(s.name) && !s.rationale.empty()) {
                out.track.proficiency_rationale[s.name] = s.rationale;
            }
        }
    }
    return out;
}

SkillGap SkillIdentifier::identify_skill_gap(std::span<const Skill> required,
                                             const std::string& onboarding_info) const {
    if (required.empty()) throw ValidationError("required skill set is empty");
    require_unique_skill_names(required);

    json req = json::array();
    for (const auto& s : required) {
        req.push_back({{"name", normalize_skill_name(s.name)}, {"target_proficiency", s.target_proficiency}});
    }
    json schema = {{"type", "object"},
                   {"required", {"mastered"}},
                   {"properties", {{"mastered", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}};
    auto resp = gateway_.complete(make_model_request(
        roles::kSkillIdentifier, "skill_identifier.identify_mastered",
        {{"required", req}, {"onboarding_info", onboarding_info}}, schema));

    std::set<std::string> proposed;
    for (const auto& n : resp.parsed.at("mastered")) proposed.insert(normalize_skill_name(n.get<std::string>()));
    // compute_gap only keeps names that are in `required`.
    return compute_gap(required, proposed);
}

}  // namespace mentor
