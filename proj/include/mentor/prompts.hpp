#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mentor/gateway.hpp"

namespace mentor {

// Agent role names used for backend routing.
namespace roles {
inline constexpr const char* kSkillIdentifier = "skill-identifier";
inline constexpr const char* kDatasetBuilder = "dataset-builder";
inline constexpr const char* kLearnerProfiler = "learner-profiler";
inline constexpr const char* kLearnerSimulator = "learner-simulator";
inline constexpr const char* kPathScheduler = "path-scheduler";
inline constexpr const char* kContentCreator = "content-creator";
inline constexpr const char* kJudge = "judge";
}  // namespace roles

// A prompt template loaded from assets/prompts/<name>.v<version>.txt. The file
// holds the system text, a "---- user ----" separator line, then the user
// text containing an {{input}} placeholder.
struct PromptTemplate {
    std::string name;
    int version = 0;
    std::string system;
    std::string user;
};

// Latest version of the named template; ConfigError if unknown.
const PromptTemplate& prompt_template(std::string_view name);
std::vector<std::string> prompt_template_names();

// Builds a request whose user prompt embeds `input` (which gains a "task"
// member equal to the template name) between <input> tags.
ModelRequest make_model_request(const std::string& role_name, const std::string& template_name,
                                json input, json output_schema, OutputCheck check = {});

// Recovers the structured input embedded by make_model_request from the
// first user message of a chat. Test doubles use this to answer by task.
std::optional<json> prompt_input(const ChatRequest& request);

}  // namespace mentor
