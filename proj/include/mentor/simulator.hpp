#pragma once

#include <map>
#include <string>
#include <vector>

#include "mentor/gateway.hpp"
#include "mentor/model.hpp"

namespace mentor {

enum class FeedbackTarget { Path, Content };

NLOHMANN_JSON_SERIALIZE_ENUM(FeedbackTarget, {
    {FeedbackTarget::Path, "path"},
    {FeedbackTarget::Content, "content"},
})

struct RequestedChange {
    std::string locator;  // session id (paths) or section title (content)
    std::string request;

    bool operator==(const RequestedChange&) const = default;
};

struct SimulatedFeedback {
    FeedbackTarget target_kind = FeedbackTarget::Path;
    std::map<std::string, int> scores;  // criterion -> 1..5
    std::vector<RequestedChange> requested_changes;

    // Every score >= 4. Requested changes alone do not keep a loop going.
    bool satisfied() const;
    bool operator==(const SimulatedFeedback&) const = default;
};

void to_json(json& j, const RequestedChange& v);
void from_json(const json& j, RequestedChange& v);
void to_json(json& j, const SimulatedFeedback& v);
void from_json(const json& j, SimulatedFeedback& v);

const std::vector<std::string>& path_criteria();     // efficiency, engagement, difficulty_fit
const std::vector<std::string>& content_criteria();  // clarity, relevance, difficulty_fit

// Throws ValidationError unless all criteria for the target kind are scored
// within 1..5 and every locator names an element of the artifact.
void validate_feedback(const SimulatedFeedback& feedback, const LearningPath& path);
void validate_feedback(const SimulatedFeedback& feedback, const SessionContent& content);

// Role-plays the learner described by a profile. Pure with respect to system
// state: neither the profile nor the reviewed artifact is modified.
class LearnerSimulator {
public:
    explicit LearnerSimulator(const Gateway& gateway) : gateway_(gateway) {}

    SimulatedFeedback simulate_path_feedback(const LearnerProfile& profile, const LearningPath& path) const;
    SimulatedFeedback simulate_content_feedback(const LearnerProfile& profile, const SessionContent& content) const;

private:
    const Gateway& gateway_;
};

}  // namespace mentor
