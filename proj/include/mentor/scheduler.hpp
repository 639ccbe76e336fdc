#pragma once

#include <memory>

#include "mentor/gateway.hpp"
#include "mentor/ids.hpp"
#include "mentor/model.hpp"
#include "mentor/simulator.hpp"

namespace mentor {

struct SchedulerSettings {
    int max_sessions = 10;
    int refinement_budget = 2;
};

struct RefinementOutcome {
    LearningPath path;
    int simulator_calls = 0;
    std::vector<SimulatedFeedback> feedback;
};

// Builds and evolves learning paths. The model proposes sessions and their
// order; code enforces, in this order: coverage of the gap (re-prompt),
// preservation of completed sessions (re-insert verbatim), and non-decreasing
// difficulty across pending sessions (stable sort).
class PathScheduler {
public:
    PathScheduler(const Gateway& gateway, const LearnerSimulator& simulator, std::shared_ptr<IdSource> ids,
                  SchedulerSettings settings = {});

    const SchedulerSettings& settings() const noexcept { return settings_; }

    // L0 from the model alone, before any simulator feedback.
    LearningPath draft_initial(const LearnerProfile& profile, const SkillGap& gap) const;

    // draft_initial followed by the simulator refinement loop.
    LearningPath schedule_initial(const LearnerProfile& profile, const SkillGap& gap) const;
    RefinementOutcome schedule_with_trace(const LearnerProfile& profile, const SkillGap& gap) const;

    // Simulate -> refine until every score is >= 4 or the budget is spent.
    // Never makes more than refinement_budget simulator calls.
    RefinementOutcome refine_loop(const LearnerProfile& profile, const SkillGap& gap, LearningPath path) const;

    // One refinement step. A satisfied feedback is a fixed point (no model
    // call, path returned unchanged).
    LearningPath refine_with_feedback(const LearningPath& path, const SimulatedFeedback& feedback,
                                      const LearnerProfile& profile, const SkillGap& gap) const;

    // Proposed successor for an updated profile and gap. Sessions that only
    // target skills no longer in the gap are pruned before the model sees
    // the path; an empty gap yields a proposal with no pending sessions and
    // skips the model. The proposal is unapproved.
    LearningPath reschedule(const LearnerProfile& profile, const SkillGap& gap, const LearningPath& previous) const;

private:
    LearningPath finalize(const json& sessions, const LearningPath* previous, const std::string& path_id,
                          const std::string& goal_id, std::int64_t version) const;
    OutputCheck session_check(const SkillGap& gap, const LearningPath* previous,
                              std::vector<std::string> required_notes) const;

    const Gateway& gateway_;
    const LearnerSimulator& simulator_;
    std::shared_ptr<IdSource> ids_;
    SchedulerSettings settings_;
};

// Pending sessions whose every target skill has left the gap are removed;
// completed and active sessions stay.
LearningPath prune_mastered_sessions(const LearningPath& path, const SkillGap& gap);

// Marks an unapproved proposal approved. ConflictError if already approved.
LearningPath approve_path(LearningPath proposal);

}  // namespace mentor
