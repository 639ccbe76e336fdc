#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mentor/gateway.hpp"
#include "mentor/model.hpp"

namespace mentor {

struct JudgeScore {
    std::string metric;
    int score = 0;  // 1..5
    std::string justification;
    std::string judge_backend;

    void validate() const;
    bool operator==(const JudgeScore&) const = default;
};

void to_json(json& j, const JudgeScore& v);

struct SkillMatchReport {
    double recall = 0.0;
    double precision = 0.0;
    std::vector<std::pair<std::string, std::string>> matches;  // (predicted, truth)
};

enum class ScoringMode { Deterministic, Judge };
ScoringMode parse_scoring_mode(std::string_view s);

// Greedy one-to-one matching on normalized names. Since equality is
// transitive, greedy is also a maximum matching. Throws on empty truth.
SkillMatchReport match_skills(std::span<const Skill> predicted, std::span<const Skill> truth);

// Builds a report from an explicit match list, dropping pairs that name
// unknown skills or reuse one already matched.
SkillMatchReport report_from_matches(std::span<const Skill> predicted, std::span<const Skill> truth,
                                     const std::vector<std::pair<std::string, std::string>>& proposed);

struct SkillMappingScore {
    SkillMatchReport report;
    std::optional<JudgeScore> goal_alignment;
};

struct ScoreSet {
    std::map<std::string, JudgeScore> scores;
    std::vector<std::string> warnings;
};

const std::vector<std::string>& path_metrics();     // progression, engagement
const std::vector<std::string>& content_metrics();  // goal_relevance, content_quality, engagement, personalization

class Evaluator {
public:
    explicit Evaluator(const Gateway& gateway) : gateway_(gateway) {}

    SkillMappingScore score_skill_mapping(std::span<const Skill> predicted, std::span<const Skill> truth,
                                          const LearningGoal& goal, ScoringMode mode) const;
    ScoreSet score_path(const LearningPath& path, const LearnerProfile& profile, const SkillGap& gap) const;
    // A missing quiz is scored on the document alone and reported as a warning.
    ScoreSet score_content(const SessionContent& content, const LearnerProfile& profile,
                           const LearningGoal& goal) const;

private:
    ScoreSet judge(const std::string& template_name, json input, const std::vector<std::string>& metrics) const;

    const Gateway& gateway_;
};

struct PearsonResult {
    double r = 0.0;
    double p_value = 1.0;  // two-sided, t-distribution with n - 2 dof
};

// Requires equal lengths >= 3 and nonzero variance on both sides.
PearsonResult pearson(std::span<const double> xs, std::span<const double> ys);

struct Summary {
    double mean = 0.0;
    double std_dev = 0.0;  // sample (n - 1); 0 for a single value
    std::size_t n = 0;
};
Summary summarize(std::span<const double> values);

// ---------------------------------------------------------------------------
// Side-by-side preference collection.

enum class ItemKind { Gap, Path, Content };
enum class Choice { A, B };

NLOHMANN_JSON_SERIALIZE_ENUM(ItemKind, {{ItemKind::Gap, "gap"}, {ItemKind::Path, "path"}, {ItemKind::Content, "content"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Choice, {{Choice::A, "a"}, {Choice::B, "b"}})

ItemKind parse_item_kind(std::string_view s);
Choice parse_choice(std::string_view s);

struct PreferenceRecord {
    ItemKind kind = ItemKind::Gap;
    json option_a;
    json option_b;
    Choice choice = Choice::A;
    Timestamp recorded_at{};

    bool operator==(const PreferenceRecord&) const = default;
};

void to_json(json& j, const PreferenceRecord& v);
void from_json(const json& j, PreferenceRecord& v);

struct PreferenceTally {
    std::size_t wins_a = 0;
    std::size_t wins_b = 0;
    std::optional<double> win_rate_a;  // absent when no records

    bool operator==(const PreferenceTally&) const = default;
};

PreferenceTally tally(std::span<const PreferenceRecord> records, ItemKind kind);

// Append-only. With a file path, records are JSON lines and survive restarts;
// otherwise they live in memory.
class PreferenceStore {
public:
    PreferenceStore() = default;
    explicit PreferenceStore(std::filesystem::path file);

    PreferenceRecord record(ItemKind kind, json option_a, json option_b, Choice choice);
    std::vector<PreferenceRecord> records() const;
    PreferenceTally aggregate(ItemKind kind) const;

private:
    mutable std::mutex mutex_;
    std::optional<std::filesystem::path> file_;
    std::vector<PreferenceRecord> records_;
};

// ---------------------------------------------------------------------------
// Batch evaluation over a directory holding cases.jsonl. Each line carries an
// "id" plus:
//   skills:  "goal", "predicted", "truth" (skill objects or bare names)
//   path:    "path", "profile", "gap"
//   content: "content", "profile", "goal"
// Writes a CSV report with one row per case followed by mean and std rows.

enum class EvalKind { Skills, Path, Content };
EvalKind parse_eval_kind(std::string_view s);

struct EvalRun {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::size_t cases = 0;
};

EvalRun run_evaluation(EvalKind kind, const std::filesystem::path& input_dir, ScoringMode mode,
                       const Evaluator& evaluator, const std::filesystem::path& report);

}  // namespace mentor
