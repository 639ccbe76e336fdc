#include "mentor/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "mentor/errors.hpp"

namespace mentor {

using namespace std::chrono;

Timestamp now_ms() { return time_point_cast<milliseconds>(system_clock::now()); }

std::string format_timestamp(Timestamp t) {
    const auto ms_total = t.time_since_epoch().count();
    auto secs = static_cast<std::time_t>(ms_total / 1000);
    auto ms = static_cast<int>(ms_total % 1000);
    if (ms < 0) {
        ms += 1000;
        secs -= 1;
    }
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
    return buf;
}

Timestamp parse_timestamp(std::string_view text) {
    std::tm tm{};
    int ms = 0;
    std::string s(text);
    int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ", &tm.tm_year, &tm.tm_mon,
                        &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &ms);
    if (n < 6) throw ValidationError("malformed timestamp: " + s);
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    const std::time_t secs = timegm(&tm);
    return Timestamp{milliseconds{static_cast<std::int64_t>(secs) * 1000 + ms}};
}

std::string normalize_skill_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    bool pending_space = false;
    for (char c : name) {
        auto uc = static_cast<unsigned char>(c);
        if (std::isspace(uc)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(uc)));
    }
    return out;
}

double target_mastery(Proficiency p) noexcept {
    switch (p) {
        case Proficiency::Novice: return 0.2;
        case Proficiency::Beginner: return 0.4;
        case Proficiency::Intermediate: return 0.6;
        case Proficiency::Advanced: return 0.8;
        case Proficiency::Expert: return 1.0;
    }
    return 1.0;
}

int proficiency_rank(Proficiency p) noexcept { return static_cast<int>(p) + 1; }

namespace {

template <typename E>
E parse_enum(std::string_view s, const char* what) {
    json j = std::string(s);
    // Round-trip through the macro mapping and reject silent fallbacks.
    E e = j.get<E>();
    if (json(e).get<std::string>() != s) {
        throw ValidationError(std::string("unknown ") + what + ": '" + std::string(s) + "'");
    }
    return e;
}

template <typename E>
E enum_field(const json& j, const char* key, const char* what) {
    return parse_enum<E>(j.at(key).get<std::string>(), what);
}

bool in_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

Proficiency parse_proficiency(std::string_view s) { return parse_enum<Proficiency>(s, "proficiency"); }
ContentStyle parse_content_style(std::string_view s) { return parse_enum<ContentStyle>(s, "content style"); }
EngagementFlag parse_engagement_flag(std::string_view s) { return parse_enum<EngagementFlag>(s, "engagement flag"); }
SessionStatus parse_session_status(std::string_view s) { return parse_enum<SessionStatus>(s, "session status"); }
KnowledgeCategory parse_category(std::string_view s) { return parse_enum<KnowledgeCategory>(s, "knowledge category"); }
EventType parse_event_type(std::string_view s) { return parse_enum<EventType>(s, "event type"); }

// ---------------------------------------------------------------------------

void LearningGoal::validate() const {
    if (normalize_skill_name(title).empty()) throw ValidationError("goal title is empty");
}

void require_unique_skill_names(std::span<const Skill> skills) {
    std::set<std::string> seen;
    for (const auto& s : skills) {
        auto key = normalize_skill_name(s.name);
        if (key.empty()) throw ValidationError("skill name is empty");
        if (!seen.insert(key).second) throw ValidationError("duplicate skill name: '" + key + "'");
    }
}

std::vector<Skill> dedupe_skills(std::span<const Skill> skills) {
    std::set<std::string> seen;
    std::vector<Skill> out;
    for (const auto& s : skills) {
        auto key = normalize_skill_name(s.name);
        if (key.empty() || !seen.insert(key).second) continue;
        out.push_back(s);
    }
    return out;
}

std::set<std::string> SkillGap::gap_names() const {
    std::set<std::string> out;
    for (const auto& g : gap) out.insert(normalize_skill_name(g.skill.name));
    return out;
}

std::set<std::string> SkillGap::required_names() const {
    std::set<std::string> out;
    for (const auto& s : required) out.insert(normalize_skill_name(s.name));
    return out;
}

void SkillGap::validate() const {
    require_unique_skill_names(required);
    const auto req = required_names();
    std::set<std::string> mastered_names;
    for (const auto& m : mastered) {
        auto key = normalize_skill_name(m.name);
        if (!req.contains(key)) throw ValidationError("mastered skill not required: " + key);
        if (!mastered_names.insert(key).second) throw ValidationError("duplicate mastered skill: " + key);
    }
    std::set<std::string> gap_set;
    for (const auto& g : gap) {
        auto key = normalize_skill_name(g.skill.name);
        if (!req.contains(key)) throw ValidationError("gap skill not required: " + key);
        if (mastered_names.contains(key)) throw ValidationError("skill both mastered and in gap: " + key);
        if (!gap_set.insert(key).second) throw ValidationError("duplicate gap skill: " + key);
        if (!in_unit(g.current_mastery)) throw ValidationError("gap mastery outside [0,1]: " + key);
    }
    if (gap_set.size() + mastered_names.size() != req.size()) {
        throw ValidationError("gap and mastered do not partition required");
    }
}

double leave_threshold(const Skill& skill, double mastery_threshold) noexcept {
    return std::min(mastery_threshold, target_mastery(skill.target_proficiency));
}

SkillGap compute_gap(std::span<const Skill> required, const std::set<std::string>& mastered_names) {
    require_unique_skill_names(required);
    std::set<std::string> mastered_norm;
    for (const auto& n : mastered_names) mastered_norm.insert(normalize_skill_name(n));

    SkillGap out;
    out.required.assign(required.begin(), required.end());
    for (const auto& s : required) {
        if (mastered_norm.contains(normalize_skill_name(s.name))) {
            out.mastered.push_back(s);
        } else {
            out.gap.push_back(GapSkill{s, 0.0});
        }
    }
    return out;
}

void LearnerProfile::validate() const {
    for (const auto& [name, mp] : cognitive_status) {
        if (!in_unit(mp.mastery) || !in_unit(mp.progress)) {
            throw ValidationError("mastery/progress outside [0,1] for " + name);
        }
    }
    if (preferences.activity_weights.empty()) throw ValidationError("activity_weights is empty");
    for (const auto& [k, w] : preferences.activity_weights) {
        if (!in_unit(w)) throw ValidationError("activity weight outside [0,1]: " + k);
    }
    const auto& b = behavior_patterns;
    if (!(b.usage_frequency >= 0.0) || !std::isfinite(b.usage_frequency)) {
        throw ValidationError("usage_frequency must be >= 0");
    }
    if (b.session_duration_stats.mean_minutes < 0.0 || b.session_duration_stats.stddev_minutes < 0.0) {
        throw ValidationError("negative session duration statistics");
    }
    if (version < 0) throw ValidationError("negative profile version");
}

SkillGap recompute_gap(const std::string& goal_id, std::span<const Skill> required,
                       const std::map<std::string, MasteryProgress>& cognitive_status,
                       double mastery_threshold, std::int64_t version) {
    require_unique_skill_names(required);
    SkillGap out;
    out.goal_id = goal_id;
    out.version = version;
    out.required.assign(required.begin(), required.end());
    for (const auto& s : required) {
        double m = 0.0;
        if (auto it = cognitive_status.find(normalize_skill_name(s.name)); it != cognitive_status.end()) {
            m = it->second.mastery;
        }
        if (m >= leave_threshold(s, mastery_threshold)) {
            out.mastered.push_back(s);
        } else {
            out.gap.push_back(GapSkill{s, m});
        }
    }
    return out;
}

const LearningSession* LearningPath::find(std::string_view session_id) const {
    for (const auto& s : sessions) {
        if (s.id == session_id) return &s;
    }
    return nullptr;
}

std::size_t LearningPath::pending_count() const {
    return static_cast<std::size_t>(std::count_if(sessions.begin(), sessions.end(), [](const auto& s) {
        return s.status == SessionStatus::Pending;
    }));
}

std::vector<std::string> path_violations(const LearningPath& path,
                                         const std::set<std::string>& required_names,
                                         const std::set<std::string>& gap_names) {
    std::vector<std::string> out;
    std::set<std::string> ids;
    std::set<std::string> covered;
    int last_pending_difficulty = 0;
    for (const auto& s : path.sessions) {
        if (s.id.empty()) out.push_back("session with empty id");
        if (!ids.insert(s.id).second) out.push_back("duplicate session id " + s.id);
        if (s.title.empty()) out.push_back("session " + s.id + " has an empty title");
        if (s.target_skills.empty()) out.push_back("session " + s.id + " has no target skills");
        if (s.difficulty < 1 || s.difficulty > 5) out.push_back("session " + s.id + " difficulty outside 1-5");
        if (s.estimated_minutes <= 0) out.push_back("session " + s.id + " estimated_minutes must be positive");
        for (const auto& t : s.target_skills) {
            auto key = normalize_skill_name(t);
            if (!required_names.contains(key)) {
                out.push_back("session " + s.id + " targets unknown skill '" + t + "'");
            }
            covered.insert(key);
        }
        if (s.status == SessionStatus::Pending) {
            if (s.difficulty < last_pending_difficulty) {
                out.push_back("pending session " + s.id + " breaks non-decreasing difficulty");
            }
            last_pending_difficulty = std::max(last_pending_difficulty, s.difficulty);
        }
    }
    for (const auto& g : gap_names) {
        if (!covered.contains(g)) out.push_back("gap skill '" + g + "' is not covered by any session");
    }
    return out;
}

std::vector<std::string> preservation_violations(const LearningPath& previous, const LearningPath& next) {
    std::vector<std::string> out;
    for (const auto& s : previous.sessions) {
        if (s.status != SessionStatus::Completed) continue;
        const auto* n = next.find(s.id);
        if (n == nullptr) {
            out.push_back("completed session " + s.id + " was dropped");
        } else if (n->title != s.title || n->status != SessionStatus::Completed) {
            out.push_back("completed session " + s.id + " was altered");
        }
    }
    return out;
}

std::vector<std::string> outline_violations(const std::vector<OutlineSection>& outline) {
    std::vector<std::string> out;
    std::set<KnowledgeCategory> cats;
    std::set<std::string> titles;
    for (const auto& s : outline) {
        if (s.title.empty()) out.push_back("outline section with empty title");
        if (!titles.insert(s.title).second) out.push_back("duplicate outline section '" + s.title + "'");
        if (s.knowledge_points.empty()) out.push_back("section '" + s.title + "' has no knowledge points");
        cats.insert(s.category);
    }
    for (auto c : {KnowledgeCategory::Foundational, KnowledgeCategory::Practical,
                   KnowledgeCategory::ProblemSolving}) {
        if (!cats.contains(c)) out.push_back("outline lacks a " + json(c).get<std::string>() + " section");
    }
    return out;
}

std::vector<std::string> quiz_violations(const std::vector<QuizQuestion>& quiz) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < quiz.size(); ++i) {
        const auto& q = quiz[i];
        auto tag = "question " + std::to_string(i);
        if (q.stem.empty()) out.push_back(tag + " has an empty stem");
        if (q.options.size() < 2) out.push_back(tag + " has fewer than 2 options");
        if (q.correct_index < 0 || static_cast<std::size_t>(q.correct_index) >= q.options.size()) {
            out.push_back(tag + " correct_index out of range");
        }
    }
    return out;
}

void SessionContent::validate() const {
    auto v = outline_violations(outline);
    auto q = quiz_violations(quiz);
    v.insert(v.end(), q.begin(), q.end());
    if (!v.empty()) throw ValidationError("invalid session content: " + v.front());
}

void InteractionRecord::validate() const {
    if (quiz_score) {
        if (!in_unit(*quiz_score)) throw ValidationError("quiz_score outside [0,1]");
        bool submitted = std::any_of(events.begin(), events.end(),
                                     [](const auto& e) { return e.type == EventType::SubmittedQuiz; });
        if (!submitted) throw ValidationError("quiz_score present without a submitted_quiz event");
    }
    if (!(time_spent_minutes >= 0.0)) throw ValidationError("time_spent_minutes must be >= 0");
}

// ---------------------------------------------------------------------------
// Serialization

void to_json(json& j, const LearningGoal& v) {
    j = json{{"id", v.id}, {"title", v.title}, {"description", v.description},
             {"created_at", format_timestamp(v.created_at)}};
}
void from_json(const json& j, LearningGoal& v) {
    v.id = j.value("id", "");
    v.title = j.at("title").get<std::string>();
    v.description = j.value("description", "");
    v.created_at = j.contains("created_at") ? parse_timestamp(j.at("created_at").get<std::string>()) : Timestamp{};
}

void to_json(json& j, const Skill& v) {
    j = json{{"name", v.name}, {"category", v.category},
             {"target_proficiency", v.target_proficiency}, {"rationale", v.rationale}};
}
void from_json(const json& j, Skill& v) {
    v.name = j.at("name").get<std::string>();
    v.category = j.value("category", "");
    v.target_proficiency = enum_field<Proficiency>(j, "target_proficiency", "proficiency");
    v.rationale = j.value("rationale", "");
}

void to_json(json& j, const GapSkill& v) {
    j = v.skill;
    j["current_mastery"] = v.current_mastery;
}
void from_json(const json& j, GapSkill& v) {
    v.skill = j.get<Skill>();
    v.current_mastery = j.value("current_mastery", 0.0);
}

void to_json(json& j, const SkillGap& v) {
    j = json{{"goal_id", v.goal_id}, {"required", v.required}, {"mastered", v.mastered},
             {"gap", v.gap}, {"version", v.version}};
}
void from_json(const json& j, SkillGap& v) {
    v.goal_id = j.value("goal_id", "");
    v.required = j.at("required").get<std::vector<Skill>>();
    v.mastered = j.at("mastered").get<std::vector<Skill>>();
    v.gap = j.at("gap").get<std::vector<GapSkill>>();
    v.version = j.value("version", std::int64_t{0});
}

void to_json(json& j, const MasteryProgress& v) {
    j = json{{"mastery", v.mastery}, {"progress", v.progress}};
}
void from_json(const json& j, MasteryProgress& v) {
    v.mastery = j.at("mastery").get<double>();
    v.progress = j.at("progress").get<double>();
}

void to_json(json& j, const Preferences& v) {
    j = json{{"content_style", v.content_style}, {"activity_weights", v.activity_weights}};
}
void from_json(const json& j, Preferences& v) {
    v.content_style = enum_field<ContentStyle>(j, "content_style", "content style");
    v.activity_weights = j.at("activity_weights").get<std::map<std::string, double>>();
}

void to_json(json& j, const BehaviorPatterns& v) {
    j = json{{"usage_frequency", v.usage_frequency},
             {"session_duration_stats",
              {{"mean", v.session_duration_stats.mean_minutes},
               {"std_dev", v.session_duration_stats.stddev_minutes}}},
             {"engagement_flags", v.engagement_flags},
             {"sessions_observed", v.sessions_observed},
             {"first_activity", v.first_activity ? json(format_timestamp(*v.first_activity)) : json(nullptr)}};
}
void from_json(const json& j, BehaviorPatterns& v) {
    v.usage_frequency = j.at("usage_frequency").get<double>();
    const auto& d = j.at("session_duration_stats");
    v.session_duration_stats = {d.at("mean").get<double>(), d.at("std_dev").get<double>()};
    v.engagement_flags.clear();
    for (const auto& f : j.at("engagement_flags")) {
        v.engagement_flags.push_back(parse_engagement_flag(f.get<std::string>()));
    }
    v.sessions_observed = j.value("sessions_observed", std::int64_t{0});
    v.first_activity.reset();
    if (j.contains("first_activity") && !j["first_activity"].is_null()) {
        v.first_activity = parse_timestamp(j["first_activity"].get<std::string>());
    }
}

void to_json(json& j, const LearnerProfile& v) {
    j = json{{"learner_id", v.learner_id},
             {"cognitive_status", v.cognitive_status},
             {"preferences", v.preferences},
             {"behavior_patterns", v.behavior_patterns},
             {"version", v.version},
             {"onboarding_info", v.onboarding_info},
             {"annotations", v.annotations}};
}
void from_json(const json& j, LearnerProfile& v) {
    v.learner_id = j.at("learner_id").get<std::string>();
    v.cognitive_status = j.at("cognitive_status").get<std::map<std::string, MasteryProgress>>();
    v.preferences = j.at("preferences").get<Preferences>();
    v.behavior_patterns = j.at("behavior_patterns").get<BehaviorPatterns>();
    v.version = j.at("version").get<std::int64_t>();
    v.onboarding_info = j.value("onboarding_info", "");
    v.annotations = j.value("annotations", std::vector<std::string>{});
}

void to_json(json& j, const LearningSession& v) {
    j = json{{"id", v.id},
             {"title", v.title},
             {"target_skills", v.target_skills},
             {"difficulty", v.difficulty},
             {"estimated_minutes", v.estimated_minutes},
             {"status", v.status}};
}
void from_json(const json& j, LearningSession& v) {
    v.id = j.value("id", "");
    v.title = j.at("title").get<std::string>();
    v.target_skills = j.at("target_skills").get<std::vector<std::string>>();
    v.difficulty = j.at("difficulty").get<int>();
    v.estimated_minutes = j.at("estimated_minutes").get<int>();
    v.status = j.contains("status") ? enum_field<SessionStatus>(j, "status", "session status")
                                    : SessionStatus::Pending;
}

void to_json(json& j, const LearningPath& v) {
    j = json{{"id", v.id}, {"goal_id", v.goal_id}, {"sessions", v.sessions},
             {"version", v.version}, {"approved", v.approved}};
}
void from_json(const json& j, LearningPath& v) {
    v.id = j.value("id", "");
    v.goal_id = j.value("goal_id", "");
    v.sessions = j.at("sessions").get<std::vector<LearningSession>>();
    v.version = j.value("version", std::int64_t{0});
    v.approved = j.value("approved", false);
}

void to_json(json& j, const OutlineSection& v) {
    j = json{{"title", v.title}, {"knowledge_points", v.knowledge_points}, {"category", v.category}};
}
void from_json(const json& j, OutlineSection& v) {
    v.title = j.at("title").get<std::string>();
    v.knowledge_points = j.at("knowledge_points").get<std::vector<std::string>>();
    v.category = enum_field<KnowledgeCategory>(j, "category", "knowledge category");
}

void to_json(json& j, const QuizQuestion& v) {
    j = json{{"stem", v.stem}, {"options", v.options}, {"correct_index", v.correct_index},
             {"explanation", v.explanation}};
}
void from_json(const json& j, QuizQuestion& v) {
    v.stem = j.at("stem").get<std::string>();
    v.options = j.at("options").get<std::vector<std::string>>();
    v.correct_index = j.at("correct_index").get<int>();
    v.explanation = j.value("explanation", "");
}

void to_json(json& j, const SourceRef& v) { j = json{{"origin", v.origin}, {"snippet", v.snippet}}; }
void from_json(const json& j, SourceRef& v) {
    v.origin = j.at("origin").get<std::string>();
    v.snippet = j.value("snippet", "");
}

void to_json(json& j, const SessionContent& v) {
    j = json{{"session_id", v.session_id}, {"outline", v.outline}, {"drafts", v.drafts},
             {"document", v.document}, {"quiz", v.quiz}, {"sources", v.sources},
             {"unsourced", v.unsourced}};
}
void from_json(const json& j, SessionContent& v) {
    v.session_id = j.at("session_id").get<std::string>();
    v.outline = j.at("outline").get<std::vector<OutlineSection>>();
    v.drafts = j.at("drafts").get<std::map<std::string, std::string>>();
    v.document = j.at("document").get<std::string>();
    v.quiz = j.at("quiz").get<std::vector<QuizQuestion>>();
    v.sources = j.value("sources", std::vector<SourceRef>{});
    v.unsourced = j.value("unsourced", false);
}

void to_json(json& j, const InteractionEvent& v) {
    j = json{{"timestamp", format_timestamp(v.at)}, {"type", v.type}};
}
void from_json(const json& j, InteractionEvent& v) {
    v.at = parse_timestamp(j.at("timestamp").get<std::string>());
    v.type = enum_field<EventType>(j, "type", "event type");
}

void to_json(json& j, const InteractionRecord& v) {
    j = json{{"learner_id", v.learner_id},
             {"session_id", v.session_id},
             {"quiz_score", v.quiz_score ? json(*v.quiz_score) : json(nullptr)},
             {"time_spent_minutes", v.time_spent_minutes},
             {"feedback_text", v.feedback_text ? json(*v.feedback_text) : json(nullptr)},
             {"events", v.events},
             {"recorded_at", format_timestamp(v.recorded_at)}};
}
void from_json(const json& j, InteractionRecord& v) {
    v.learner_id = j.at("learner_id").get<std::string>();
    v.session_id = j.at("session_id").get<std::string>();
    v.quiz_score.reset();
    if (j.contains("quiz_score") && !j["quiz_score"].is_null()) v.quiz_score = j["quiz_score"].get<double>();
    v.time_spent_minutes = j.value("time_spent_minutes", 0.0);
    v.feedback_text.reset();
    if (j.contains("feedback_text") && !j["feedback_text"].is_null()) {
        v.feedback_text = j["feedback_text"].get<std::string>();
    }
    v.events = j.value("events", std::vector<InteractionEvent>{});
    v.recorded_at = parse_timestamp(j.at("recorded_at").get<std::string>());
}

}  // namespace mentor
