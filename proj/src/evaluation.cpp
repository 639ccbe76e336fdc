#include "mentor/evaluation.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mentor/prompts.hpp"

namespace mentor {

void JudgeScore::validate() const {
    if (score < 1 || score > 5) {
        throw ValidationError("judge score for '" + metric + "' out of range 1..5: " + std::to_string(score));
    }
}

void to_json(json& j, const JudgeScore& v) {
    j = json{{"metric", v.metric}, {"score", v.score}, {"justification", v.justification},
             {"judge_backend", v.judge_backend}};
}

ScoringMode parse_scoring_mode(std::string_view s) {
    if (s == "deterministic") return ScoringMode::Deterministic;
    if (s == "judge") return ScoringMode::Judge;
    throw ValidationError("unknown scoring mode: " + std::string(s));
}

namespace {

void require_truth(std::span<const Skill> truth) {
    if (truth.empty()) throw ValidationError("ground-truth skill set is empty");
}

SkillMatchReport finish(std::size_t n_pred, std::size_t n_truth,
                        std::vector<std::pair<std::string, std::string>> matches) {
    SkillMatchReport r;
    const auto m = static_cast<double>(matches.size());
    r.recall = m / static_cast<double>(n_truth);
    r.precision = n_pred == 0 ? 0.0 : m / static_cast<double>(n_pred);
    r.matches = std::move(matches);
    return r;
}

}  // namespace

SkillMatchReport match_skills(std::span<const Skill> predicted, std::span<const Skill> truth) {
    require_truth(truth);
    std::vector<bool> used(truth.size(), false);
    std::vector<std::pair<std::string, std::string>> matches;
    for (const auto& p : predicted) {
        const auto key = normalize_skill_name(p.name);
        for (std::size_t t = 0; t < truth.size(); ++t) {
            if (!used[t] && normalize_skill_name(truth[t].name) == key) {
                used[t] = true;
                matches.emplace_back(p.name, truth[t].name);
                break;
            }
        }
    }
    return finish(predicted.size(), truth.size(), std::move(matches));
}

SkillMatchReport report_from_matches(std::span<const Skill> predicted, std::span<const Skill> truth,
                                     const std::vector<std::pair<std::string, std::string>>& proposed) {
    require_truth(truth);
    auto index_of = [](std::span<const Skill> skills, const std::string& name, const std::vector<bool>& used) {
        const auto key = normalize_skill_name(name);
        for (std::size_t i = 0; i < skills.size(); ++i) {
            if (!used[i] && normalize_skill_name(skills[i].name) == key) return static_cast<std::ptrdiff_t>(i);
        }
        return std::ptrdiff_t{-1};
    };
    std::vector<bool> used_p(predicted.size(), false), used_t(truth.size(), false);
    std::vector<std::pair<std::string, std::string>> matches;
    for (const auto& [p, t] : proposed) {
        auto ip = index_of(predicted, p, used_p);
        auto it = index_of(truth, t, used_t);
        if (ip < 0 || it < 0) continue;
        used_p[ip] = true;
        used_t[it] = true;
        matches.emplace_back(predicted[ip].name, truth[it].name);
    }
    return finish(predicted.size(), truth.size(), std::move(matches));
}

const std::vector<std::string>& path_metrics() {
    static const std::vector<std::string> m{"progression", "engagement"};
    return m;
}

const std::vector<std::string>& content_metrics() {
    static const std::vector<std::string> m{"goal_relevance", "content_quality", "engagement", "personalization"};
    return m;
}

namespace {

json score_schema() {
    return {{"type", "object"},
            {"required", {"score", "justification"}},
            {"properties",
             {{"score", {{"type", "integer"}, {"minimum", 1}, {"maximum", 5}}},
              {"justification", {{"type", "string"}}}}}};
}

json names(std::span<const Skill> skills) {
    json out = json::array();
    for (const auto& s : skills) out.push_back(s.name);
    return out;
}

}  // namespace

SkillMappingScore Evaluator::score_skill_mapping(std::span<const Skill> predicted, std::span<const Skill> truth,
                                                 const LearningGoal& goal, ScoringMode mode) const {
    require_truth(truth);
    SkillMappingScore out;
    if (mode == ScoringMode::Deterministic) {
        out.report = match_skills(predicted, truth);
        return out;
    }
    json schema = {
        {"type", "object"},
        {"required", {"matches", "goal_alignment"}},
        {"properties",
         {{"matches",
           {{"type", "array"},
            {"items",
             {{"type", "object"},
              {"required", {"predicted", "truth"}},
              {"properties", {{"predicted", {{"type", "string"}}}, {"truth", {{"type", "string"}}}}}}}}},
          {"goal_alignment", score_schema()}}}};
    auto resp = gateway_.complete(make_model_request(
        roles::kJudge, "judge.skills",
        {{"goal", {{"title", goal.title}, {"description", goal.description}}},
         {"predicted", names(predicted)},
         {"truth", names(truth)}},
        schema));
    std::vector<std::pair<std::string, std::string>> proposed;
    for (const auto& m : resp.parsed.at("matches")) {
        proposed.emplace_back(m.at("predicted").get<std::string>(), m.at("truth").get<std::string>());
    }
    out.report = report_from_matches(predicted, truth, proposed);
    const auto& ga = resp.parsed.at("goal_alignment");
    JudgeScore s{"goal_alignment", ga.at("score").get<int>(), ga.at("justification").get<std::string>(),
                 resp.backend_id};
    s.validate();
    out.goal_alignment = s;
    return out;
}

ScoreSet Evaluator::judge(const std::string& template_name, json input,
                          const std::vector<std::string>& metrics) const {
    json schema = {{"type", "object"}, {"required", json::array()}, {"properties", json::object()}};
    for (const auto& m : metrics) {
        schema["required"].push_back(m);
        schema["properties"][m] = score_schema();
    }
    input["metrics"] = metrics;
    auto resp = gateway_.complete(make_model_request(roles::kJudge, template_name, std::move(input), schema));
    ScoreSet out;
    for (const auto& m : metrics) {
        const auto& v = resp.parsed.at(m);
        JudgeScore s{m, v.at("score").get<int>(), v.at("justification").get<std::string>(), resp.backend_id};
        s.validate();
        out.scores.emplace(m, std::move(s));
    }
    return out;
}

ScoreSet Evaluator::score_path(const LearningPath& path, const LearnerProfile& profile, const SkillGap& gap) const {
    auto v = path_violations(path, gap.required_names(), {});
    if (!v.empty()) throw ValidationError("cannot score an invalid path: " + v.front());
    return judge("judge.path",
                 {{"path", path},
                  {"profile",
                   {{"cognitive_status", profile.cognitive_status},
                    {"preferences", profile.preferences},
                    {"behavior_patterns", profile.behavior_patterns}}},
                  {"gap", gap}},
                 path_metrics());
}

ScoreSet Evaluator::score_content(const SessionContent& content, const LearnerProfile& profile,
                                  const LearningGoal& goal) const {
    std::vector<std::string> warnings;
    json c = {{"session_id", content.session_id}, {"outline", content.outline}, {"document", content.document}};
    if (content.quiz.empty()) {
        warnings.push_back("content has no quiz; scored on the document alone");
    } else {
        c["quiz"] = content.quiz;
    }
    auto out = judge("judge.content",
                     {{"content", c},
                      {"goal", {{"title", goal.title}, {"description", goal.description}}},
                      {"profile", {{"preferences", profile.preferences}, {"cognitive_status", profile.cognitive_status}}}},
                     content_metrics());
    out.warnings = std::move(warnings);
    return out;
}

// ---------------------------------------------------------------------------

PearsonResult pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ValidationError("pearson: length mismatch");
    if (xs.size() < 3) throw ValidationError("pearson: need at least 3 pairs");
    const auto n = static_cast<long double>(xs.size());
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    long double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const long double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0 || syy == 0) throw ValidationError("pearson: zero variance");
    auto r = static_cast<double>(sxy / std::sqrt(sxx * syy));
    r = std::clamp(r, -1.0, 1.0);

    PearsonResult out;
    out.r = r;
    const double dof = static_cast<double>(xs.size()) - 2.0;
    if (std::abs(r) == 1.0) {
        out.p_value = 0.0;
    } else {
        const double t = r * std::sqrt(dof / (1.0 - r * r));
        boost::math::students_t dist(dof);
        out.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
    }
    return out;
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.n = values.size();
    if (values.empty()) return s;
    long double sum = 0;
    for (double v : values) sum += v;
    const long double mean = sum / static_cast<long double>(values.size());
    long double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.mean = static_cast<double>(mean);
    s.std_dev = values.size() > 1 ? static_cast<double>(std::sqrt(ss / static_cast<long double>(values.size() - 1)))
                                  : 0.0;
    return s;
}

// ---------------------------------------------------------------------------

ItemKind parse_item_kind(std::string_view s) {
    if (s == "gap") return ItemKind::Gap;
    if (s == "path") return ItemKind::Path;
    if (s == "content") return ItemKind::Content;
    throw ValidationError("unknown item kind: " + std::string(s));
}

Choice parse_choice(std::string_view s) {
    if (s == "a") return Choice::A;
    if (s == "b") return Choice::B;
    throw ValidationError("choice must be 'a' or 'b', got: " + std::string(s));
}

void to_json(json& j, const PreferenceRecord& v) {
    j = json{{"kind", v.kind}, {"option_a", v.option_a}, {"option_b", v.option_b}, {"choice", v.choice},
             {"recorded_at", format_timestamp(v.recorded_at)}};
}

void from_json(const json& j, PreferenceRecord& v) {
    v.kind = parse_item_kind(j.at("kind").get<std::string>());
    v.option_a = j.at("option_a");
    v.option_b = j.at("option_b");
    v.choice = parse_choice(j.at("choice").get<std::string>());
    v.recorded_at = parse_timestamp(j.at("recorded_at").get<std::string>());
}

PreferenceTally tally(std::span<const PreferenceRecord> records, ItemKind kind) {
    PreferenceTally t;
    for (const auto& r : records) {
        if (r.kind != kind) continue;
        (r.choice == Choice::A ? t.wins_a : t.wins_b) += 1;
    }
    const auto total = t.wins_a + t.wins_b;
    if (total > 0) t.win_rate_a = static_cast<double>(t.wins_a) / static_cast<double>(total);
    return t;
}

PreferenceStore::PreferenceStore(std::filesystem::path file) : file_(std::move(file)) {
    std::ifstream in(*file_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records_.push_back(json::parse(line).get<PreferenceRecord>());
        } catch (const json::exception& e) {
            throw Error(file_->string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

PreferenceRecord PreferenceStore::record(ItemKind kind, json option_a, json option_b, Choice choice) {
    if (option_a == option_b) throw ValidationError("preference options must differ");
    PreferenceRecord r{kind, std::move(option_a), std::move(option_b), choice, now_ms()};
    std::lock_guard lock(mutex_);
    if (file_) {
        if (file_->has_parent_path()) std::filesystem::create_directories(file_->parent_path());
        std::ofstream out(*file_, std::ios::app);
        out << json(r).dump() << '\n';
        out.flush();
        if (!out) throw Error("cannot append to " + file_->string());
    }
    records_.push_back(r);
    return r;
}

std::vector<PreferenceRecord> PreferenceStore::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

PreferenceTally PreferenceStore::aggregate(ItemKind kind) const {
    std::lock_guard lock(mutex_);
    return tally(records_, kind);
}

// ---------------------------------------------------------------------------

EvalKind parse_eval_kind(std::string_view s) {
    if (s == "skills") return EvalKind::Skills;
    if (s == "path") return EvalKind::Path;
    if (s == "content") return EvalKind::Content;
    throw ValidationError("unknown evaluation kind: " + std::string(s));
}

namespace {

std::vector<Skill> skills_from(const json& j) {
    std::vector<Skill> out;
    for (const auto& s : j) {
        if (s.is_string()) {
            out.push_back(Skill{s.get<std::string>(), "", Proficiency::Intermediate, ""});
        } else {
            out.push_back(s.get<Skill>());
        }
    }
    return out;
}

LearningGoal goal_from(const json& j) {
    if (j.is_string()) return LearningGoal{"", j.get<std::string>(), "", {}};
    LearningGoal g;
    g.id = j.value("id", "");
    g.title = j.value("title", "");
    g.description = j.value("description", "");
    return g;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << v;
    return os.str();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

EvalRun run_evaluation(EvalKind kind, const std::filesystem::path& input_dir, ScoringMode mode,
                       const Evaluator& evaluator, const std::filesystem::path& report) {
    if (kind != EvalKind::Skills && mode == ScoringMode::Deterministic) {
        throw ValidationError("path and content scores need a judge; use --mode judge");
    }
    const auto cases_file = input_dir / "cases.jsonl";
    std::ifstream in(cases_file);
    if (!in) throw ValidationError("cannot open " + cases_file.string());

    EvalRun run;
    std::vector<std::string> metrics;
    switch (kind) {
        case EvalKind::Skills:
            metrics = {"recall", "precision"};
            if (mode == ScoringMode::Judge) metrics.push_back("goal_alignment");
            break;
        case EvalKind::Path: metrics = path_metrics(); break;
        case EvalKind::Content: metrics = content_metrics(); break;
    }
    run.header = {"id"};
    run.header.insert(run.header.end(), metrics.begin(), metrics.end());
    if (kind == EvalKind::Content) run.header.push_back("warnings");

    std::map<std::string, std::vector<double>> columns;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json c;
        try {
            c = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(cases_file.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const std::string id = c.contains("id") ? (c["id"].is_string() ? c["id"].get<std::string>() : c["id"].dump())
                                                : std::to_string(lineno);
        std::map<std::string, double> values;
        std::string warnings;
        switch (kind) {
            case EvalKind::Skills: {
                auto predicted = skills_from(c.at("predicted"));
                auto truth = skills_from(c.at("truth"));
                auto s = evaluator.score_skill_mapping(predicted, truth, goal_from(c.value("goal", json(""))), mode);
                values["recall"] = s.report.recall;
                values["precision"] = s.report.precision;
                if (s.goal_alignment) values["goal_alignment"] = s.goal_alignment->score;
                break;
            }
            case EvalKind::Path: {
                auto s = evaluator.score_path(c.at("path").get<LearningPath>(), c.at("profile").get<LearnerProfile>(),
                                              c.at("gap").get<SkillGap>());
                for (const auto& [m, js] : s.scores) values[m] = js.score;
                break;
            }
            case EvalKind::Content: {
                auto s = evaluator.score_content(c.at("content").get<SessionContent>(),
                                                 c.at("profile").get<LearnerProfile>(),
                                                 goal_from(c.value("goal", json(""))));
                for (const auto& [m, js] : s.scores) values[m] = js.score;
                for (const auto& w : s.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
                break;
            }
        }
        std::vector<std::string> row{id};
        for (const auto& m : metrics) {
            row.push_back(fmt(values.at(m)));
            columns[m].push_back(values.at(m));
        }
        if (kind == EvalKind::Content) row.push_back(warnings);
        run.rows.push_back(std::move(row));
        ++run.cases;
    }
    if (run.cases == 0) throw ValidationError(cases_file.string() + " holds no cases");

    std::vector<std::string> mean_row{"mean"}, std_row{"std"};
    for (const auto& m : metrics) {
        auto s = summarize(columns[m]);
        mean_row.push_back(fmt(s.mean));
        std_row.push_back(fmt(s.std_dev));
    }
    if (kind == EvalKind::Content) {
        mean_row.emplace_back();
        std_row.emplace_back();
    }
    run.rows.push_back(std::move(mean_row));
    run.rows.push_back(std::move(std_row));

    if (report.has_parent_path()) std::filesystem::create_directories(report.parent_path());
    std::ofstream out(report);
    if (!out) throw Error("cannot write report " + report.string());
    auto write_row = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_field(r[i]);
        out << '\n';
    };
    write_row(run.header);
    for (const auto& r : run.rows) write_row(r);
    return run;
}

}  // namespace mentor
