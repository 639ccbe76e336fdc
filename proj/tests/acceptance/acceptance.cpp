// Acceptance run: one PASS/FAIL line per criterion, each with its time limit.
// Exit status is non-zero when any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "mentor/content.hpp"
#include "mentor/dataset.hpp"
#include "mentor/evaluation.hpp"
#include "mentor/profiler.hpp"
#include "mentor/scheduler.hpp"
#include "mentor/service.hpp"
#include "test_support.hpp"

using namespace mentor;
using mentor::testing::fresh_dir;
using mentor::testing::MockWorld;
using mentor::testing::ScriptWorld;

namespace {

struct CheckFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw CheckFailed(what);
}

int failures = 0;

void criterion(const std::string& name, double limit_seconds, const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string problem;
    try {
        body();
    } catch (const std::exception& e) {
        problem = e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (problem.empty() && limit_seconds > 0 && secs >= limit_seconds) {
        problem = "took " + std::to_string(secs) + " s, limit " + std::to_string(limit_seconds) + " s";
    }
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(3);
    line << (problem.empty() ? "PASS " : "FAIL ") << name << " (" << secs << " s)";
    if (!problem.empty()) line << ": " << problem;
    std::cout << line.str() << std::endl;
    if (!problem.empty()) ++failures;
}

std::string cased(const std::string& name, std::mt19937& rng) {
    std::string out;
    if (rng() % 2) out += "  ";
    for (char c : name) {
        out.push_back(rng() % 2 ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c);
        if (c == ' ' && rng() % 2) out.push_back(' ');
    }
    if (rng() % 2) out += "\t";
    return out;
}

// ---------------------------------------------------------------------------

void gap_algebra() {
    std::mt19937 rng(2024);
    const std::vector<std::string> universe{"sql",    "data modeling", "etl", "spark", "python", "statistics",
                                            "docker", "airflow",       "git", "kafka", "linux",  "cloud storage"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Skill> required;
        std::set<std::string> required_keys, mastered;
        for (const auto& u : universe) {
            if (rng() % 2) {
                required.push_back(Skill{cased(u, rng), "", Proficiency::Intermediate, ""});
                required_keys.insert(u);
            }
            if (rng() % 3 == 0) mastered.insert(cased(u, rng));
        }
        if (required.empty()) continue;

        std::set<std::string> mastered_keys;
        for (const auto& m : mastered) {
            std::istringstream in(m);
            std::string w, joined;
            while (in >> w) {
                std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
                joined += (joined.empty() ? "" : " ") + w;
            }
            mastered_keys.insert(joined);
        }
        std::set<std::string> expected;
        std::set_difference(required_keys.begin(), required_keys.end(), mastered_keys.begin(), mastered_keys.end(),
                            std::inserter(expected, expected.end()));

        auto gap = compute_gap(required, mastered);
        require(gap.gap_names() == expected, "gap differs from set difference on trial " + std::to_string(trial));
        require(gap.gap.size() + gap.mastered.size() == required.size(), "gap and mastered do not partition");
    }
}

// ---------------------------------------------------------------------------

void dataset_pipeline() {
    std::mt19937 rng(50);
    const std::vector<std::string> occupations{"engineering", "finance", "design", "operations"};
    std::vector<dataset::JobPosting> corpus;
    std::vector<std::size_t> known_counts;
    const std::vector<std::size_t> edges{499, 500, 501};
    for (int i = 0; i < 50; ++i) {
        const std::size_t n = i < 3 ? edges[static_cast<std::size_t>(i)] : 300 + rng() % 500;
        known_counts.push_back(n);
        std::string body;
        for (std::size_t k = 0; k < n; ++k) {
            body += (k ? (k % 7 ? " " : "\n") : "") + std::string(k % 5 ? "pipelines" : "python");
        }
        corpus.push_back({"post-" + std::to_string(i), "Role " + std::to_string(i), body,
                          occupations[static_cast<std::size_t>(i) % occupations.size()]});
    }

    std::vector<std::string> oracle;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (known_counts[i] >= 500) oracle.push_back(corpus[i].id);
    }
    std::vector<std::string> kept;
    for (const auto& p : dataset::filter_postings(corpus, 500)) kept.push_back(p.id);
    require(kept == oracle, "filter_postings disagrees with the counting oracle");

    MockWorld w;
    dataset::DatasetBuilder builder(w.gateway);
    std::vector<dataset::GoalSkillSample> samples;
    for (const auto& p : dataset::filter_postings(corpus, 500)) samples.push_back(builder.build_sample(p));

    const std::size_t n_train = samples.size() / 2, n_valid = samples.size() / 5;
    auto a = dataset::split_dataset(samples, n_train, n_valid, 7);
    auto b = dataset::split_dataset(samples, n_train, n_valid, 7);
    require(a.train == b.train && a.valid == b.valid, "split is not deterministic for a fixed seed");
    require(a.train.size() == n_train && a.valid.size() == n_valid, "split sizes differ from the request");

    auto idx = dataset::stratified_split_indices(
        [&] {
            std::vector<std::string> s;
            for (const auto& x : samples) s.push_back(x.occupation_type);
            return s;
        }(),
        n_train, n_valid, 7);
    std::set<std::size_t> seen(idx.train.begin(), idx.train.end());
    for (auto i : idx.valid) require(seen.insert(i).second, "train and valid overlap");

    std::map<std::string, double> population;
    for (const auto& s : samples) population[s.occupation_type] += 1;
    auto check_strata = [&](const std::vector<dataset::GoalSkillSample>& part, std::size_t n, const char* which) {
        std::map<std::string, double> got;
        for (const auto& s : part) got[s.occupation_type] += 1;
        for (const auto& [occ, size] : population) {
            const double expected = static_cast<double>(n) * size / static_cast<double>(samples.size());
            require(std::abs(got[occ] - expected) <= 1.0,
                    std::string(which) + " stratum '" + occ + "' off by more than 1");
        }
    };
    check_strata(a.train, n_train, "train");
    check_strata(a.valid, n_valid, "valid");

    auto dir = fresh_dir("acc-dataset");
    dataset::emit_finetune_records(a.train, dir / "train.jsonl");
    auto back = dataset::read_finetune_records(dir / "train.jsonl");
    dataset::emit_finetune_records(back, dir / "again.jsonl");
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    require(back == a.train, "records do not deserialize to the emitted samples");
    require(slurp(dir / "train.jsonl") == slurp(dir / "again.jsonl"), "re-emitted records are not byte-identical");
    std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------------------

// Largest number of equal-name pairs over every one-to-one assignment.
std::size_t exhaustive_matching(const std::vector<std::string>& pred, const std::vector<std::string>& truth,
                                std::size_t i, std::vector<bool>& used) {
    if (i == pred.size()) return 0;
    std::size_t best = exhaustive_matching(pred, truth, i + 1, used);
    for (std::size_t t = 0; t < truth.size(); ++t) {
        if (used[t] || truth[t] != pred[i]) continue;
        used[t] = true;
        best = std::max(best, 1 + exhaustive_matching(pred, truth, i + 1, used));
        used[t] = false;
    }
    return best;
}

long double definitional_r(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<long double>(x.size());
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const long double mx = sx / n, my = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

void metric_arithmetic() {
    std::mt19937 rng(8);
    const std::vector<std::string> names{"a", "b", "c", "d", "e", "f"};
    auto draw = [&](std::size_t n) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(names[rng() % names.size()]);
        return out;
    };
    auto to_skills = [&](const std::vector<std::string>& v) {
        std::vector<Skill> out;
        for (const auto& s : v) out.push_back(Skill{cased(s, rng), "", Proficiency::Intermediate, ""});
        return out;
    };
    for (std::size_t np = 0; np <= 8; ++np) {
        for (std::size_t nt = 1; nt <= 8; ++nt) {
            for (int rep = 0; rep < 20; ++rep) {
                auto p = draw(np), t = draw(nt);
                std::vector<bool> used(t.size(), false);
                const auto m = static_cast<double>(exhaustive_matching(p, t, 0, used));
                auto r = match_skills(to_skills(p), to_skills(t));
                require(r.recall == m / static_cast<double>(nt), "recall differs from the exhaustive oracle");
                require(r.precision == (np == 0 ? 0.0 : m / static_cast<double>(np)),
                        "precision differs from the exhaustive oracle");
            }
        }
    }

    std::uniform_real_distribution<double> u(-10, 10);
    for (int v = 0; v < 50; ++v) {
        const std::size_t n = 3 + rng() % 40;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = u(rng);
            y[i] = 0.5 * x[i] + u(rng);
        }
        require(std::abs(pearson(x, y).r - static_cast<double>(definitional_r(x, y))) < 1e-9,
                "pearson differs from the definitional oracle");

        const double a = std::abs(u(rng)) + 0.01, b = u(rng);
        std::vector<double> lin(n);
        for (std::size_t i = 0; i < n; ++i) lin[i] = a * x[i] + b;
        require(pearson(x, lin).r == 1.0, "pearson of a positive linear map is not exactly 1.0");
    }

    auto s = [](std::initializer_list<const char*> v) {
        std::vector<Skill> out;
        for (auto n : v) out.push_back(Skill{n, "", Proficiency::Intermediate, ""});
        return out;
    };
    auto r = match_skills(s({"a", "b", "c"}), s({"b", "c", "d"}));
    require(r.recall == 2.0 / 3.0 && r.precision == 2.0 / 3.0, "{a,b,c}/{b,c,d} is not 2/3, 2/3");
}

// ---------------------------------------------------------------------------

void preference_aggregation() {
    PreferenceStore store;
    auto add = [&](ItemKind kind, int wins, int total) {
        for (int i = 0; i < total; ++i) {
            store.record(kind, json{{"system", "ours"}, {"item", i}}, json{{"system", "baseline"}, {"item", i}},
                         i < wins ? Choice::A : Choice::B);
        }
    };
    add(ItemKind::Gap, 22, 30);
    add(ItemKind::Path, 17, 30);
    add(ItemKind::Content, 24, 30);
    const auto gap = store.aggregate(ItemKind::Gap);
    const auto path = store.aggregate(ItemKind::Path);
    const auto content = store.aggregate(ItemKind::Content);
    require(gap.wins_a == 22 && gap.wins_b == 8 && gap.win_rate_a == 22.0 / 30.0, "gap tally is not 22/30");
    require(path.wins_a == 17 && path.wins_b == 13 && path.win_rate_a == 17.0 / 30.0, "path tally is not 17/30");
    require(content.win_rate_a == 0.8, "content tally is not 0.8");
    require(std::abs(*gap.win_rate_a - 0.7333333333) < 1e-9 && std::abs(*path.win_rate_a - 0.5666666667) < 1e-9,
            "rounded rates are off");
}

// ---------------------------------------------------------------------------

json random_sessions(const json& gap, std::mt19937& rng, bool drop_one) {
    std::vector<json> skills(gap.begin(), gap.end());
    std::shuffle(skills.begin(), skills.end(), rng);
    if (drop_one && skills.size() > 1) skills.pop_back();
    json out = json::array();
    for (const auto& g : skills) {
        out.push_back({{"title", "Work on " + g.at("name").get<std::string>()},
                       {"target_skills", {g.at("name")}},
                       {"difficulty", 1 + static_cast<int>(rng() % 5)},
                       {"estimated_minutes", 20 + static_cast<int>(rng() % 150)}});
    }
    return out;
}

// Seeded stand-in that returns plausible but imperfect scheduler and
// simulator output: shuffled difficulty, occasional missing coverage on a
// first attempt, dropped or edited completed sessions, random feedback.
ScriptedBackend::Responder unruly_scheduler(std::shared_ptr<std::mt19937> rng) {
    return [rng](const ChatRequest& req) {
        const auto in = prompt_input(req).value_or(json::object());
        const auto task = in.value("task", "");
        const bool first_attempt = req.messages.size() == 2;
        auto& r = *rng;
        if (task == "scheduler.schedule") {
            return json{{"sessions", random_sessions(in.at("gap"), r, first_attempt && r() % 3 == 0)}}.dump();
        }
        if (task == "scheduler.refine" || task == "scheduler.reschedule") {
            json sessions = json::array();
            const auto& prev = task == "scheduler.refine" ? in.at("path") : in.at("previous");
            // Refinement reworks the open sessions in place; rescheduling
            // replaces them with a fresh plan for the remaining gap.
            for (auto s : prev.at("sessions")) {
                if (s.value("status", "") == "completed") {
                    if (r() % 3 == 0) continue;                    // dropped
                    if (r() % 3 == 0) s["title"] = "edited title";  // altered
                } else if (task == "scheduler.reschedule") {
                    continue;
                }
                s["difficulty"] = 1 + static_cast<int>(r() % 5);
                s.erase("status");
                sessions.push_back(s);
            }
            if (task == "scheduler.reschedule") {
                for (auto& s : random_sessions(in.at("gap"), r, false)) sessions.push_back(s);
            }
            json notes = json::object();
            for (const auto& c : in.value("feedback", json::object()).value("requested_changes", json::array())) {
                notes[c.at("locator").get<std::string>()] = "adjusted";
            }
            json reply = {{"sessions", sessions}};
            if (task == "scheduler.refine") reply["change_notes"] = notes;
            return reply.dump();
        }
        if (task == "simulator.path") {
            json changes = json::array();
            const auto& ss = in.at("path").at("sessions");
            if (!ss.empty() && r() % 2) {
                changes.push_back({{"locator", ss[r() % ss.size()].at("id")}, {"request", "shorter please"}});
            }
            return json{{"scores",
                         {{"efficiency", 1 + static_cast<int>(r() % 5)},
                          {"engagement", 1 + static_cast<int>(r() % 5)},
                          {"difficulty_fit", 1 + static_cast<int>(r() % 5)}}},
                        {"requested_changes", changes}}
                .dump();
        }
        return heuristic_reply(in).dump();
    };
}

void scheduler_invariants() {
    const std::vector<std::string> universe{"sql", "etl", "spark", "python", "statistics",
                                            "docker", "airflow", "git", "kafka", "linux"};
    for (int run = 0; run < 100; ++run) {
        auto rng = std::make_shared<std::mt19937>(1000 + run);
        Gateway gateway;
        auto backend = std::make_shared<ScriptedBackend>(unruly_scheduler(rng));
        gateway.register_backend("mock", backend);
        gateway.set_default_backend("mock");
        LearnerSimulator sim(gateway);
        PathScheduler sched(gateway, sim, std::make_shared<SequentialIds>());

        std::vector<Skill> required;
        for (const auto& u : universe) {
            if ((*rng)() % 2) required.push_back(Skill{u, "", static_cast<Proficiency>((*rng)() % 5), ""});
        }
        if (required.size() < 2) required = {Skill{"sql"}, Skill{"etl"}};
        auto gap = compute_gap(required, {});
        gap.goal_id = "g";
        LearnerProfile profile;
        profile.learner_id = "l";
        for (const auto& g : gap.gap) profile.cognitive_status[g.skill.name] = {0, 0};

        const std::string tag = "run " + std::to_string(run) + ": ";
        auto out = sched.schedule_with_trace(profile, gap);
        require(out.simulator_calls <= sched.settings().refinement_budget, tag + "refinement exceeded its budget");
        require(path_violations(out.path, gap.required_names(), gap.gap_names()).empty(),
                tag + "initial path violates coverage or ordering");

        // Complete a prefix of the path, shrink the gap, and reschedule.
        auto path = approve_path(out.path);
        const std::size_t done = 1 + (*rng)() % std::max<std::size_t>(1, path.sessions.size() - 1);
        std::set<std::string> mastered;
        for (std::size_t i = 0; i < done && i < path.sessions.size(); ++i) {
            path.sessions[i].status = SessionStatus::Completed;
            for (const auto& t : path.sessions[i].target_skills) {
                mastered.insert(t);
                profile.cognitive_status[t] = {1.0, 1.0};
            }
        }
        profile.version += 1;
        auto next_gap = compute_gap(required, mastered);
        next_gap.goal_id = "g";
        auto next = sched.reschedule(profile, next_gap, path);
        require(preservation_violations(path, next).empty(), tag + "completed session lost or altered");
        require(path_violations(next, next_gap.required_names(), next_gap.gap_names()).empty(),
                tag + "rescheduled path violates coverage or ordering");

        if (!next_gap.empty()) {
            auto refined = sched.refine_loop(profile, next_gap, next);
            require(refined.simulator_calls <= sched.settings().refinement_budget, tag + "budget exceeded");
            require(preservation_violations(next, refined.path).empty(), tag + "refinement altered history");
            require(path_violations(refined.path, next_gap.required_names(), next_gap.gap_names()).empty(),
                    tag + "refined path violates coverage or ordering");
        }
    }
}

// ---------------------------------------------------------------------------

void profiler_properties() {
    const std::vector<std::string> universe{"sql", "etl", "spark", "python", "statistics", "docker"};
    std::uniform_real_distribution<double> unit(0, 1);
    for (int seq = 0; seq < 100; ++seq) {
        std::mt19937 rng(77 + seq);
        std::vector<Skill> required;
        for (const auto& u : universe) {
            if (rng() % 3) required.push_back(Skill{u, "", static_cast<Proficiency>(rng() % 5), ""});
        }
        if (required.empty()) required.push_back(Skill{"sql"});
        LearnerProfile p;
        p.learner_id = "l";
        for (const auto& s : required) p.cognitive_status[s.name] = {unit(rng) * 0.5, unit(rng) * 0.5};
        p.preferences.activity_weights = {{"reading", 0.4}, {"querying", 0.3}, {"exercises", 0.3}};

        auto at = parse_timestamp("2025-01-06T09:00:00.000Z");
        const int steps = 3 + static_cast<int>(rng() % 8);
        for (int step = 0; step < steps; ++step) {
            std::vector<TargetedSkill> targets;
            for (const auto& s : required) {
                if (rng() % 2) targets.push_back({s.name, target_mastery(s.target_proficiency)});
            }
            InteractionRecord rec;
            rec.learner_id = "l";
            rec.session_id = "s" + std::to_string(step);
            rec.time_spent_minutes = 10 + unit(rng) * 80;
            at += std::chrono::hours(1 + rng() % 72);
            rec.recorded_at = at;
            rec.events = {{at - std::chrono::minutes(10), EventType::Opened}};
            if (rng() % 4) {
                rec.quiz_score = unit(rng);
                rec.events.push_back({at, EventType::SubmittedQuiz});
            }
            ProfileAdjustment adj;
            if (rng() % 2) adj.activity_shifts["exercises"] = unit(rng) - 0.5;

            auto next = apply_interaction(p, rec, targets, adj);
            const std::string tag = "sequence " + std::to_string(seq) + " step " + std::to_string(step) + ": ";
            require(next.version == p.version + 1, tag + "version did not advance by one");
            std::set<std::string> targeted;
            for (const auto& t : targets) targeted.insert(t.name);
            for (const auto& [name, before] : p.cognitive_status) {
                const auto& after = next.cognitive_status.at(name);
                require(after.mastery >= before.mastery, tag + "mastery decreased for " + name);
                if (!targeted.contains(name)) require(after == before, tag + "untargeted skill " + name + " changed");
            }
            require(next.cognitive_status.size() == p.cognitive_status.size(), tag + "skills appeared or vanished");

            auto g1 = recompute_gap("g", required, next.cognitive_status, kDefaultMasteryThreshold, next.version);
            auto g2 = recompute_gap("g", g1.required, next.cognitive_status, kDefaultMasteryThreshold, next.version);
            require(g1 == g2, tag + "gap recompute is not idempotent");
            p = next;
        }
    }

    // Three sessions, perfect scores, one skill each: the gap closes.
    ScriptWorld w;
    LearnerProfiler profiler(w.gateway);
    std::vector<Skill> required{Skill{"sql", "", Proficiency::Beginner, ""},
                                Skill{"etl", "", Proficiency::Intermediate, ""},
                                Skill{"spark", "", Proficiency::Advanced, ""}};
    auto gap = compute_gap(required, {});
    auto profile = profiler.init_profile("l", "", gap);
    auto at = parse_timestamp("2025-02-03T09:00:00.000Z");
    for (std::size_t i = 0; i < required.size(); ++i) {
        LearningSession s{"s" + std::to_string(i), "Session", {required[i].name}, 1 + static_cast<int>(i), 30,
                          SessionStatus::Active};
        InteractionRecord rec;
        rec.learner_id = "l";
        rec.session_id = s.id;
        rec.quiz_score = 1.0;
        rec.time_spent_minutes = 30;
        at += std::chrono::hours(24);
        rec.recorded_at = at;
        rec.events = {{at - std::chrono::minutes(30), EventType::Opened}, {at, EventType::SubmittedQuiz}};
        auto up = profiler.update_profile(profile, rec, s, required, "g");
        require(up.gap.gap.size() == required.size() - i - 1, "gap did not shrink by one skill per session");
        profile = up.profile;
        gap = up.gap;
    }
    require(gap.empty(), "three perfect sessions left a non-empty gap");
    require(w.backend->call_count() == 0, "profiler called a model without feedback text");
}

// ---------------------------------------------------------------------------

struct ContentCase {
    LearnerProfile profile;
    SkillGap gap;
    LearningPath path;
    LearningSession session;
};

ContentCase content_case(int i) {
    static const std::vector<std::string> topics{"Window functions", "Batch pipelines", "Spark joins",
                                                 "Data contracts", "Query plans"};
    static const std::vector<ContentStyle> styles{ContentStyle::Concise, ContentStyle::Detailed,
                                                  ContentStyle::ExampleDriven};
    ContentCase c;
    std::vector<Skill> required{Skill{"sql"}, Skill{"etl"}, Skill{"spark"}};
    c.gap = compute_gap(required, {});
    c.profile.learner_id = "l" + std::to_string(i);
    c.profile.preferences.content_style = styles[static_cast<std::size_t>(i) % styles.size()];
    c.profile.preferences.activity_weights = {{"reading", 1.0}};
    c.session = LearningSession{"s" + std::to_string(i), topics[static_cast<std::size_t>(i) % topics.size()] +
                                                             " part " + std::to_string(i),
                                {required[static_cast<std::size_t>(i) % 3].name}, 2, 45, SessionStatus::Pending};
    c.path.id = "p";
    c.path.sessions = {c.session};
    return c;
}

ContentRun run_content(const ContentCase& c, std::shared_ptr<SearchProvider> search, bool broken_outline) {
    MockWorld w;
    if (broken_outline) {
        w.backend->enqueue(roles::kContentCreator,
                           json{{"sections",
                                 {{{"title", "Intro"}, {"knowledge_points", {"x"}}, {"category", "foundational"}},
                                  {{"title", "Use"}, {"knowledge_points", {"x"}}, {"category", "practical"}},
                                  {{"title", "More"}, {"knowledge_points", {"x"}}, {"category", "practical"}}}}});
    }
    LearnerSimulator sim(w.gateway);
    ContentCreator creator(w.gateway, sim, std::move(search), std::make_shared<HashEmbedder>());
    return creator.create(SessionContext{c.profile, c.gap, c.path, c.session});
}

void content_pipeline() {
    for (int i = 0; i < 20; ++i) {
        auto c = content_case(i);
        auto run = run_content(c, std::make_shared<SyntheticSearch>(), i % 4 == 0);
        const std::string tag = "run " + std::to_string(i) + ": ";
        std::set<KnowledgeCategory> cats;
        for (const auto& s : run.content.outline) cats.insert(s.category);
        require(cats.size() == 3, tag + "outline misses a knowledge category");
        require(!run.content.quiz.empty(), tag + "no quiz");
        for (const auto& q : run.content.quiz) {
            require(q.options.size() >= 2, tag + "quiz question with fewer than two options");
            require(q.correct_index >= 0 && q.correct_index < static_cast<int>(q.options.size()),
                    tag + "quiz correct_index out of range");
        }
        require(run.simulator_calls <= 2, tag + "content refinement exceeded its budget");
        require(!run.content.unsourced, tag + "sourced run flagged unsourced");
    }

    auto offline = std::make_shared<FixtureSearch>();
    offline->set_available(false);
    auto degraded = run_content(content_case(3), offline, false);
    require(degraded.degraded && degraded.content.unsourced, "degraded search did not set the unsourced flag");
    require(!degraded.content.document.empty() && !degraded.content.quiz.empty(), "degraded run is incomplete");

    for (int i : {0, 7}) {
        auto a = run_content(content_case(i), std::make_shared<SyntheticSearch>(), i == 0);
        auto b = run_content(content_case(i), std::make_shared<SyntheticSearch>(), i == 0);
        require(json(a.content).dump() == json(b.content).dump(), "content differs between identical runs");
    }
}

// ---------------------------------------------------------------------------

struct Service {
    MockWorld w;
    std::filesystem::path dir = fresh_dir("acc-service");
    DocumentStore store{dir};
    TutorService svc{w.gateway, store, std::make_shared<SyntheticSearch>(), std::make_shared<HashEmbedder>(),
                     std::make_shared<SequentialIds>()};
    ~Service() { std::filesystem::remove_all(dir); }

    HttpReply call(const std::string& method, const std::string& path, const json& body = json::object()) {
        return handle_request(svc, method, path, body.dump());
    }
};

// Goal with four required skills, one of which onboarding marks as known.
json onboarding_body() {
    return {{"goal", {{"title", "SQL"}, {"description", ""}}},
            {"onboarding_info", "I can already do technical communication"}};
}

json correct_answers(const json& content) {
    json a = json::array();
    for (const auto& q : content.at("quiz")) a.push_back(q.at("correct_index"));
    return a;
}

std::string pending_session(const json& path) {
    for (const auto& s : path.at("sessions")) {
        if (s.at("status") == "pending") return s.at("id");
    }
    return {};
}

// Drives a fresh learner up to `target`. Returns its id and the session id
// that operations in that phase should name.
std::pair<std::string, std::string> reach(Service& s, Phase target) {
    auto created = s.call("POST", "/learners", onboarding_body());
    require(created.status == 201, "onboarding failed: " + created.body.dump());
    const std::string id = created.body.at("learner_id");
    const std::string base = "/learners/" + id;
    if (target == Phase::GapReview) return {id, "ses-unknown"};

    auto confirmed = s.call("POST", base + "/gap/confirm");
    require(confirmed.status == 200, "confirm failed");
    while (true) {
        auto path = s.call("GET", base + "/path").body;
        const auto sid = pending_session(path.at("active"));
        if (target == Phase::PathActive) return {id, sid};
        auto content = s.call("GET", base + "/sessions/" + sid + "/content");
        require(content.status == 200, "content failed");
        if (target == Phase::SessionActive) return {id, sid};
        auto quiz = s.call("POST", base + "/sessions/" + sid + "/quiz",
                           json{{"answers", correct_answers(content.body)}, {"time_spent_minutes", 30}});
        require(quiz.status == 200, "quiz failed: " + quiz.body.dump());
        const auto phase = parse_phase(quiz.body.at("phase").get<std::string>());
        if (phase == target) return {id, sid};
        if (phase == Phase::RescheduleProposed) {
            require(s.call("POST", base + "/proposal/respond", json{{"accept", true}}).status == 200, "accept failed");
        }
        require(phase != Phase::GoalAchieved, "goal reached before the requested phase");
    }
}

void service_state_machine() {
    struct Op {
        std::string name;
        std::set<Phase> legal;
        std::function<HttpReply(Service&, const std::string&, const std::string&)> call;
    };
    const std::set<Phase> every{Phase::GapReview, Phase::PathActive, Phase::SessionActive, Phase::RescheduleProposed,
                                Phase::GoalAchieved};
    const std::vector<Op> ops{
        {"GET learner", every, [](Service& s, auto& id, auto&) { return s.call("GET", "/learners/" + id); }},
        {"POST gap/confirm", {Phase::GapReview},
         [](Service& s, auto& id, auto&) { return s.call("POST", "/learners/" + id + "/gap/confirm"); }},
        {"GET path", every, [](Service& s, auto& id, auto&) { return s.call("GET", "/learners/" + id + "/path"); }},
        {"GET content", {Phase::PathActive, Phase::SessionActive},
         [](Service& s, auto& id, auto& sid) {
             return s.call("GET", "/learners/" + id + "/sessions/" + sid + "/content");
         }},
        {"POST quiz", {Phase::SessionActive},
         [](Service& s, auto& id, auto& sid) {
             json answers = json::array({0, 0, 0, 0, 0});
             if (auto c = s.store.get("content", id + "__" + sid)) answers = correct_answers(*c);
             return s.call("POST", "/learners/" + id + "/sessions/" + sid + "/quiz",
                           json{{"answers", answers}, {"time_spent_minutes", 30}});
         }},
        {"POST proposal/respond", {Phase::RescheduleProposed},
         [](Service& s, auto& id, auto&) {
             return s.call("POST", "/learners/" + id + "/proposal/respond", json{{"accept", true}});
         }},
        {"GET profile", every, [](Service& s, auto& id, auto&) { return s.call("GET", "/learners/" + id + "/profile"); }},
        {"PATCH profile", every,
         [](Service& s, auto& id, auto&) {
             return s.call("PATCH", "/learners/" + id + "/profile",
                           json{{"preferences", {{"content_style", "detailed"}}}});
         }},
        {"GET interventions", every,
         [](Service& s, auto& id, auto&) { return s.call("GET", "/learners/" + id + "/interventions"); }},
    };

    // Before onboarding a learner does not exist: only creation succeeds.
    {
        Service s;
        for (const auto& op : ops) {
            auto r = op.call(s, "lrn-absent", "ses-1");
            require(r.status == 404, "onboarding: " + op.name + " returned " + std::to_string(r.status));
        }
        require(s.call("POST", "/learners", onboarding_body()).status == 201, "onboarding: create failed");
    }

    for (Phase phase : every) {
        for (const auto& op : ops) {
            Service s;
            auto [id, sid] = reach(s, phase);
            const auto before = s.svc.get_learner(id).state.phase;
            require(before == phase, "setup did not reach " + json(phase).get<std::string>());
            auto r = op.call(s, id, sid);
            const bool ok = r.status >= 200 && r.status < 300;
            const bool legal = op.legal.contains(phase);
            const std::string tag = json(phase).get<std::string>() + ": " + op.name + " -> " + std::to_string(r.status);
            require(ok == legal, tag + (legal ? " (expected success)" : " (expected refusal)"));
            if (!legal) {
                require(r.status == 409, tag + " (expected 409)");
                require(s.svc.get_learner(id).state.phase == phase, tag + " changed the phase");
            }
        }
    }

    // End to end: onboard, confirm, three sessions, goal reached.
    Service s;
    auto created = s.call("POST", "/learners", onboarding_body());
    const std::string id = created.body.at("learner_id");
    const std::string base = "/learners/" + id;
    require(created.body.at("gap").at("gap").size() == 3, "scripted goal does not yield a three-skill gap");
    require(s.call("POST", base + "/gap/confirm").status == 200, "confirm failed");
    int sessions = 0;
    Phase phase = Phase::PathActive;
    while (phase != Phase::GoalAchieved) {
        require(++sessions <= 3, "more than three sessions needed");
        const auto sid = pending_session(s.call("GET", base + "/path").body.at("active"));
        auto content = s.call("GET", base + "/sessions/" + sid + "/content").body;
        auto quiz = s.call("POST", base + "/sessions/" + sid + "/quiz",
                           json{{"answers", correct_answers(content)}, {"time_spent_minutes", 25}});
        require(quiz.body.at("quiz_score") == 1.0, "perfect answers did not score 1.0");
        phase = parse_phase(quiz.body.at("phase").get<std::string>());
        if (phase == Phase::RescheduleProposed) {
            s.call("POST", base + "/proposal/respond", json{{"accept", true}});
            phase = Phase::PathActive;
        }
    }
    require(sessions == 3, "goal reached after " + std::to_string(sessions) + " sessions");
    auto view = s.svc.get_learner(id);
    require(view.gap.empty(), "goal_achieved with a non-empty gap");
    require(s.svc.get_path(id).active->pending_count() == 0, "goal_achieved with pending sessions");
    s.call("PATCH", base + "/profile", json{{"preferences", {{"content_style", "example-driven"}}}});
    require(s.svc.replay_profile(id) == s.svc.get_profile(id), "log replay does not reproduce the profile");
}

// ---------------------------------------------------------------------------

void gateway_repair() {
    json schema = {{"type", "object"},
                   {"required", {"skills"}},
                   {"properties", {{"skills", {{"type", "array"}, {"minItems", 1}, {"items", {{"type", "string"}}}}}}}};
    ModelRequest req{roles::kSkillIdentifier, "list skills", "goal: analyst", schema, std::nullopt, std::nullopt, {}};

    ScriptWorld once;
    once.backend->enqueue(roles::kSkillIdentifier, std::string("I think the skills are SQL and Excel."));
    once.backend->enqueue(roles::kSkillIdentifier, json{{"skills", {"sql", "excel"}}});
    auto r = once.gateway.complete(req);
    require(r.attempts == 2, "expected 2 attempts, got " + std::to_string(r.attempts));
    require(r.parsed["skills"].size() == 2, "repaired reply lost content");

    ScriptWorld never;
    for (int i = 0; i < 3; ++i) never.backend->enqueue(roles::kSkillIdentifier, json{{"skills", json::array()}});
    try {
        never.gateway.complete(req);
        throw CheckFailed("exhausted retries did not raise");
    } catch (const GatewayError& e) {
        require(e.kind() == GatewayError::Kind::SchemaViolation, "exhaustion raised the wrong error kind");
    }
    require(never.backend->call_count() == 3, "exhaustion did not use exactly max_retries + 1 attempts");
}

}  // namespace

int main() {
    criterion("gap algebra: compute_gap equals set difference on 200 random pairs", 1.0, gap_algebra);
    criterion("dataset: filter oracle, seeded stratified disjoint split, byte-identical records", 5.0,
              dataset_pipeline);
    criterion("metrics: matching oracle up to size 8, pearson oracle and exact linear r, 2/3 instance", 2.0,
              metric_arithmetic);
    criterion("preferences: 22/30, 17/30 and 24/30 tallies", 0, preference_aggregation);
    criterion("scheduler: coverage, preservation, ordering and budget over 100 runs", 10.0, scheduler_invariants);
    criterion("profiler: version, mastery, frame and idempotence over 100 sequences; 3-session run closes gap", 5.0,
              profiler_properties);
    criterion("content: categories, quiz validity, degraded search, determinism over 20 runs", 10.0,
              content_pipeline);
    criterion("service: phase legality for every endpoint, end-to-end goal, log replay", 30.0, service_state_machine);
    criterion("gateway: repair after one bad reply, error after exhaustion", 0, gateway_repair);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
