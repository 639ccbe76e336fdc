#include "mentor/mock_agents.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "mentor/prompts.hpp"

namespace mentor {

namespace {

const std::set<std::string>& stopwords() {
    static const std::set<std::string> s{
        "the",  "and",  "for",   "with", "from", "into", "that", "this", "your", "you",  "are",  "our",
        "will", "have", "has",   "how",  "what", "who",  "use",  "using", "learn", "learning", "become",
        "want", "able", "about", "work", "role", "job",  "team", "such", "also", "more", "they", "their",
        "them", "can",  "all",   "any",  "new",  "who",  "was",  "were", "been", "its",  "not",  "but"};
    return s;
}

std::vector<std::string> words(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 3 && !stopwords().contains(cur) &&
            !std::all_of(cur.begin(), cur.end(), [](unsigned char c) { return std::isdigit(c); })) {
            out.push_back(cur);
        }
        cur.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::vector<std::string> distinct(const std::vector<std::string>& ws, std::size_t limit) {
    std::vector<std::string> out;
    for (const auto& w : ws) {
        if (out.size() == limit) break;
        if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
    }
    return out;
}

// Most frequent words, ties broken by first appearance.
std::vector<std::string> top_words(const std::vector<std::string>& ws, std::size_t limit) {
    std::map<std::string, std::pair<int, std::size_t>> stats;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        auto [it, fresh] = stats.try_emplace(ws[i], 0, i);
        ++it->second.first;
    }
    std::vector<std::pair<std::string, std::pair<int, std::size_t>>> v(stats.begin(), stats.end());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        if (a.second.first != b.second.first) return a.second.first > b.second.first;
        return a.second.second < b.second.second;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size() && i < limit; ++i) out.push_back(v[i].first);
    return out;
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string style_from(const std::string& text) {
    const auto t = lower(text);
    if (t.find("example") != std::string::npos || t.find("hands-on") != std::string::npos) return "example-driven";
    if (t.find("detail") != std::string::npos || t.find("in depth") != std::string::npos) return "detailed";
    if (t.find("concise") != std::string::npos || t.find("short") != std::string::npos) return "concise";
    return "";
}

// ---------------------------------------------------------------------------

json map_goal(const json& in, bool tracked) {
    const auto& goal = in.at("goal");
    auto kws = distinct(words(goal.value("title", "")), 3);
    for (const auto& w : distinct(words(goal.value("description", "")), 3)) {
        if (kws.size() == 3) break;
        if (std::find(kws.begin(), kws.end(), w) == kws.end()) kws.push_back(w);
    }
    if (kws.empty()) kws.push_back("general");

    json skills = json::array();
    json per_task = json::object();
    json rationale = json::object();
    json tasks = json::array();
    for (const auto& kw : kws) {
        const std::string task = "work with " + kw;
        tasks.push_back(task);
        const std::string basic = kw + " fundamentals";
        const std::string applied = "applied " + kw;
        skills.push_back({{"name", basic}, {"category", kw}, {"target_proficiency", "beginner"},
                          {"rationale", "needed to read and follow " + kw + " material"}});
        skills.push_back({{"name", applied}, {"category", kw}, {"target_proficiency", "intermediate"},
                          {"rationale", "needed to " + task + " independently"}});
        per_task[task] = {basic, applied};
        rationale[basic] = "entry level is enough to follow " + kw + " discussions";
        rationale[applied] = "the goal requires independent use of " + kw;
    }
    if (skills.size() < 4) {
        const std::string task = "solve problems in context";
        tasks.push_back(task);
        skills.push_back({{"name", "problem decomposition"}, {"category", "general"},
                          {"target_proficiency", "intermediate"}, {"rationale", "breaks tasks down"}});
        skills.push_back({{"name", "technical communication"}, {"category", "general"},
                          {"target_proficiency", "beginner"}, {"rationale", "explains results"}});
        per_task[task] = {"problem decomposition", "technical communication"};
        rationale["problem decomposition"] = "needed for unfamiliar tasks";
        rationale["technical communication"] = "needed to report work";
    }
    json out = {{"skills", skills}};
    if (tracked) {
        out["key_tasks"] = tasks;
        out["skills_per_task"] = per_task;
        out["proficiency_rationale"] = rationale;
    }
    return out;
}

json identify_mastered(const json& in) {
    const auto text = normalize_skill_name(in.value("onboarding_info", ""));
    json mastered = json::array();
    for (const auto& s : in.at("required")) {
        const auto name = normalize_skill_name(s.is_string() ? s.get<std::string>() : s.at("name").get<std::string>());
        if (!text.empty() && text.find(name) != std::string::npos) mastered.push_back(name);
    }
    return {{"mastered", mastered}};
}

json dataset_extract(const json& in) {
    const auto title = in.value("title", "");
    const auto body = in.value("body", "");
    auto ws = words(body);
    auto skills_kw = top_words(ws, 5);
    if (skills_kw.empty()) skills_kw.push_back("communication");
    json skills = json::array();
    for (std::size_t i = 0; i < skills_kw.size(); ++i) {
        skills.push_back({{"name", skills_kw[i]},
                          {"category", "domain"},
                          {"target_proficiency", i < 2 ? "advanced" : "intermediate"},
                          {"rationale", "mentioned repeatedly in the posting"}});
    }
    std::string summary = "Become a " + (title.empty() ? std::string("practitioner") : title);
    if (!skills_kw.empty()) summary += " working with " + skills_kw.front();
    return {{"summary", summary}, {"skills", skills}};
}

json cot_tracks(const json& in) {
    json tasks = json::array();
    json per_task = json::object();
    json rationale = json::object();
    for (const auto& s : in.at("skills")) {
        const auto name = s.is_string() ? s.get<std::string>() : s.at("name").get<std::string>();
        const std::string task = "apply " + name;
        tasks.push_back(task);
        per_task[task] = {name};
        rationale[name] = "level set by how central " + name + " is to the goal";
    }
    if (tasks.empty()) tasks.push_back("understand the goal");
    return {{"key_tasks", tasks}, {"skills_per_task", per_task}, {"proficiency_rationale", rationale}};
}

json profiler_init(const json& in) {
    const auto style = style_from(in.value("onboarding_info", ""));
    return {{"content_style", style.empty() ? json(nullptr) : json(style)},
            {"engagement_flags", json::array()},
            {"annotation", "background reviewed at onboarding"}};
}

json profiler_interpret(const json& in) {
    const auto text = in.at("interaction").value("feedback_text", "");
    const auto style = style_from(text);
    json shifts = json::object();
    const double step = in.value("max_shift", 0.1);
    const auto t = lower(text);
    if (t.find("exercise") != std::string::npos || t.find("practice") != std::string::npos) {
        shifts["exercises"] = step;
        shifts["reading"] = -step;
    }
    return {{"content_style", style.empty() ? json(nullptr) : json(style)},
            {"activity_shifts", shifts},
            {"engagement_flags", json::array()},
            {"annotation", "feedback: " + text.substr(0, 80)}};
}

json simulate_path(const json& in) {
    int last = 0;
    bool monotone = true;
    json changes = json::array();
    for (const auto& s : in.at("path").at("sessions")) {
        if (s.value("status", "pending") != "pending") continue;
        const int d = s.value("difficulty", 1);
        if (d < last) monotone = false;
        last = std::max(last, d);
        if (s.value("estimated_minutes", 0) > 120) {
            changes.push_back({{"locator", s.at("id")}, {"request", "split or shorten this session"}});
        }
    }
    return {{"scores",
             {{"efficiency", changes.empty() ? 4 : 3}, {"engagement", 4}, {"difficulty_fit", monotone ? 5 : 2}}},
            {"requested_changes", changes}};
}

json simulate_content(const json& in) {
    json changes = json::array();
    for (const auto& [title, text] : in.at("content").at("drafts").items()) {
        if (text.get<std::string>().size() < 160) {
            changes.push_back({{"locator", title}, {"request", "expand this section with a worked example"}});
        }
    }
    return {{"scores", {{"clarity", changes.empty() ? 5 : 3}, {"relevance", 4}, {"difficulty_fit", 4}}},
            {"requested_changes", changes}};
}

int difficulty_for(const json& gap_skill) {
    static const std::map<std::string, int> rank{
        {"novice", 1}, {"beginner", 2}, {"intermediate", 3}, {"advanced", 4}, {"expert", 5}};
    auto it = rank.find(gap_skill.value("target_proficiency", "intermediate"));
    return it == rank.end() ? 3 : it->second;
}

json new_sessions_for(const std::vector<json>& gap_skills, int max_sessions, const std::string& prefix) {
    json sessions = json::array();
    if (gap_skills.empty() || max_sessions < 1) return sessions;
    const std::size_t per = (gap_skills.size() + max_sessions - 1) / static_cast<std::size_t>(max_sessions);
    for (std::size_t i = 0; i < gap_skills.size(); i += per) {
        json targets = json::array();
        std::string title = prefix;
        int difficulty = 1;
        for (std::size_t k = i; k < std::min(gap_skills.size(), i + per); ++k) {
            const auto name = gap_skills[k].at("name").get<std::string>();
            targets.push_back(name);
            title += (k == i ? " " : " and ") + name;
            difficulty = std::max(difficulty, difficulty_for(gap_skills[k]));
        }
        sessions.push_back({{"title", title},
                            {"target_skills", targets},
                            {"difficulty", difficulty},
                            {"estimated_minutes", 45},
                            {"rationale", "addresses the listed gap skills"}});
    }
    return sessions;
}

json schedule(const json& in) {
    std::vector<json> gap(in.at("gap").begin(), in.at("gap").end());
    std::stable_sort(gap.begin(), gap.end(),
                     [](const json& a, const json& b) { return difficulty_for(a) < difficulty_for(b); });
    return {{"sessions", new_sessions_for(gap, in.value("max_sessions", 10), "Learn")}};
}

json refine(const json& in) {
    std::set<std::string> flagged;
    json notes = json::object();
    for (const auto& c : in.at("feedback").value("requested_changes", json::array())) {
        const auto loc = c.at("locator").get<std::string>();
        flagged.insert(loc);
        notes[loc] = "shortened to keep the session focused";
    }
    json sessions = json::array();
    for (auto s : in.at("path").at("sessions")) {
        if (flagged.contains(s.at("id").get<std::string>())) {
            s["estimated_minutes"] = std::min(60, s.value("estimated_minutes", 60));
        }
        s.erase("status");
        sessions.push_back(s);
    }
    return {{"sessions", sessions}, {"change_notes", notes}};
}

json reschedule(const json& in) {
    std::set<std::string> gap_names;
    for (const auto& g : in.at("gap")) gap_names.insert(g.at("name").get<std::string>());
    json sessions = json::array();
    std::set<std::string> covered_open;
    for (auto s : in.at("previous").at("sessions")) {
        const bool open = s.value("status", "pending") != "completed";
        if (open) {
            for (const auto& t : s.at("target_skills")) covered_open.insert(normalize_skill_name(t.get<std::string>()));
        }
        s.erase("status");
        sessions.push_back(s);
    }
    std::vector<json> missing;
    for (const auto& g : in.at("gap")) {
        if (!covered_open.contains(normalize_skill_name(g.at("name").get<std::string>()))) missing.push_back(g);
    }
    int open_count = 0;
    for (const auto& s : in.at("previous").at("sessions")) {
        if (s.value("status", "pending") != "completed") ++open_count;
    }
    const int room = std::max(1, in.value("max_sessions", 10) - open_count);
    for (auto& s : new_sessions_for(missing, room, "Review")) sessions.push_back(s);
    return {{"sessions", sessions}};
}

json outline(const json& in) {
    const auto& session = in.at("session");
    const auto title = session.value("title", "this topic");
    json points = json::array();
    for (const auto& t : session.value("target_skills", json::array())) points.push_back(t);
    if (points.empty()) points.push_back(title);
    return {{"sections",
             {{{"title", "Foundations of " + title}, {"knowledge_points", points}, {"category", "foundational"}},
              {{"title", title + " in practice"}, {"knowledge_points", points}, {"category", "practical"}},
              {{"title", "Solving problems with " + title},
               {"knowledge_points", points},
               {"category", "problem_solving"}}}}};
}

json draft(const json& in) {
    const auto& section = in.at("section");
    const auto title = section.value("title", "");
    std::string text = "This section covers " + title + ".";
    for (const auto& kp : section.value("knowledge_points", json::array())) {
        text += " It builds " + kp.get<std::string>() + " step by step.";
    }
    json cited = json::array();
    const auto& retrieved = in.value("retrieved", json::array());
    for (std::size_t i = 0; i < retrieved.size() && i < 2; ++i) {
        const auto chunk = retrieved[i].value("text", "");
        text += " Source note: " + chunk.substr(0, 120) + ".";
        cited.push_back(i);
    }
    if (in.contains("revision_request")) {
        text += " Worked example: apply " + title + " to a small task, check the result, and explain each step.";
    }
    if (in.value("content_style", "") == "detailed") {
        text += " Each idea is explained with its assumptions and limits.";
    }
    return {{"text", text}, {"cited_chunks", cited}};
}

json integrate(const json& in) {
    const auto& sections = in.at("sections");
    const int quiz_size = in.value("quiz_size", 5);
    json transitions = json::array();
    for (std::size_t i = 1; i < sections.size(); ++i) {
        transitions.push_back("Next, we move on to " + sections[i].at("title").get<std::string>() + ".");
    }
    const auto session_title = in.at("session").value("title", "this session");
    json quiz = json::array();
    for (int q = 0; q < quiz_size; ++q) {
        const auto& sec = sections.empty() ? json::object() : sections[q % sections.size()];
        const auto topic = sec.value("title", session_title);
        const int correct = q % 4;
        json options = json::array();
        for (int o = 0; o < 4; ++o) {
            options.push_back(o == correct ? "The statement supported by " + topic
                                           : "Distractor " + std::to_string(o + 1) + " for " + topic);
        }
        quiz.push_back({{"stem", "Question " + std::to_string(q + 1) + ": which statement about " + topic +
                                     " is accurate?"},
                        {"options", options},
                        {"correct_index", correct},
                        {"explanation", "It follows from the section on " + topic + "."}});
    }
    return {{"introduction", "This session works through " + session_title + "."},
            {"transitions", transitions},
            {"conclusion", "You have now covered " + session_title + "."},
            {"quiz", quiz}};
}

json judge_skills(const json& in) {
    json matches = json::array();
    std::set<std::size_t> used;
    const auto& truth = in.at("truth");
    std::size_t matched = 0;
    for (const auto& p : in.at("predicted")) {
        const auto key = normalize_skill_name(p.get<std::string>());
        for (std::size_t t = 0; t < truth.size(); ++t) {
            if (!used.contains(t) && normalize_skill_name(truth[t].get<std::string>()) == key) {
                used.insert(t);
                matches.push_back({{"predicted", p}, {"truth", truth[t]}});
                ++matched;
                break;
            }
        }
    }
    const double recall = truth.empty() ? 0.0 : static_cast<double>(matched) / static_cast<double>(truth.size());
    const int alignment = 1 + static_cast<int>(recall * 4.0 + 0.5);
    return {{"matches", matches},
            {"goal_alignment", {{"score", std::clamp(alignment, 1, 5)}, {"justification", "share of required skills found"}}}};
}

json judge_path(const json& in) {
    int last = 0;
    bool monotone = true;
    for (const auto& s : in.at("path").at("sessions")) {
        if (s.value("status", "pending") != "pending") continue;
        if (s.value("difficulty", 1) < last) monotone = false;
        last = std::max(last, s.value("difficulty", 1));
    }
    return {{"progression", {{"score", monotone ? 5 : 3}, {"justification", "difficulty ordering"}}},
            {"engagement", {{"score", 4}, {"justification", "session lengths are manageable"}}}};
}

json judge_content(const json& in) {
    const bool has_quiz = in.at("content").contains("quiz");
    return {{"goal_relevance", {{"score", 4}, {"justification", "sections follow the session targets"}}},
            {"content_quality", {{"score", has_quiz ? 5 : 3}, {"justification", "structure and assessment"}}},
            {"engagement", {{"score", 4}, {"justification", "examples and transitions"}}},
            {"personalization", {{"score", 4}, {"justification", "matches the stated style"}}}};
}

}  // namespace

json heuristic_reply(const json& input) {
    const auto task = input.value("task", "");
    if (task == "skill_identifier.map_goal") return map_goal(input, true);
    if (task == "skill_identifier.baseline_direct" || task == "skill_identifier.baseline_cot") {
        return map_goal(input, false);
    }
    if (task == "skill_identifier.identify_mastered") return identify_mastered(input);
    if (task == "dataset.extract") return dataset_extract(input);
    if (task == "dataset.cot_tracks") return cot_tracks(input);
    if (task == "profiler.init") return profiler_init(input);
    if (task == "profiler.interpret") return profiler_interpret(input);
    if (task == "simulator.path") return simulate_path(input);
    if (task == "simulator.content") return simulate_content(input);
    if (task == "scheduler.schedule") return schedule(input);
    if (task == "scheduler.refine") return refine(input);
    if (task == "scheduler.reschedule") return reschedule(input);
    if (task == "content.outline") return outline(input);
    if (task == "content.draft") return draft(input);
    if (task == "content.integrate") return integrate(input);
    if (task == "judge.skills") return judge_skills(input);
    if (task == "judge.path") return judge_path(input);
    if (task == "judge.content") return judge_content(input);
    return json::object();
}

std::string HeuristicBackend::complete(const ChatRequest& request) {
    ++calls_;
    auto input = prompt_input(request);
    if (!input) return "{}";
    return heuristic_reply(*input).dump();
}

std::vector<SearchResult> SyntheticSearch::search(const std::string& query, int k) {
    std::vector<SearchResult> out;
    const auto slug_words = words(query);
    std::string slug;
    for (const auto& w : slug_words) slug += (slug.empty() ? "" : "-") + w;
    if (slug.empty()) slug = "topic";
    const auto now = now_ms();
    for (int i = 0; i < k; ++i) {
        std::string snippet;
        int sentence = 0;
        while (snippet.size() < 600) {
            snippet += "Reference " + std::to_string(i + 1) + " on " + query + ", point " +
                       std::to_string(++sentence) + ": practitioners describe " + query +
                       " through definitions, worked examples and common mistakes. ";
        }
        out.push_back(SearchResult{query, "https://example.org/" + slug + "/" + std::to_string(i + 1),
                                   query + " reference " + std::to_string(i + 1), snippet, now});
    }
    return out;
}

}  // namespace mentor
