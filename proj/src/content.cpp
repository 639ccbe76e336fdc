#include "mentor/content.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "mentor/prompts.hpp"

namespace mentor {

void to_json(json& j, const SearchResult& v) {
    j = json{{"query", v.query}, {"url", v.url}, {"title", v.title}, {"snippet", v.snippet},
             {"fetched_at", format_timestamp(v.fetched_at)}};
}

void from_json(const json& j, SearchResult& v) {
    v.query = j.value("query", "");
    v.url = j.value("url", "");
    v.title = j.value("title", "");
    v.snippet = j.value("snippet", "");
    v.fetched_at = j.contains("fetched_at") ? parse_timestamp(j["fetched_at"].get<std::string>()) : Timestamp{};
}

SearchOutcome search(SearchProvider* provider, const std::string& query, int k) {
    if (k < 1) throw ValidationError("search k must be >= 1");
    SearchOutcome out;
    if (provider == nullptr) {
        out.degraded = true;
        out.error = "no search provider configured";
        return out;
    }
    try {
        auto results = provider->search(query, k);
        for (auto& r : results) {
            if (r.snippet.empty()) continue;
            if (r.query.empty()) r.query = query;
            out.results.push_back(std::move(r));
            if (out.results.size() == static_cast<std::size_t>(k)) break;
        }
    } catch (const Error& e) {
        out.results.clear();
        out.degraded = true;
        out.error = e.what();
    }
    return out;
}

// ---------------------------------------------------------------------------

std::shared_ptr<FixtureSearch> FixtureSearch::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open search fixtures: " + path.string());
    json j = json::parse(in);
    std::vector<SearchResult> defaults;
    if (j.contains("default")) defaults = j["default"].get<std::vector<SearchResult>>();
    auto fx = std::make_shared<FixtureSearch>(std::move(defaults));
    if (j.contains("queries")) {
        for (const auto& [q, results] : j["queries"].items()) fx->add(q, results.get<std::vector<SearchResult>>());
    }
    return fx;
}

void FixtureSearch::add(const std::string& query, std::vector<SearchResult> results) {
    std::lock_guard lock(mutex_);
    by_query_[query] = std::move(results);
}

void FixtureSearch::set_available(bool available) {
    std::lock_guard lock(mutex_);
    available_ = available;
}

std::vector<std::string> FixtureSearch::queries() const {
    std::lock_guard lock(mutex_);
    return seen_;
}

std::vector<SearchResult> FixtureSearch::search(const std::string& query, int k) {
    std::lock_guard lock(mutex_);
    seen_.push_back(query);
    if (!available_) throw GatewayError(GatewayError::Kind::BackendUnreachable, "fixture search offline");
    auto it = by_query_.find(query);
    const auto& src = it != by_query_.end() ? it->second : defaults_;
    std::vector<SearchResult> out;
    for (const auto& r : src) {
        if (out.size() == static_cast<std::size_t>(k)) break;
        auto copy = r;
        copy.query = query;
        out.push_back(std::move(copy));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<float> HashEmbedder::embed(const std::string& text) {
    std::vector<float> v(dimension_, 0.0f);
    std::string token;
    auto flush = [&] {
        if (token.empty()) return;
        // FNV-1a 64
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : token) {
            h ^= c;
            h *= 1099511628211ull;
        }
        const auto slot = static_cast<std::size_t>(h % dimension_);
        v[slot] += ((h >> 63) != 0u) ? -1.0f : 1.0f;
        token.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            token.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    double norm = 0.0;
    for (float x : v) norm += static_cast<double>(x) * x;
    if (norm > 0.0) {
        const auto inv = static_cast<float>(1.0 / std::sqrt(norm));
        for (float& x : v) x *= inv;
    }
    return v;
}

std::vector<std::string> chunk_text(const std::string& text, std::size_t chunk_size, std::size_t overlap) {
    if (chunk_size == 0 || overlap >= chunk_size) throw ValidationError("chunk_size must exceed overlap");
    std::vector<std::string> out;
    if (text.empty()) return out;
    auto is_cont = [&](std::size_t i) {
        return i < text.size() && (static_cast<unsigned char>(text[i]) & 0xC0) == 0x80;
    };
    const std::size_t step = chunk_size - overlap;
    std::size_t start = 0;
    while (true) {
        std::size_t end = std::min(text.size(), start + chunk_size);
        while (end > start + 1 && is_cont(end)) --end;
        out.push_back(text.substr(start, end - start));
        if (end >= text.size()) break;
        std::size_t next = start + step;
        while (next > start + 1 && is_cont(next)) --next;
        start = std::max(next, start + 1);
    }
    return out;
}

RetrievalIndex RetrievalIndex::build(const std::vector<SearchResult>& results, Embedder& embedder,
                                     std::size_t chunk_size, std::size_t overlap) {
    RetrievalIndex idx;
    idx.dimension_ = embedder.dimension();
    for (const auto& r : results) {
        for (auto& chunk : chunk_text(r.snippet, chunk_size, overlap)) {
            auto e = embedder.embed(chunk);
            if (e.size() != idx.dimension_) throw Error("embedding dimension mismatch");
            idx.entries_.push_back(IndexEntry{r, std::move(chunk), std::move(e)});
        }
    }
    return idx;
}

std::vector<std::size_t> RetrievalIndex::top_k(const std::string& query, Embedder& embedder, std::size_t k) const {
    if (entries_.empty()) return {};
    auto q = embedder.embed(query);
    std::vector<double> score(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        const auto& e = entries_[i].embedding;
        for (std::size_t d = 0; d < e.size(); ++d) {
            dot += static_cast<double>(e[d]) * q[d];
            na += static_cast<double>(e[d]) * e[d];
            nb += static_cast<double>(q[d]) * q[d];
        }
        score[i] = (na > 0 && nb > 0) ? dot / std::sqrt(na * nb) : 0.0;
    }
    std::vector<std::size_t> order(entries_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] > score[b]; });
    order.resize(std::min(k, order.size()));
    return order;
}

std::string section_query(const LearningSession& session, const OutlineSection& section) {
    return session.title + " " + section.title;
}

// ---------------------------------------------------------------------------

namespace {

json context_input(const SessionContext& ctx) {
    json gap = json::array();
    for (const auto& g : ctx.gap.gap) {
        gap.push_back({{"name", normalize_skill_name(g.skill.name)}, {"current_mastery", g.current_mastery}});
    }
    json path = json::array();
    for (const auto& s : ctx.path.sessions) path.push_back({{"id", s.id}, {"title", s.title}});
    return {{"profile",
             {{"preferences", ctx.profile.preferences},
              {"cognitive_status", ctx.profile.cognitive_status}}},
            {"gap", gap},
            {"path", path},
            {"session", ctx.session}};
}

json outline_schema(int min_sections, int max_sections) {
    json section = {
        {"type", "object"},
        {"required", {"title", "knowledge_points", "category"}},
        {"properties",
         {{"title", {{"type", "string"}, {"minLength", 1}}},
          {"knowledge_points", {{"type", "array"}, {"minItems", 1}, {"items", {{"type", "string"}}}}},
          {"category", {{"enum", {"foundational", "practical", "problem_solving"}}}}}},
    };
    return {{"type", "object"},
            {"required", {"sections"}},
            {"properties",
             {{"sections",
               {{"type", "array"}, {"minItems", min_sections}, {"maxItems", max_sections}, {"items", section}}}}}};
}

json quiz_schema(int quiz_size) {
    json question = {
        {"type", "object"},
        {"required", {"stem", "options", "correct_index", "explanation"}},
        {"properties",
         {{"stem", {{"type", "string"}, {"minLength", 1}}},
          {"options", {{"type", "array"}, {"minItems", 2}, {"items", {{"type", "string"}}}}},
          {"correct_index", {{"type", "integer"}, {"minimum", 0}}},
          {"explanation", {{"type", "string"}}}}},
    };
    return {{"type", "array"}, {"minItems", quiz_size}, {"maxItems", quiz_size}, {"items", question}};
}

std::string assemble_document(const LearningSession& session, const std::vector<OutlineSection>& outline,
                              const std::map<std::string, SectionDraft>& drafts, const json& glue) {
    std::string doc = "# " + session.title + "\n\n";
    if (auto intro = glue.value("introduction", ""); !intro.empty()) doc += intro + "\n\n";
    const auto transitions = glue.value("transitions", std::vector<std::string>{});
    for (std::size_t i = 0; i < outline.size(); ++i) {
        doc += "## " + outline[i].title + "\n\n" + drafts.at(outline[i].title).text + "\n\n";
        if (i + 1 < outline.size() && i < transitions.size() && !transitions[i].empty()) {
            doc += transitions[i] + "\n\n";
        }
    }
    if (auto outro = glue.value("conclusion", ""); !outro.empty()) doc += "## Summary\n\n" + outro + "\n";
    return doc;
}

}  // namespace

ContentCreator::ContentCreator(const Gateway& gateway, const LearnerSimulator& simulator,
                               std::shared_ptr<SearchProvider> search, std::shared_ptr<Embedder> embedder,
                               ContentSettings settings)
    : gateway_(gateway),
      simulator_(simulator),
      search_(std::move(search)),
      embedder_(std::move(embedder)),
      settings_(settings) {
    if (!embedder_) embedder_ = std::make_shared<HashEmbedder>();
    if (settings_.quiz_size < 1) throw ConfigError("quiz_size must be >= 1");
}

Exploration ContentCreator::explore_outline(const SessionContext& ctx) const {
    if (ctx.path.find(ctx.session.id) == nullptr) {
        throw ValidationError("session " + ctx.session.id + " is not part of path " + ctx.path.id);
    }
    Exploration ex;
    auto found = search(search_.get(), ctx.session.title, settings_.search_results);
    ex.results = found.results;
    ex.degraded = found.degraded;

    json input = context_input(ctx);
    json results = json::array();
    for (const auto& r : ex.results) results.push_back({{"title", r.title}, {"url", r.url}, {"snippet", r.snippet}});
    input["search_results"] = results;
    input["min_sections"] = settings_.min_sections;
    input["max_sections"] = settings_.max_sections;

    OutputCheck check = [](const json& out) {
        return outline_violations(out.at("sections").get<std::vector<OutlineSection>>());
    };
    auto resp = gateway_.complete(make_model_request(roles::kContentCreator, "content.outline", std::move(input),
                                                     outline_schema(settings_.min_sections, settings_.max_sections),
                                                     check));
    ex.outline = resp.parsed.at("sections").get<std::vector<OutlineSection>>();
    return ex;
}

RetrievalIndex ContentCreator::build_index(const std::vector<SearchResult>& results) const {
    return RetrievalIndex::build(results, *embedder_, settings_.chunk_size, settings_.chunk_overlap);
}

SectionDraft ContentCreator::draft_section(const SessionContext& ctx, const std::vector<OutlineSection>& outline,
                                           const OutlineSection& section, const RetrievalIndex& index,
                                           const std::string& revision_request,
                                           const std::string& previous_draft) const {
    if (std::find(outline.begin(), outline.end(), section) == outline.end()) {
        throw ValidationError("section '" + section.title + "' is not in the outline");
    }
    SectionDraft draft;
    draft.query = section_query(ctx.session, section);
    auto hits = index.top_k(draft.query, *embedder_, settings_.retrieval_top_k);

    json retrieved = json::array();
    for (std::size_t i = 0; i < hits.size(); ++i) {
        const auto& e = index.entries()[hits[i]];
        retrieved.push_back({{"chunk_id", i}, {"origin", e.source.url}, {"text", e.chunk}});
    }
    json input = context_input(ctx);
    input["content_style"] = ctx.profile.preferences.content_style;
    input["outline"] = outline;
    input["section"] = section;
    input["retrieval_query"] = draft.query;
    input["retrieved"] = retrieved;
    if (!revision_request.empty()) {
        input["revision_request"] = revision_request;
        input["previous_draft"] = previous_draft;
    }

    json schema = {{"type", "object"},
                   {"required", {"text", "cited_chunks"}},
                   {"properties",
                    {{"text", {{"type", "string"}, {"minLength", 1}}},
                     {"cited_chunks", {{"type", "array"}, {"items", {{"type", "integer"}, {"minimum", 0}}}}}}}};
    const std::size_t n_hits = hits.size();
    OutputCheck check = [n_hits](const json& out) {
        std::vector<std::string> problems;
        const auto& cited = out.at("cited_chunks");
        if (n_hits > 0 && cited.empty()) problems.push_back("cite at least one retrieved chunk");
        for (const auto& c : cited) {
            if (c.get<std::size_t>() >= n_hits) problems.push_back("cited chunk " + c.dump() + " does not exist");
        }
        return problems;
    };
    auto resp = gateway_.complete(
        make_model_request(roles::kContentCreator, "content.draft", std::move(input), schema, check));

    draft.text = resp.parsed.at("text").get<std::string>();
    draft.unsourced = n_hits == 0;
    std::set<std::size_t> seen;
    for (const auto& c : resp.parsed.at("cited_chunks")) {
        auto i = c.get<std::size_t>();
        if (!seen.insert(i).second) continue;
        const auto& e = index.entries()[hits[i]];
        draft.sources.push_back(SourceRef{e.source.url, e.chunk});
    }
    return draft;
}

SessionContent ContentCreator::integrate(const SessionContext& ctx, const std::vector<OutlineSection>& outline,
                                         const std::map<std::string, SectionDraft>& drafts) const {
    json sections = json::array();
    for (const auto& s : outline) {
        auto it = drafts.find(s.title);
        if (it == drafts.end()) throw ValidationError("no draft for section '" + s.title + "'");
        sections.push_back({{"title", s.title}, {"category", s.category}, {"draft", it->second.text}});
    }
    const std::size_t n_transitions = outline.empty() ? 0 : outline.size() - 1;
    json schema = {{"type", "object"},
                   {"required", {"introduction", "transitions", "conclusion", "quiz"}},
                   {"properties",
                    {{"introduction", {{"type", "string"}}},
                     {"transitions", {{"type", "array"}, {"items", {{"type", "string"}}}}},
                     {"conclusion", {{"type", "string"}}},
                     {"quiz", quiz_schema(settings_.quiz_size)}}}};
    OutputCheck check = [n_transitions](const json& out) {
        auto problems = quiz_violations(out.at("quiz").get<std::vector<QuizQuestion>>());
        if (out.at("transitions").size() != n_transitions) {
            problems.push_back("expected " + std::to_string(n_transitions) + " transitions");
        }
        return problems;
    };
    json input = context_input(ctx);
    input["content_style"] = ctx.profile.preferences.content_style;
    input["sections"] = sections;
    input["quiz_size"] = settings_.quiz_size;
    auto resp = gateway_.complete(
        make_model_request(roles::kContentCreator, "content.integrate", std::move(input), schema, check));

    SessionContent c;
    c.session_id = ctx.session.id;
    c.outline = outline;
    for (const auto& s : outline) {
        const auto& d = drafts.at(s.title);
        c.drafts[s.title] = d.text;
        c.unsourced = c.unsourced || d.unsourced;
        for (const auto& src : d.sources) {
            if (std::find(c.sources.begin(), c.sources.end(), src) == c.sources.end()) c.sources.push_back(src);
        }
    }
    c.document = assemble_document(ctx.session, outline, drafts, resp.parsed);
    c.quiz = resp.parsed.at("quiz").get<std::vector<QuizQuestion>>();
    c.validate();
    return c;
}

SessionContent ContentCreator::integrate_and_refine(const SessionContext& ctx,
                                                    const std::vector<OutlineSection>& outline,
                                                    std::map<std::string, SectionDraft>& drafts,
                                                    const SimulatedFeedback& feedback,
                                                    const RetrievalIndex& index) const {
    if (feedback.target_kind != FeedbackTarget::Content) throw ValidationError("refinement needs content feedback");
    // Several requests for one section are merged into one revision.
    std::map<std::string, std::string> requests;
    for (const auto& ch : feedback.requested_changes) {
        auto& r = requests[ch.locator];
        r += (r.empty() ? "" : "\n") + ch.request;
    }
    for (const auto& [title, request] : requests) {
        auto it = std::find_if(outline.begin(), outline.end(), [&](const auto& s) { return s.title == title; });
        if (it == outline.end()) throw ValidationError("feedback names unknown section '" + title + "'");
        drafts[title] = draft_section(ctx, outline, *it, index, request, drafts.at(title).text);
    }
    return integrate(ctx, outline, drafts);
}

ContentRun ContentCreator::create(const SessionContext& ctx) const {
    ContentRun run;
    auto ex = explore_outline(ctx);
    run.degraded = ex.degraded;

    std::vector<SearchResult> corpus = ex.results;
    for (const auto& section : ex.outline) {
        auto found = search(search_.get(), section_query(ctx.session, section), settings_.search_results);
        run.degraded = run.degraded || found.degraded;
        corpus.insert(corpus.end(), found.results.begin(), found.results.end());
    }
    const auto index = build_index(corpus);

    std::map<std::string, SectionDraft> drafts;
    for (const auto& section : ex.outline) drafts[section.title] = draft_section(ctx, ex.outline, section, index);
    run.content = integrate(ctx, ex.outline, drafts);

    for (int round = 0; round < settings_.refinement_budget; ++round) {
        auto fb = simulator_.simulate_content_feedback(ctx.profile, run.content);
        ++run.simulator_calls;
        run.feedback.push_back(fb);
        if (fb.satisfied() || fb.requested_changes.empty()) break;
        run.content = integrate_and_refine(ctx, ex.outline, drafts, fb, index);
    }
    run.content.unsourced = run.content.unsourced || run.degraded;
    return run;
}

}  // namespace mentor
