#pragma once

// Session content pipeline: goal-oriented exploration (outline), retrieval-
// augmented section drafting, then integration with simulator-driven
// refinement and quiz generation.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mentor/gateway.hpp"
#include "mentor/model.hpp"
#include "mentor/simulator.hpp"

namespace mentor {

struct SearchResult {
    std::string query;
    std::string url;
    std::string title;
    std::string snippet;
    Timestamp fetched_at{};

    bool operator==(const SearchResult&) const = default;
};

void to_json(json& j, const SearchResult& v);
void from_json(const json& j, SearchResult& v);

// Web search adapter. Throws GatewayError(BackendUnreachable) when down.
class SearchProvider {
public:
    virtual ~SearchProvider() = default;
    virtual std::vector<SearchResult> search(const std::string& query, int k) = 0;
};

struct SearchOutcome {
    std::vector<SearchResult> results;
    bool degraded = false;  // provider unavailable; callers continue model-only
    std::string error;
};

inline constexpr int kDefaultSearchResults = 5;

// At most k results; a missing or failing provider yields an empty, degraded
// outcome instead of an exception. Results with empty snippets are dropped.
SearchOutcome search(SearchProvider* provider, const std::string& query, int k = kDefaultSearchResults);

// Serves fixture results. The fixture file is a JSON object
// {"default": [results...], "queries": {"<query>": [results...]}}.
class FixtureSearch final : public SearchProvider {
public:
    FixtureSearch() = default;
    explicit FixtureSearch(std::vector<SearchResult> defaults) : defaults_(std::move(defaults)) {}
    static std::shared_ptr<FixtureSearch> from_file(const std::filesystem::path& path);

    void add(const std::string& query, std::vector<SearchResult> results);
    void set_available(bool available);
    std::vector<std::string> queries() const;

    std::vector<SearchResult> search(const std::string& query, int k) override;

private:
    mutable std::mutex mutex_;
    std::vector<SearchResult> defaults_;
    std::map<std::string, std::vector<SearchResult>> by_query_;
    bool available_ = true;
    std::vector<std::string> seen_;
};

struct HttpSearchOptions {
    // Bing Web Search v7 style: GET <endpoint>?q=..&count=k, results under
    // webPages.value[] with name/url/snippet.
    std::string endpoint = "https://api.bing.microsoft.com/v7.0/search";
    std::string api_key;
    int timeout_seconds = 20;
};
std::shared_ptr<SearchProvider> make_http_search(HttpSearchOptions options);

// Text embedding backend.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<float> embed(const std::string& text) = 0;
};

// Deterministic signed feature hashing of lowercase alphanumeric tokens,
// L2-normalized. Identical text always maps to an identical vector.
class HashEmbedder final : public Embedder {
public:
    explicit HashEmbedder(std::size_t dimension = 256) : dimension_(dimension) {}
    std::size_t dimension() const override { return dimension_; }
    std::vector<float> embed(const std::string& text) override;

private:
    std::size_t dimension_;
};

struct HttpEmbedderOptions {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/embeddings";
    std::string model = "text-embedding-3-small";
    std::string api_key;
    std::size_t dimension = 1536;
    int timeout_seconds = 60;
};
std::shared_ptr<Embedder> make_http_embedder(HttpEmbedderOptions options);

// Fixed-size character windows advancing by (size - overlap). Boundaries are
// moved back onto UTF-8 code point starts. The last window ends at the text end.
std::vector<std::string> chunk_text(const std::string& text, std::size_t chunk_size, std::size_t overlap);

struct IndexEntry {
    SearchResult source;
    std::string chunk;
    std::vector<float> embedding;
};

// Immutable once built.
class RetrievalIndex {
public:
    RetrievalIndex() = default;
    static RetrievalIndex build(const std::vector<SearchResult>& results, Embedder& embedder,
                                std::size_t chunk_size = 400, std::size_t overlap = 50);

    const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
    std::size_t dimension() const noexcept { return dimension_; }
    bool empty() const noexcept { return entries_.empty(); }

    // Indices of the k entries most cosine-similar to the query; ties keep
    // index order.
    std::vector<std::size_t> top_k(const std::string& query, Embedder& embedder, std::size_t k) const;

private:
    std::vector<IndexEntry> entries_;
    std::size_t dimension_ = 0;
};

struct ContentSettings {
    int quiz_size = 5;
    int search_results = kDefaultSearchResults;
    std::size_t chunk_size = 400;
    std::size_t chunk_overlap = 50;
    std::size_t retrieval_top_k = 4;
    int refinement_budget = 2;
    int min_sections = 3;
    int max_sections = 8;
};

struct SessionContext {
    const LearnerProfile& profile;
    const SkillGap& gap;
    const LearningPath& path;
    const LearningSession& session;
};

struct Exploration {
    std::vector<OutlineSection> outline;
    std::vector<SearchResult> results;
    bool degraded = false;
};

struct SectionDraft {
    std::string text;
    std::vector<SourceRef> sources;
    std::string query;  // retrieval query used for this section
    bool unsourced = false;

    bool operator==(const SectionDraft&) const = default;
};

struct ContentRun {
    SessionContent content;
    std::vector<SimulatedFeedback> feedback;
    int simulator_calls = 0;
    bool degraded = false;
};

class ContentCreator {
public:
    ContentCreator(const Gateway& gateway, const LearnerSimulator& simulator,
                   std::shared_ptr<SearchProvider> search, std::shared_ptr<Embedder> embedder,
                   ContentSettings settings = {});

    const ContentSettings& settings() const noexcept { return settings_; }

    // Searches with the session title, then asks for an outline covering the
    // foundational, practical and problem-solving categories.
    Exploration explore_outline(const SessionContext& ctx) const;

    RetrievalIndex build_index(const std::vector<SearchResult>& results) const;

    // Retrieval query is "<session title> <section title>". With a non-empty
    // index the draft must cite at least one retrieved chunk.
    SectionDraft draft_section(const SessionContext& ctx, const std::vector<OutlineSection>& outline,
                               const OutlineSection& section, const RetrievalIndex& index,
                               const std::string& revision_request = {},
                               const std::string& previous_draft = {}) const;

    // One model call: introduction, transitions, conclusion and quiz. The
    // document is assembled in outline order.
    SessionContent integrate(const SessionContext& ctx, const std::vector<OutlineSection>& outline,
                             const std::map<std::string, SectionDraft>& drafts) const;

    // Re-drafts only the sections named by the feedback, then re-integrates.
    SessionContent integrate_and_refine(const SessionContext& ctx, const std::vector<OutlineSection>& outline,
                                        std::map<std::string, SectionDraft>& drafts,
                                        const SimulatedFeedback& feedback, const RetrievalIndex& index) const;

    // explore -> draft each section -> integrate -> (simulate -> refine) x budget.
    ContentRun create(const SessionContext& ctx) const;

private:
    const Gateway& gateway_;
    const LearnerSimulator& simulator_;
    std::shared_ptr<SearchProvider> search_;
    std::shared_ptr<Embedder> embedder_;
    ContentSettings settings_;
};

// "<session title> <section title>"
std::string section_query(const LearningSession& session, const OutlineSection& section);

}  // namespace mentor
