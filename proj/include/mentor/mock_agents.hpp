#pragma once

// Offline stand-ins for hosted providers. Replies are rule-based and a pure
// function of the structured prompt input, so whole pipelines run
// deterministically without network access.

#include <atomic>
#include <memory>
#include <string>

#include "mentor/content.hpp"
#include "mentor/gateway.hpp"

namespace mentor {

// Answers every prompt template by task name. Unknown tasks get an empty
// object, which the gateway then rejects through its schema check.
class HeuristicBackend final : public CompletionBackend {
public:
    std::string complete(const ChatRequest& request) override;
    std::size_t call_count() const noexcept { return calls_.load(); }

private:
    std::atomic<std::size_t> calls_{0};
};

// Reply for one task input (the JSON embedded in the prompt).
json heuristic_reply(const json& input);

// Synthesizes k results per query with ~600-character snippets derived
// from the query text.
class SyntheticSearch final : public SearchProvider {
public:
    std::vector<SearchResult> search(const std::string& query, int k) override;
};

}  // namespace mentor
