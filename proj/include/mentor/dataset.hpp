#pragma once

// Goal-to-skill fine-tuning dataset construction from a job-posting corpus:
// word-count filter, model extraction of (summary, skills), CoT reasoning
// tracks, stratified train/valid split, and line-delimited record emission.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mentor/gateway.hpp"
#include "mentor/model.hpp"
#include "mentor/skill_identifier.hpp"

namespace mentor::dataset {

struct JobPosting {
    std::string id;
    std::string title;
    std::string body;
    std::string occupation_type;

    bool operator==(const JobPosting&) const = default;
};

struct GoalSkillSample {
    std::string job_summary;
    ReasoningTrack reasoning_tracks;
    std::vector<Skill> required_skills;
    std::string occupation_type;  // carried for stratification

    void validate() const;
    bool operator==(const GoalSkillSample&) const = default;
};

// Whitespace-delimited word count.
std::size_t word_count(std::string_view text);

// Postings with at least `min_words` words, in input order.
std::vector<JobPosting> filter_postings(std::span<const JobPosting> corpus, std::size_t min_words);

// Reads a corpus file. ".jsonl"/".ndjson" files hold one object per line;
// anything else is parsed as CSV with a header row. Recognized columns:
// id, title, body|description, occupation|occupation_type.
std::vector<JobPosting> load_corpus(const std::filesystem::path& path);

struct Extraction {
    std::string summary;
    std::vector<Skill> skills;
};

struct CotResult {
    ReasoningTrack track;
    int attempts = 1;
};

class DatasetBuilder {
public:
    explicit DatasetBuilder(const Gateway& gateway) : gateway_(gateway) {}

    // Model-extracted job summary and skill list; skills deduplicated after
    // normalization.
    Extraction extract_summary_and_skills(const JobPosting& posting) const;

    // Reasoning track covering every skill; regenerated through the gateway's
    // repair loop when coverage fails.
    CotResult generate_cot_tracks(const std::string& summary, std::span<const Skill> skills) const;

    GoalSkillSample build_sample(const JobPosting& posting) const;

private:
    const Gateway& gateway_;
};

template <typename T>
struct Split {
    std::vector<T> train;
    std::vector<T> valid;
};

// Indices of a stratified, seeded split. Each stratum receives its
// largest-remainder share of n_train (then n_valid over what is left);
// members are drawn by a seeded Fisher-Yates shuffle. Throws ValidationError
// when n_train + n_valid exceeds the population.
Split<std::size_t> stratified_split_indices(std::span<const std::string> strata, std::size_t n_train,
                                            std::size_t n_valid, std::uint64_t seed);

template <typename T, typename KeyFn>
Split<T> split_by(std::span<const T> items, std::size_t n_train, std::size_t n_valid, std::uint64_t seed,
                  KeyFn key) {
    std::vector<std::string> strata;
    strata.reserve(items.size());
    for (const auto& it : items) strata.push_back(key(it));
    auto idx = stratified_split_indices(strata, n_train, n_valid, seed);
    Split<T> out;
    for (auto i : idx.train) out.train.push_back(items[i]);
    for (auto i : idx.valid) out.valid.push_back(items[i]);
    return out;
}

Split<GoalSkillSample> split_dataset(std::span<const GoalSkillSample> samples, std::size_t n_train,
                                     std::size_t n_valid, std::uint64_t seed);

// One JSON line per sample: {"input", "intermediate", "output", "occupation_type"}.
std::string to_finetune_line(const GoalSkillSample& sample);
GoalSkillSample from_finetune_line(std::string_view line);

// Writes the records (creating parent directories); returns the count.
std::size_t emit_finetune_records(std::span<const GoalSkillSample> samples, const std::filesystem::path& path);
std::vector<GoalSkillSample> read_finetune_records(const std::filesystem::path& path);

struct BuildOptions {
    std::size_t min_words = 500;
    std::size_t n_train = 10000;
    std::size_t n_valid = 200;
    std::uint64_t seed = 0;
};

struct BuildReport {
    std::size_t corpus_size = 0;
    std::size_t retained = 0;
    std::size_t train_records = 0;
    std::size_t valid_records = 0;
};

// filter -> stratified split of postings -> extraction + CoT for the chosen
// postings -> train.jsonl / valid.jsonl under `out_dir`. Splitting before
// extraction means only n_train + n_valid postings cost model calls.
BuildReport build_dataset(const DatasetBuilder& builder, std::span<const JobPosting> corpus,
                          const BuildOptions& options, const std::filesystem::path& out_dir);

}  // namespace mentor::dataset
