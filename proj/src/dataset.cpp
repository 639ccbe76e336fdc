#include "mentor/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "mentor/prompts.hpp"

namespace mentor::dataset {

namespace fs = std::filesystem;

void GoalSkillSample::validate() const {
    if (required_skills.empty()) throw ValidationError("sample has no required skills");
    require_unique_skill_names(required_skills);
    auto missing = uncovered_skills(reasoning_tracks, required_skills);
    if (!missing.empty()) throw ValidationError("reasoning track does not cover '" + missing.front() + "'");
}

std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::vector<JobPosting> filter_postings(std::span<const JobPosting> corpus, std::size_t min_words) {
    std::vector<JobPosting> out;
    for (const auto& p : corpus) {
        if (word_count(p.body) >= min_words) out.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Corpus loading

namespace {

// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
// newlines.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && in.peek() == '\n') in.get();
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field.push_back(c);
        }
    }
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string first_of(const json& j, std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
        if (j.contains(k) && j[k].is_string()) return j[k].get<std::string>();
    }
    return {};
}

}  // namespace

std::vector<JobPosting> load_corpus(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open corpus: " + path.string());
    std::vector<JobPosting> out;

    auto ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".ndjson") {
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object()) {
                throw ValidationError("corpus line " + std::to_string(n) + " is not a JSON object");
            }
            JobPosting p;
            p.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                                    : std::to_string(n);
            p.title = first_of(j, {"title"});
            p.body = first_of(j, {"body", "description", "text"});
            p.occupation_type = first_of(j, {"occupation_type", "occupation"});
            out.push_back(std::move(p));
        }
        return out;
    }

    auto rows = parse_csv(in);
    if (rows.empty()) return out;
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < rows[0].size(); ++i) col[normalize_skill_name(rows[0][i])] = i;
    auto find_col = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
        for (const char* n : names) {
            if (auto it = col.find(n); it != col.end()) return it->second;
        }
        return std::nullopt;
    };
    auto body_col = find_col({"body", "description", "text"});
    if (!body_col) throw ValidationError("corpus CSV lacks a body/description column");
    auto id_col = find_col({"id", "job_id"});
    auto title_col = find_col({"title"});
    auto occ_col = find_col({"occupation", "occupation_type"});
    auto cell = [](const std::vector<std::string>& r, std::optional<std::size_t> c) {
        return (c && *c < r.size()) ? r[*c] : std::string{};
    };
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && row[0].empty()) continue;
        JobPosting p;
        p.id = id_col ? cell(row, id_col) : std::to_string(r);
        p.title = cell(row, title_col);
        p.body = cell(row, body_col);
        p.occupation_type = cell(row, occ_col);
        out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model-backed steps

Extraction DatasetBuilder::extract_summary_and_skills(const JobPosting& posting) const {
    json schema = {{"type", "object"},
                   {"required", {"summary", "skills"}},
                   {"properties",
                    {{"summary", {{"type", "string"}, {"minLength", 1}}},
                     {"skills", {{"type", "array"}, {"minItems", 1}, {"items", skill_schema()}}}}}};
    auto resp = gateway_.complete(make_model_request(roles::kDatasetBuilder, "dataset.extract",
                                                     {{"title", posting.title}, {"body", posting.body}}, schema));
    Extraction out;
    out.summary = resp.parsed.at("summary").get<std::string>();
    std::vector<Skill> skills;
    for (const auto& s : resp.parsed.at("skills")) {
        Skill k = s.get<Skill>();
        k.name = normalize_skill_name(k.name);
        skills.push_back(std::move(k));
    }
    out.skills = dedupe_skills(skills);
    return out;
}

CotResult DatasetBuilder::generate_cot_tracks(const std::string& summary, std::span<const Skill> skills) const {
    if (skills.empty()) throw ValidationError("cannot build a reasoning track without skills");
    std::vector<Skill> owned(skills.begin(), skills.end());
    OutputCheck check = [owned](const json& out) {
        std::vector<std::string> problems;
        for (const auto& name : uncovered_skills(out.get<ReasoningTrack>(), owned)) {
            problems.push_back("skill '" + name + "' is not mapped to any duty");
        }
        return problems;
    };
    auto resp = gateway_.complete(make_model_request(roles::kDatasetBuilder, "dataset.cot_tracks",
                                                     {{"summary", summary}, {"skills", owned}},
                                                     reasoning_track_schema(), check));
    return CotResult{resp.parsed.get<ReasoningTrack>(), resp.attempts};
}

GoalSkillSample DatasetBuilder::build_sample(const JobPosting& posting) const {
    auto ex = extract_summary_and_skills(posting);
    auto cot = generate_cot_tracks(ex.summary, ex.skills);
    GoalSkillSample s{ex.summary, std::move(cot.track), std::move(ex.skills), posting.occupation_type};
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Stratified split

namespace {

// Largest-remainder apportionment of `total` seats over `weights`, capped by
// `caps`. Ties on the remainder go to the lower index.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& weights, const std::vector<std::size_t>& caps,
                                   std::size_t total) {
    const std::size_t n = weights.size();
    const std::size_t weight_sum = std::accumulate(weights.begin(), weights.end(), std::size_t{0});
    std::vector<std::size_t> seats(n, 0);
    if (weight_sum == 0 || total == 0) return seats;

    // Exact quotas as fractions total*w/weight_sum; compare remainders in
    // integer arithmetic.
    std::vector<std::size_t> rem(n, 0);
    std::size_t given = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto num = static_cast<unsigned __int128>(total) * weights[i];
        seats[i] = std::min<std::size_t>(static_cast<std::size_t>(num / weight_sum), caps[i]);
        rem[i] = static_cast<std::size_t>(num % weight_sum);
        given += seats[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rem[a] > rem[b]; });
    // First pass honors remainders; later passes fill any seats lost to caps.
    while (given < total) {
        bool progressed = false;
        for (auto i : order) {
            if (given == total) break;
            if (seats[i] < caps[i]) {
                ++seats[i];
                ++given;
                progressed = true;
            }
        }
        if (!progressed) break;
    }
    return seats;
}

// Fisher-Yates with an explicit bounded draw so the permutation depends only
// on the seed, not on the standard library's distribution implementations.
void seeded_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::uint64_t bound = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r;
        do {
            r = rng();
        } while (r >= limit);
        std::swap(v[i - 1], v[static_cast<std::size_t>(r % bound)]);
    }
}

}  // namespace

Split<std::size_t> stratified_split_indices(std::span<const std::string> strata, std::size_t n_train,
                                            std::size_t n_valid, std::uint64_t seed) {
    if (n_train + n_valid > strata.size()) {
        throw ValidationError("insufficient samples: need " + std::to_string(n_train + n_valid) + ", have " +
                              std::to_string(strata.size()));
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);

    std::vector<std::size_t> sizes;
    for (const auto& [_, members] : groups) sizes.push_back(members.size());
    auto train_seats = apportion(sizes, sizes, n_train);
    std::vector<std::size_t> left(sizes.size());
    for (std::size_t g = 0; g < sizes.size(); ++g) left[g] = sizes[g] - train_seats[g];
    auto valid_seats = apportion(sizes, left, n_valid);

    std::mt19937_64 rng(seed);
    Split<std::size_t> out;
    std::size_t g = 0;
    for (auto& [_, members] : groups) {
        seeded_shuffle(members, rng);
        out.train.insert(out.train.end(), members.begin(), members.begin() + train_seats[g]);
        out.valid.insert(out.valid.end(), members.begin() + train_seats[g],
                         members.begin() + train_seats[g] + valid_seats[g]);
        ++g;
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.valid.begin(), out.valid.end());
    return out;
}

Split<GoalSkillSample> split_dataset(std::span<const GoalSkillSample> samples, std::size_t n_train,
                                     std::size_t n_valid, std::uint64_t seed) {
    return split_by(samples, n_train, n_valid, seed, [](const GoalSkillSample& s) { return s.occupation_type; });
}

// ---------------------------------------------------------------------------
// Records

std::string to_finetune_line(const GoalSkillSample& sample) {
    nlohmann::ordered_json j;
    j["input"] = sample.job_summary;
    nlohmann::ordered_json track;
    track["key_tasks"] = sample.reasoning_tracks.key_tasks;
    track["skills_per_task"] = sample.reasoning_tracks.skills_per_task;
    track["proficiency_rationale"] = sample.reasoning_tracks.proficiency_rationale;
    j["intermediate"] = std::move(track);
    auto skills = nlohmann::ordered_json::array();
    for (const auto& s : sample.required_skills) {
        nlohmann::ordered_json k;
        k["name"] = s.name;
        k["category"] = s.category;
        k["target_proficiency"] = json(s.target_proficiency);
        k["rationale"] = s.rationale;
        skills.push_back(std::move(k));
    }
    j["output"] = std::move(skills);
    j["occupation_type"] = sample.occupation_type;
    return j.dump();
}

GoalSkillSample from_finetune_line(std::string_view line) {
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ValidationError("malformed fine-tune record");
    GoalSkillSample s;
    s.job_summary = j.at("input").get<std::string>();
    s.reasoning_tracks = j.at("intermediate").get<ReasoningTrack>();
    s.required_skills = j.at("output").get<std::vector<Skill>>();
    s.occupation_type = j.value("occupation_type", "");
    return s;
}

std::size_t emit_finetune_records(std::span<const GoalSkillSample> samples, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& s : samples) out << to_finetune_line(s) << '\n';
    out.flush();
    if (!out) throw Error("write failed: " + path.string());
    return samples.size();
}

std::vector<GoalSkillSample> read_finetune_records(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::vector<GoalSkillSample> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(from_finetune_line(line));
    }
    return out;
}

BuildReport build_dataset(const DatasetBuilder& builder, std::span<const JobPosting> corpus,
                          const BuildOptions& options, const fs::path& out_dir) {
    if (options.min_words < 1) throw ValidationError("min_words must be >= 1");
    BuildReport report;
    report.corpus_size = corpus.size();
    auto kept = filter_postings(corpus, options.min_words);
    report.retained = kept.size();

    auto split = split_by(std::span<const JobPosting>(kept), options.n_train, options.n_valid, options.seed,
                          [](const JobPosting& p) { return p.occupation_type; });
    std::vector<GoalSkillSample> train, valid;
    for (const auto& p : split.train) train.push_back(builder.build_sample(p));
    for (const auto& p : split.valid) valid.push_back(builder.build_sample(p));

    report.train_records = emit_finetune_records(train, out_dir / "train.jsonl");
    report.valid_records = emit_finetune_records(valid, out_dir / "valid.jsonl");
    return report;
}

}  // namespace mentor::dataset
