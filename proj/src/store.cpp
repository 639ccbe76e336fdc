#include "mentor/store.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <sstream>

namespace mentor {

namespace fs = std::filesystem;

namespace {

void check_name(const std::string& what, const std::string& name) {
    const bool ok = !name.empty() && name.front() != '.' &&
                    std::all_of(name.begin(), name.end(), [](unsigned char c) {
                        return std::isalnum(c) || c == '-' || c == '_' || c == '.';
                    });
    if (!ok) throw ValidationError("invalid " + what + " name: '" + name + "'");
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

DocumentStore::DocumentStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "logs");
}

fs::path DocumentStore::doc_path(const std::string& collection, const std::string& id) const {
    check_name("collection", collection);
    check_name("document", id);
    return root_ / collection / (id + ".json");
}

fs::path DocumentStore::log_path(const std::string& log) const {
    check_name("log", log);
    return root_ / "logs" / (log + ".jsonl");
}

void DocumentStore::put(const std::string& collection, const std::string& id, const json& doc) {
    static std::atomic<unsigned long> counter{0};
    const auto target = doc_path(collection, id);
    fs::create_directories(target.parent_path());
    auto tmp = target;
    tmp += ".tmp" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << doc.dump(2) << '\n';
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error("cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

std::optional<json> DocumentStore::get(const std::string& collection, const std::string& id) const {
    const auto p = doc_path(collection, id);
    if (!fs::exists(p)) return std::nullopt;
    try {
        return json::parse(read_file(p));
    } catch (const json::parse_error& e) {
        throw Error("corrupt document " + p.string() + ": " + e.what());
    }
}

bool DocumentStore::exists(const std::string& collection, const std::string& id) const {
    return fs::exists(doc_path(collection, id));
}

std::vector<std::string> DocumentStore::list(const std::string& collection) const {
    check_name("collection", collection);
    std::vector<std::string> ids;
    const auto dir = root_ / collection;
    if (!fs::is_directory(dir)) return ids;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".json") ids.push_back(e.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

void DocumentStore::append(const std::string& log, const json& entry) {
    const auto p = log_path(log);
    std::lock_guard lock(log_mutex_);
    std::ofstream out(p, std::ios::binary | std::ios::app);
    out << entry.dump() << '\n';
    out.flush();
    if (!out) throw Error("cannot append to " + p.string());
}

std::vector<json> DocumentStore::read_log(const std::string& log) const {
    const auto p = log_path(log);
    std::vector<json> out;
    std::lock_guard lock(log_mutex_);
    std::ifstream in(p, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(json::parse(line));
    }
    return out;
}

}  // namespace mentor
