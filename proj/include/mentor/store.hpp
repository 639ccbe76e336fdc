#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mentor/gateway.hpp"

namespace mentor {

// Directory-backed document store.
//   <root>/<collection>/<id>.json   documents, replaced atomically (temp + rename)
//   <root>/logs/<name>.jsonl        append-only logs, one JSON value per line
// Collection, id and log names are restricted to [A-Za-z0-9._-] and may not
// start with a dot.
class DocumentStore {
public:
    explicit DocumentStore(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }

    void put(const std::string& collection, const std::string& id, const json& doc);
    std::optional<json> get(const std::string& collection, const std::string& id) const;
    bool exists(const std::string& collection, const std::string& id) const;
    std::vector<std::string> list(const std::string& collection) const;

    void append(const std::string& log, const json& entry);
    std::vector<json> read_log(const std::string& log) const;

private:
    std::filesystem::path doc_path(const std::string& collection, const std::string& id) const;
    std::filesystem::path log_path(const std::string& log) const;

    std::filesystem::path root_;
    mutable std::mutex log_mutex_;
};

}  // namespace mentor
