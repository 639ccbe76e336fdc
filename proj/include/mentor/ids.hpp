#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>

namespace mentor {

// Source of opaque identifiers. Thread-safe.
class IdSource {
public:
    virtual ~IdSource() = default;
    virtual std::string next(std::string_view prefix) = 0;
};

// 64 random bits rendered as hex, e.g. "ses-9f1c03a2b4d5e6f7".
class RandomIds final : public IdSource {
public:
    RandomIds();
    explicit RandomIds(std::uint64_t seed) : rng_(seed) {}
    std::string next(std::string_view prefix) override;

private:
    std::mutex mutex_;
    std::mt19937_64 rng_;
};

// "<prefix>-1", "<prefix>-2", ... with one counter per prefix. For tests and
// replayable runs.
class SequentialIds final : public IdSource {
public:
    std::string next(std::string_view prefix) override;

private:
    std::mutex mutex_;
    std::map<std::string, std::uint64_t, std::less<>> counters_;
};

}  // namespace mentor
