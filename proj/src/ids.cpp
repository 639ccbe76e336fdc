#include "mentor/ids.hpp"

#include <cstdio>
#include <map>

namespace mentor {

RandomIds::RandomIds() : rng_(std::random_device{}()) {}

std::string RandomIds::next(std::string_view prefix) {
    std::uint64_t v;
    {
        std::lock_guard lock(mutex_);
        v = rng_();
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(prefix) + "-" + buf;
}

std::string SequentialIds::next(std::string_view prefix) {
    std::lock_guard lock(mutex_);
    auto it = counters_.find(prefix);
    if (it == counters_.end()) it = counters_.emplace(std::string(prefix), 0).first;
    return std::string(prefix) + "-" + std::to_string(++it->second);
}

}  // namespace mentor
