#pragma once

#include <stdexcept>
#include <string>

namespace mentor {

// Base for every error raised by the library. The HTTP layer maps the
// concrete subclasses onto status codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input violates a type invariant or an operation precondition (4xx).
class ValidationError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Operation is illegal in the current lifecycle phase, or would repeat a
// non-idempotent action (409).
class ConflictError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class GatewayError : public Error {
public:
    enum class Kind { BackendUnreachable, SchemaViolation, Configuration };

    GatewayError(Kind kind, std::string message, std::string raw_last = {})
        : Error(std::move(message)), kind_(kind), raw_last_(std::move(raw_last)) {}

    Kind kind() const noexcept { return kind_; }
    // Last raw backend text seen before giving up, for diagnostics.
    const std::string& raw_last() const noexcept { return raw_last_; }

private:
    Kind kind_;
    std::string raw_last_;
};

}  // namespace mentor
