#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fmx {

// Invalid units, frequency plans, filter settings or experiment configs.
// key() names the offending field when one is known.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
    ConfigError(std::string key, const std::string& what)
        : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// Argument outside the mathematical domain of an operation (coincident
// points, non-positive power, zero-energy reference, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Caller violated a documented precondition on the shape of the input.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace fmx
