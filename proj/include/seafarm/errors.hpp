#pragma once

#include <stdexcept>
#include <string>

namespace seafarm {

/// Precondition violated by a caller-supplied argument.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Space-time query outside a field's bounding box.
class OutOfDomain : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Malformed field file or configuration document. `key()` names the offending entry.
class FormatError : public std::runtime_error {
public:
    FormatError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Non-finite values appeared during a backward solve.
class SolverDiverged : public std::runtime_error {
public:
    explicit SolverDiverged(double t)
        : std::runtime_error("solver diverged at t=" + std::to_string(t)), time_(t) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace seafarm
