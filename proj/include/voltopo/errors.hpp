#pragma once

#include <stdexcept>
#include <string>

namespace voltopo {

// Contract violations on arguments or input data (bad flags, dims mismatch,
// values outside [0, 1] where probabilities are required).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A metric that is not defined for the given input (e.g. empty mask).
class UndefinedMetric : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Statistically degenerate input, e.g. zero variance of paired differences.
class DegenerateInput : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class VolumeIoError : public std::runtime_error {
public:
    enum class Kind { unreadable, malformed_header, size_mismatch, unwritable };

    VolumeIoError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace voltopo
