#pragma once

#include <stdexcept>
#include <string>

namespace bbsim {

// Raised when a parameter record or experiment description is invalid.
// field() names the offending entry.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// An analysis input does not satisfy the operation's precondition.
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Too few extrema in a series to measure cycle lengths.
class InsufficientCyclesError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bbsim
