#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace collide {

/// Raised when a caller passes arguments that violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Law parameters that do not describe a valid survival function.
class InvalidParams : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// A process specification that cannot produce any arrivals.
class InvalidSpec : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Quadrature or linear-algebra routine that failed to reach its tolerance.
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A simulated trial exceeded its draw cap without terminating. Usually means
/// the model cannot collide at all (e.g. colours with disjoint supports).
class RunawayTrial : public std::runtime_error {
public:
    RunawayTrial(const std::string& what, std::uint64_t trial)
        : std::runtime_error(what), trial_(trial) {}
    std::uint64_t trial() const noexcept { return trial_; }

private:
    std::uint64_t trial_;
};

}  // namespace collide
