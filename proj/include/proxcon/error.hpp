#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace proxcon {

enum class ErrorCode {
    TooFewReplicas,
    LivenessRisk,
    BadFraction,
    BadConfig,
    NonFiniteInput,
    DegenerateQuorum,
    EmptySearchDomain,
    InsufficientMessages,
    DuplicateReplica,
    NoConvergence,
    ZeroMeanEpsilonBounds,
    ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

// All recoverable failures in the library are reported with this type; the
// code identifies which contract was violated.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace proxcon
