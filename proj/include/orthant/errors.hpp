#pragma once

#include <stdexcept>
#include <string>

namespace orthant {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AxisOutOfRange : Error {
    using Error::Error;
};

// Carries the smallest clique of pairwise-compatible axes that is missing
// from the complex.
struct FlagViolation : Error {
    std::uint64_t offending_mask;
    FlagViolation(const std::string& msg, std::uint64_t mask)
        : Error(msg), offending_mask(mask) {}
};

struct InvalidPoint : Error {
    using Error::Error;
};

struct MalformedSupport : Error {
    using Error::Error;
};

struct NoSupportFound : Error {
    using Error::Error;
};

struct ParameterOutOfRange : Error {
    using Error::Error;
};

struct BudgetExceeded : Error {
    using Error::Error;
};

struct ZeroVector : Error {
    using Error::Error;
};

struct OnSingularSet : Error {
    using Error::Error;
};

struct StabilizationFailure : Error {
    using Error::Error;
};

struct SingularMatrix : Error {
    using Error::Error;
};

struct PreconditionFailed : Error {
    using Error::Error;
};

struct HypothesisNotMet : Error {
    using Error::Error;
};

}  // namespace orthant
