#pragma once

#include <stdexcept>
#include <string>

namespace fbembed {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Evaluation requested at a pole of the map.
struct PoleError : Error {
    using Error::Error;
};

/// A structural invariant of a domain description is violated.
struct StructuralError : Error {
    using Error::Error;
};

/// Grid or sampling resolution too coarse for the requested query.
struct PrecisionError : Error {
    using Error::Error;
};

/// A precondition of an operation does not hold.
struct PreconditionError : Error {
    using Error::Error;
};

/// A least-squares fit did not reach the requested residual within budget.
struct FitFailure : Error {
    double achieved_residual;
    FitFailure(const std::string& msg, double residual)
        : Error(msg + " (achieved residual " + std::to_string(residual) + ")"),
          achieved_residual(residual) {}
};

/// Domain geometry outside the numeric scope of the classifier.
struct ClassificationUnsupported : Error {
    using Error::Error;
};

/// Compact exhaustion produced an empty set.
struct ExhaustionError : Error {
    using Error::Error;
};

/// Curve pushing failed after exhausting retries; carries the best report text.
struct UnpushableError : Error {
    using Error::Error;
};

/// An induction step could not maintain its conditions.
struct StepFailure : Error {
    using Error::Error;
};

/// Configuration file is syntactically or semantically invalid.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace fbembed
