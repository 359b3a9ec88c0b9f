#pragma once

#include <stdexcept>
#include <string>

namespace refract {

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Hypothesis (H) fails: bounded-variation driver with delta >= c.
struct HypothesisHViolation : ModelError {
    double c, delta;
    HypothesisHViolation(double c_, double delta_)
        : ModelError("hypothesis (H) violated: delta=" + std::to_string(delta_) +
                     " must lie in (0, c) with c=" + std::to_string(c_)),
          c(c_), delta(delta_) {}
};

struct NonPositiveDelta : ModelError {
    explicit NonPositiveDelta(double delta)
        : ModelError("refraction rate delta must be positive, got " + std::to_string(delta)) {}
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Laplace inversion self-check exceeded tolerance.
struct InversionError : NumericalError {
    double error_estimate;
    InversionError(const std::string& what, double err)
        : NumericalError(what), error_estimate(err) {}
};

struct QuadratureError : NumericalError {
    using NumericalError::NumericalError;
};

struct RootSeparationFailure : NumericalError {
    using NumericalError::NumericalError;
};

struct SecondDerivativeUnavailable : NumericalError {
    using NumericalError::NumericalError;
};

// Ruin-probability formula requires 0 < delta < E(X_1); in the complementary
// regime ruin is certain and the caller should consult `ruin_is_certain`.
struct DriftNotDominating : ModelError {
    bool ruin_is_certain = true;
    DriftNotDominating(double mean, double delta)
        : ModelError("ruin probability formula needs delta < E(X_1): E(X_1)=" +
                     std::to_string(mean) + ", delta=" + std::to_string(delta)) {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace refract
