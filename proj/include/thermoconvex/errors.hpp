#pragma once

#include <stdexcept>
#include <string>

namespace thermoconvex {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A point failed a field's domain predicate or left its box.
struct DomainViolation : Error {
    using Error::Error;
};

/// An expression produced NaN or Inf (e.g. log of a nonpositive argument).
struct NonFinite : Error {
    using Error::Error;
};

/// Newton iteration did not reach the residual tolerance.
struct NewtonDivergence : Error {
    using Error::Error;
};

/// A Hessian was numerically singular where an inverse was required.
struct SingularHessian : Error {
    using Error::Error;
};

/// A derivative required to be one-signed vanished or changed sign.
struct MonotonicityViolation : Error {
    using Error::Error;
};

/// The pivot variable of a reciprocal involution can vanish inside the box.
struct PivotSignViolation : Error {
    using Error::Error;
};

/// No sign change found for a scalar root bracket.
struct BracketFailure : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

/// Matrix asymmetry exceeded the admissible band before symmetrization.
struct AsymmetryTooLarge : Error {
    using Error::Error;
};

/// Rejection sampling exceeded the 99% rejection-rate budget.
struct SamplerExhausted : Error {
    using Error::Error;
};

/// Invalid configuration or command-line usage.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace thermoconvex
