#pragma once

#include <stdexcept>
#include <string>

namespace ssyield {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dispersion coefficient is zero or negative where positivity is required.
struct NondegeneracyViolation : Error {
    using Error::Error;
};

/// Numeric Feller classification contradicts the declared boundary behavior.
struct ClassificationMismatch : Error {
    using Error::Error;
};

/// An improper-integral convergence decision could not be made within budget.
struct InconclusiveIntegral : Error {
    using Error::Error;
};

/// Integrand returned NaN or infinity.
struct NonFiniteIntegrand : Error {
    NonFiniteIntegrand(const std::string& what, double where)
        : Error(what), abscissa(where) {}
    double abscissa;
};

/// Partial sums of an improper integral grow without stabilizing.
struct DivergentTail : Error {
    DivergentTail(const std::string& what, double partial)
        : Error(what), partial_sum(partial) {}
    double partial_sum;
};

/// A (y,z) argument lies outside the ordering region y <= z.
struct OutOfRegion : Error {
    using Error::Error;
};

/// The model violates the cost-integrability requirement (inner tail diverges).
struct IntegrabilityFailure : Error {
    using Error::Error;
};

/// Finite-difference stencil does not fit inside the state interval.
struct StencilOutOfDomain : Error {
    using Error::Error;
};

/// A condition verdict depending on the optimum was requested without one.
struct MissingOptimum : Error {
    using Error::Error;
};

/// A preset or model parameter violates its invariant.
struct InvalidParameter : Error {
    using Error::Error;
};

/// Configuration document is malformed; message names the offending key.
struct ConfigError : Error {
    using Error::Error;
};

/// Every multistart refinement failed to produce a finite value.
struct AllStartsFailed : Error {
    using Error::Error;
};

/// A simulated path left the state interval and retries were exhausted.
struct StateEscapedDomain : Error {
    using Error::Error;
};

}  // namespace ssyield
