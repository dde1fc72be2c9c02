#pragma once

#include <stdexcept>
#include <string>

namespace cpband {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Closest-point query has no unique minimizer (e.g. the center of a sphere).
struct DegenerateQuery : Error {
    using Error::Error;
};

// Boundary frame (tangent/co-normal) requested away from the surface boundary.
struct NotOnBoundary : Error {
    using Error::Error;
};

// Parameter pair outside the surface's parameter domain.
struct OutOfDomain : Error {
    using Error::Error;
};

// An interpolation or difference stencil reaches a lattice point that is not
// in the band. Indicates a band-construction bug, not a user error.
struct StencilEscape : Error {
    using Error::Error;
};

struct SingularSystem : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    using Error::Error;
};

// Eigenvalue problem requested on a closed surface (no boundary, B = 0).
struct NoBoundary : Error {
    using Error::Error;
};

struct FactorizationFailure : Error {
    using Error::Error;
};

struct SolverFailure : Error {
    using Error::Error;
};

// A state vector picked up a NaN or Inf during time integration.
struct NonFinite : Error {
    using Error::Error;
};

// Bad key, value, or combination in a run configuration.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace cpband
