#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mgarch {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A vector or matrix has the wrong length/shape for the requested operation.
struct DimensionMismatch : Error {
    using Error::Error;
};

/// A parameter set violates one of its invariants; the message names the
/// violated constraint.
struct ConstraintViolation : Error {
    using Error::Error;
};

/// Two decay rates coincide within tolerance, so no canonical ordering exists.
struct DuplicateEigenvalue : Error {
    using Error::Error;
};

/// An input or intermediate quantity is NaN or infinite.
struct NonFiniteError : Error {
    using Error::Error;
};

/// A log-variance left the representable range (explosive parameters).
struct OverflowError : Error {
    using Error::Error;
};

/// A residual column in a correlation window is identically zero.
struct DegenerateColumn : Error {
    using Error::Error;
};

/// The estimated Hessian-type matrix is numerically singular.
struct SingularInformation : Error {
    using Error::Error;
};

/// A covariance matrix passed where a positive definite one is required.
struct SingularMatrix : Error {
    using Error::Error;
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

/// CSV or JSON input could not be parsed; message carries the location.
struct ParseError : Error {
    using Error::Error;
};

struct EmptyPanel : Error {
    using Error::Error;
};

struct UnknownName : Error {
    using Error::Error;
};

/// Every optimizer start failed; a partial report may still be available.
struct NoConvergence : Error {
    using Error::Error;
};

}  // namespace mgarch
