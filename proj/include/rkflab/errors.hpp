#ifndef RKFLAB_ERRORS_HPP_
#define RKFLAB_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rkflab {

/// Argument outside the mathematical domain of an operation (log/sqrt/lgamma of
/// non-positive values, non-positive distribution parameters, ...).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Innovation covariance not invertible even after jitter escalation.
struct SingularInnovation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The requested noise family has no finite covariance.
struct InfiniteVariance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The quadrature normalizer underflowed even in log domain.
struct QuadratureFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A training loss evaluated to NaN or infinity; the run must abort.
struct NonFiniteLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A scheduled-sampling flag selected a reference belief that was not supplied.
struct MissingReference : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every training restart diverged.
struct AllRunsFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inconsistent matrix/vector dimensions at an API boundary.
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed configuration file or incompatible option combination.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rkflab

#endif  // RKFLAB_ERRORS_HPP_
