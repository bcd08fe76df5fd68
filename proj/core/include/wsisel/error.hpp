#pragma once

#include <stdexcept>
#include <string>

namespace wsisel {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file: bad row, dimension mismatch, duplicate id,
/// non-finite value. The message names the offending row and field.
struct IngestError : Error {
  using Error::Error;
};

/// Missing or out-of-range class label.
struct LabelError : Error {
  using Error::Error;
};

/// Unknown group or patch identifier.
struct LookupError : Error {
  using Error::Error;
};

/// Incompatible vector/matrix dimensions between inputs.
struct DimensionError : Error {
  using Error::Error;
};

/// Invalid parameter value (infeasible K, bad slice size, degenerate
/// configuration, insufficient data).
struct ConfigError : Error {
  using Error::Error;
};

/// Non-finite value encountered during computation, or divergence.
struct NumericError : Error {
  using Error::Error;
};

/// Train/test group overlap in an experiment run. Always fatal.
struct LeakageError : Error {
  using Error::Error;
};

}  // namespace wsisel
