#pragma once

#include <stdexcept>
#include <string>

namespace polyjoin {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A point handed to a system (or observable) it does not belong to.
struct PointMismatch : Error {
  using Error::Error;
};

struct IncompatibleObservable : Error {
  using Error::Error;
};

/// All lookahead bits of a rotated bit-stream point were 1; retry with a
/// larger lookahead.
struct CarryUnresolved : Error {
  using Error::Error;
};

struct UnsupportedAction : Error {
  using Error::Error;
};

struct BudgetExceeded : Error {
  using Error::Error;
};

/// A quantity that must be nonnegative came out below the clamp threshold.
struct EstimatorFailure : Error {
  using Error::Error;
};

struct NotErgodic : Error {
  using Error::Error;
};

}  // namespace polyjoin
