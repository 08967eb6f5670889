#pragma once

#include <stdexcept>
#include <string>

namespace qbd {

/// Input that violates a documented precondition (bad parameters, malformed files).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to converge or left its admissible region.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the interval where a minimal nonnegative solution exists.
class OutsideIntervalError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An analysis precondition on the model (stability, recurrence) does not hold.
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qbd
