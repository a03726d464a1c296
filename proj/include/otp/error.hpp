#pragma once

#include <stdexcept>
#include <string>

namespace otp {

// Bad input: malformed instance, violated precondition, out-of-range index.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Observation that has zero mass under the model it is conditioned on.
class ImpossibleState : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ill-conditioned or non positive-definite matrices.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// State-space or scenario-tree guards.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace otp
