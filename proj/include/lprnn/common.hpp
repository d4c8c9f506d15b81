#pragma once

#include <stdexcept>
#include <string>

namespace lprnn {

// Raised when operand shapes do not line up (matmul, hadamard, ...).
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when a value is outside its admissible range (alpha outside [0,1], ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when an input is structurally valid but unusable (zero-spectrum matrix, ...).
struct DegenerateInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when a documented precondition on the caller is violated.
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Configuration file problems (schema violations, unknown keys, bad types).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / serialization failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite loss or state during training / simulation.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lprnn
