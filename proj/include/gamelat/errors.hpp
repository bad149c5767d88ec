#pragma once

#include <stdexcept>

namespace gamelat {

// Bad inputs: malformed configs, out-of-range parameters. CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Broken invariants detected while computing. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A declared model bound failed at evaluation time.
class BoundViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace gamelat
