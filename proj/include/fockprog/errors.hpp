#pragma once

#include <stdexcept>
#include <string>

namespace fockprog {

/// Bad input: malformed files, out-of-range indices, non-normalized targets.
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The numerics failed: step underflow, positivity loss, unmet fidelity gate.
/// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fockprog
