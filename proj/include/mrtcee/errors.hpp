#pragma once

#include <stdexcept>
#include <string>

namespace mrtcee {

// Bad input: malformed files, violated data invariants, invalid arguments.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Well-formed input that the numerics cannot handle (singular systems,
// non-convergent series, unreachable power).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mrtcee
