#pragma once

#include <stdexcept>
#include <string>

namespace vc {

// Base of every error thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, empty corpora, mismatched rates, shape errors.
struct DataError : Error {
    using Error::Error;
};

// Numerical failures: degenerate signals, instability, non-finite likelihoods.
struct NumericalError : Error {
    using Error::Error;
};

// Bad usage: invalid configuration, unknown keys, out-of-range settings.
struct UsageError : Error {
    using Error::Error;
};

}  // namespace vc
