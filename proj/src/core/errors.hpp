#pragma once

#include <stdexcept>
#include <string>

namespace addunet {

// Error taxonomy mirrors the CLI exit codes: usage=1, data=2, numeric=3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

} // namespace addunet
