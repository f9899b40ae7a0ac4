#pragma once

#include <stdexcept>
#include <string>

namespace revgender {

// Status codes shared by the C API and the CLI exit codes.
enum StatusCode : int {
    kOk = 0,
    kUsageError = 1,
    kDataError = 2,
    kNumericError = 3,
};

/// Bad flags, bad config keys, unknown stage names.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or malformed inputs, missing stage prerequisites.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failed factorizations, inconsistent model shapes, non-finite results.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace revgender
