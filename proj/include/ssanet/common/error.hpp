#pragma once

#include <stdexcept>
#include <string>

namespace ssanet {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (bad argument, shape or flag).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent external data: files, checkpoints, datasets.
class DataError : public Error {
public:
    using Error::Error;
};

/// A computation produced a non-finite value.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace ssanet
