#pragma once

#include <stdexcept>
#include <string>

namespace gsmtl {

/// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched shapes between model, data, or vector arguments.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid contents: bad labels, malformed CSV records, degenerate inputs.
class DataError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration: hyperparameters, group structures, run configs.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An iterative routine exhausted its budget before reaching tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A state the library promises never to reach (e.g. ascent in a descent method).
class InvariantError : public Error {
public:
    using Error::Error;
};

/// Filesystem trouble: unwritable paths, failed renames.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gsmtl
