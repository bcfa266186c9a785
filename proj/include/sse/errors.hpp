#pragma once

#include <stdexcept>
#include <string>

namespace sse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix/vector sizes that do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An operation was called outside its documented domain
/// (unobservable pair, sparse observability condition violated, bad horizon, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Iterative solver hit its budget or produced a singular system.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// State magnitude left the representable range during simulation.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Malformed experiment configuration. `path()` names the offending field
/// (e.g. "system.A[1]") or a "line:column" location for parse errors.
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& message)
        : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace sse
