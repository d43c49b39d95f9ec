#pragma once

#include <stdexcept>
#include <string>

namespace linkfp {

// Bad user input: malformed config, invalid parameter, schema violation.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// File could not be parsed; message carries file/line context.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative solver failed to reach its tolerance within the iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failure; message carries the offending path.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// A broken internal invariant (e.g. non-monotone event queue). Always a bug.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace linkfp
