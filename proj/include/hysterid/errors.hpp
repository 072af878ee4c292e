#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hysterid {

/// Base class for every error raised by the library. The CLI maps the
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-domain argument to a pure evaluation routine.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A model state for which a shape function is undefined (eta <= 0, zeta_2 == 0).
class DegenerateState : public Error {
public:
    using Error::Error;
};

/// Bad model parameters (r_k outside (0,1), negative masses, ...).
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Malformed configuration document. `path` is the JSON pointer of the violation.
class ConfigError : public Error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// File-level problems: missing files, unparsable data files.
class IoError : public Error {
public:
    using Error::Error;
};

/// Parse error in a text data file, tagged with the 1-based line number.
class ParseError : public IoError {
public:
    ParseError(std::size_t line, const std::string& what)
        : IoError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Time integration or training produced non-finite numbers.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t index, const std::string& what)
        : Error(what + " (at index " + std::to_string(index) + ")"), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace hysterid
