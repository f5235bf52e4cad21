#pragma once

#include <stdexcept>
#include <string>

namespace kcontact {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed DSL or model text. Line and column are 1-based.
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line, int column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
          line_(line), column_(column), detail_(message) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    int line_;
    int column_;
    std::string detail_;
};

/// An object refers to symbols, indices or charts it does not own.
class ChartError : public Error {
public:
    using Error::Error;
};

/// Numeric evaluation left the domain of a function (log of non-positive, 1/0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A symbol required for numeric evaluation has no value.
class MissingBinding : public Error {
public:
    using Error::Error;
};

/// Invalid grid, boundary data or solver configuration.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace kcontact
