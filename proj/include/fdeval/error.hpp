#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fdeval {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed TREC input. `line()` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input that violates a data invariant (sizes, finiteness, pool size).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Eigendecomposition failure or other numerical breakdown.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Missing or unreadable files.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fdeval
