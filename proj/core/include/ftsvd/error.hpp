#pragma once

#include <stdexcept>
#include <string>

namespace ftsvd {

/// Bad argument: wrong length, out-of-domain value, invalid mode.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Factorization or eigen-solver failure.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A normalization step hit a (near) zero norm: the component vanished.
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Well-formed input whose shape does not agree with the rest of the data.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Values that violate a data precondition (e.g. negative counts).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ftsvd
