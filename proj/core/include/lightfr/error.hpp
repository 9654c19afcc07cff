#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lightfr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based; 0 means "whole input".
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A real-valued optimizer produced a non-finite parameter.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace lightfr
