#pragma once

#include <stdexcept>
#include <string>

namespace mfrl {

// Base for every domain error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two grids, parameter blocks, or policies with incompatible shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

// A learner produced non-finite or runaway parameters.
class DivergenceError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(int line, const std::string& what)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    // 0 when the error is not tied to a specific line.
    int line() const { return line_; }

private:
    int line_;
};

}  // namespace mfrl
