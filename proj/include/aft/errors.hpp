#pragma once

#include <stdexcept>
#include <string>

namespace aft {

// Base class for all toolkit errors; the CLI maps these to exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad scenario/config/KB/catalog input. Message names the offending key or line.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Malformed inventory, schedule, or snapshot text. Message names the line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

} // namespace aft
