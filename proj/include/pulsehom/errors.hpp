#pragma once

#include <stdexcept>
#include <string>

namespace pulsehom {

// Rejected inputs: precondition violations, malformed configs and files.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Config-file errors carry the offending line (0 when not line-specific).
class ConfigError : public InputError {
public:
    ConfigError(const std::string& what, int line = 0)
        : InputError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

// A numerical guard tripped, e.g. an unconverged quadrature or an empty
// click stream.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pulsehom
