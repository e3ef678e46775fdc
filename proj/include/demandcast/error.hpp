#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace demandcast {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data: negative quantities, duplicate dates, window sign violations.
/// `line()` is the 1-based source line when the error came from a file, else 0.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Structurally malformed input: missing header, unparseable fields.
class FormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Misconfiguration that makes a run impossible (e.g. zero CV splits).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class InsufficientHistory : public Error {
public:
    using Error::Error;
};

/// Multiplicative fit did not reach the relative objective tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_objective)
        : Error(what), last_objective_(last_objective) {}
    double last_objective() const noexcept { return last_objective_; }

private:
    double last_objective_;
};

class CheckpointError : public Error {
public:
    using Error::Error;
};

}  // namespace demandcast
