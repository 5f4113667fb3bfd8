#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pbitsim {

// Error taxonomy. The CLI maps each family onto a stable exit code:
//   DataError        -> 1  (bad input data, model or numeric domain)
//   EnvironmentError -> 3  (filesystem, child process, simulator)
// Usage errors (exit code 2) are raised by the CLI layer only.

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public DataError {
public:
    using DataError::DataError;
};

/// Malformed text input. `line()` is 1-based, 0 when no line applies.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptyInputError : public DataError {
public:
    using DataError::DataError;
};

class MismatchError : public DataError {
public:
    using DataError::DataError;
};

class EnvironmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The external simulator ran but failed; carries what it printed.
class SimulatorError : public EnvironmentError {
public:
    SimulatorError(const std::string& what, std::string log_path, std::string output);
    const std::string& log_path() const noexcept { return log_path_; }
    const std::string& output() const noexcept { return output_; }

private:
    std::string log_path_;
    std::string output_;
};

class TimeoutError : public SimulatorError {
public:
    using SimulatorError::SimulatorError;
};

/// Simulator output contained no marker lines at all.
class EmptyResultError : public EnvironmentError {
public:
    using EnvironmentError::EnvironmentError;
};

}  // namespace pbitsim
