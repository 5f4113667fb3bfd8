#include "pbitsim/errors.hpp"

#include <utility>

namespace pbitsim {

ParseError::ParseError(const std::string& what, std::size_t line)
    : DataError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

SimulatorError::SimulatorError(const std::string& what, std::string log_path, std::string output)
    : EnvironmentError(what), log_path_(std::move(log_path)), output_(std::move(output)) {}

}  // namespace pbitsim
