#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by every file format in the project.
namespace pbitsim::text {

/// Shortest decimal rendering that parses back to the identical double.
std::string format_double(double value);

/// Parses the whole of `field` as a decimal floating point number.
std::optional<double> parse_double(std::string_view field);

std::optional<std::int64_t> parse_int(std::string_view field);

std::string_view trim(std::string_view s);

/// Splits on runs of spaces/tabs; empty fields are dropped.
std::vector<std::string_view> split_whitespace(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

/// Splits into lines on LF; a trailing CR is stripped from each line.
/// A final empty segment after the last LF is not reported.
std::vector<std::string_view> lines(std::string_view text);

/// Throws EnvironmentError when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file then renames it over `path`, so a
/// failed write never leaves a partial file behind. Throws EnvironmentError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace pbitsim::text
