#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the CSV, grid and model readers.
namespace pathdepth::detail {

std::vector<std::string_view> split_whitespace(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace pathdepth::detail
