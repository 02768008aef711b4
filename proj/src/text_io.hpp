#pragma once

// Internal CSV and file helpers shared by the serializers.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace exposome::detail {

std::vector<std::string_view> split(std::string_view line, char sep);

/// Splits a document into lines, tolerating a trailing newline and CRLF.
std::vector<std::string_view> lines(std::string_view text);

std::optional<double> parse_double(std::string_view cell);
std::optional<std::int64_t> parse_int(std::string_view cell);

/// Shortest round-trip representation; empty string for NaN.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace exposome::detail
