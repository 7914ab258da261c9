#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lmsim {

// Shortest round-trip decimal form, identical everywhere a number is
// serialized (CSV, JSON). Integral values print without a trailing ".0".
std::string format_double(double value);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, char sep);

// Strict numeric parsing: the whole token must be consumed.
std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);
std::optional<std::uint64_t> parse_uint(std::string_view token);

std::uint64_t fnv1a64(std::string_view s);

// Hex-encoded SHA-256 of a file's contents.
std::string sha256_file_hex(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace lmsim
