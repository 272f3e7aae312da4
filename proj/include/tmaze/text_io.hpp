#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tmaze {

inline constexpr const char* kCodeVersion = "tmaze 1.0.0";

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// Strict parsers: the whole token must be consumed. `context` is used in error messages.
double parse_double(std::string_view token, std::string_view context);
long long parse_int(std::string_view token, std::string_view context);
std::uint64_t parse_u64(std::string_view token, std::string_view context);
bool parse_bool(std::string_view token, std::string_view context);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split_ws(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename so readers never see partial output.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace tmaze
