#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace laserguard::detail {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Writes to `<path>.tmp` then renames over `path`, so readers never see a
/// half-written file. Throws IoError with the path on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// printf-style "%.17g": shortest form that round-trips through strtod.
std::string format_double(double v);

std::vector<std::string> split(std::string_view line, char sep);

std::string trim(std::string_view s);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits by hash_hex().
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hash_hex(std::string_view bytes);

}  // namespace laserguard::detail
