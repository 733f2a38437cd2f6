#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mibo::io {

// Raw little-endian float64 arrays.
void write_f64(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f64(const std::filesystem::path& path);

// Writes to a sibling temporary and renames over the target, so readers never
// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
void write_f64_atomic(const std::filesystem::path& path, std::span<const double> values);

std::string read_text(const std::filesystem::path& path);

// Shortest-safe decimal rendering with 17 significant digits.
std::string format17(double v);

}  // namespace mibo::io
