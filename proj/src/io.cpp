#include "mibo/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mibo::io {
namespace {

std::vector<char> encode(std::span<const double> values) {
  std::vector<char> bytes(values.size() * sizeof(double));
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) {
      bytes[i * 8 + static_cast<std::size_t>(b)] = static_cast<char>((bits >> (8 * b)) & 0xffU);
    }
  }
  return bytes;
}

std::filesystem::path temp_sibling(const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  return tmp;
}

void write_bytes_atomic(const std::filesystem::path& path, const char* data, std::size_t n) {
  const auto tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out.write(data, static_cast<std::streamsize>(n));
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_f64(const std::filesystem::path& path, std::span<const double> values) {
  const auto bytes = encode(values);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void write_f64_atomic(const std::filesystem::path& path, std::span<const double> values) {
  const auto bytes = encode(values);
  write_bytes_atomic(path, bytes.data(), bytes.size());
}

std::vector<double> read_f64(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0) {
    throw std::runtime_error("'" + path.string() + "' is not a whole number of float64 values");
  }
  std::vector<double> values(bytes.size() / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + static_cast<std::size_t>(b)]))
              << (8 * b);
    }
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  write_bytes_atomic(path, contents.data(), contents.size());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace mibo::io
