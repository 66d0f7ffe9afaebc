#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include "ntm/error.hpp"

// Little-endian binary primitives for the model/checkpoint formats.

namespace ntm::io {

inline std::uint64_t to_le(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((x >> (8 * i)) & 0xff);
    return r;
  }
  return x;
}

inline void write_u64(std::ostream& os, std::uint64_t x) {
  const std::uint64_t le = to_le(x);
  os.write(reinterpret_cast<const char*>(&le), 8);
}

inline void write_f64(std::ostream& os, double x) {
  write_u64(os, std::bit_cast<std::uint64_t>(x));
}

inline void write_f64_block(std::ostream& os, std::span<const double> xs) {
  for (double x : xs) write_f64(os, x);
}

inline std::uint64_t read_u64(std::istream& is) {
  std::uint64_t le = 0;
  is.read(reinterpret_cast<char*>(&le), 8);
  if (!is) throw Error("binary read: unexpected end of stream");
  return to_le(le);
}

inline double read_f64(std::istream& is) {
  return std::bit_cast<double>(read_u64(is));
}

inline void read_f64_block(std::istream& is, std::span<double> xs) {
  for (double& x : xs) x = read_f64(is);
}

inline void write_tag(std::ostream& os, const char (&magic)[9]) {
  os.write(magic, 8);
}

inline void expect_tag(std::istream& is, const char (&magic)[9], const std::string& what) {
  char buf[8];
  is.read(buf, 8);
  if (!is || std::memcmp(buf, magic, 8) != 0) throw Error("bad magic in " + what);
}

}  // namespace ntm::io
