#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "glsda/errors.hpp"

namespace glsda {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts unsupported");

template <typename T>
void write_le(std::ostream& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T read_le(std::istream& in, const char* what) {
  char buf[sizeof(T)];
  in.read(buf, sizeof(T));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw DataError(std::string("truncated file while reading ") + what);
  }
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

inline void expect_magic(std::istream& in, const char magic[4],
                         const std::string& format_name) {
  char buf[4];
  in.read(buf, 4);
  if (in.gcount() != 4 || std::memcmp(buf, magic, 4) != 0) {
    throw DataError("bad magic: not a " + format_name + " file");
  }
}

}  // namespace glsda
