#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "isac/error.hpp"

namespace isac::io {

template <class T>
  requires std::is_arithmetic_v<T>
void put_le(std::ostream& os, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(bytes, sizeof(T));
}

// Reads with byte-offset bookkeeping so format errors can say where.
class LeReader {
 public:
  explicit LeReader(std::istream& is) : is_(is) {}

  template <class T>
    requires std::is_arithmetic_v<T>
  T get(const char* what) {
    char bytes[sizeof(T)];
    read(bytes, sizeof(T), what);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
  }

  void read(char* dst, std::size_t n, const char* what) {
    is_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n) {
      throw FormatError(std::string("truncated ") + what + " at byte offset " +
                        std::to_string(offset_ + static_cast<std::uint64_t>(is_.gcount())));
    }
    offset_ += n;
  }

  std::uint64_t offset() const { return offset_; }

 private:
  std::istream& is_;
  std::uint64_t offset_ = 0;
};

}  // namespace isac::io
