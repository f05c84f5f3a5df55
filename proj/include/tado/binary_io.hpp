#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "tado/errors.hpp"

namespace tado::binary {

template <class U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

/// Little-endian reader that tracks the absolute byte offset and reports
/// truncation as a FormatError at that offset.
class Reader {
 public:
  Reader(std::istream& in, std::uint64_t start) : in_(in), offset_(start) {}

  template <class U>
  U get(const char* what, std::int64_t record = -1) {
    std::array<unsigned char, sizeof(U)> bytes;
    in_.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (in_.gcount() != static_cast<std::streamsize>(bytes.size())) {
      throw FormatError(std::string("truncated while reading ") + what, offset_ + in_.gcount(), record);
    }
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
    offset_ += sizeof(U);
    return value;
  }

  std::string get_bytes(std::size_t count, const char* what) {
    std::string s(count, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(count));
    if (in_.gcount() != static_cast<std::streamsize>(count)) {
      throw FormatError(std::string("truncated while reading ") + what, offset_ + in_.gcount());
    }
    offset_ += count;
    return s;
  }

  std::uint64_t offset() const { return offset_; }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
  std::uint64_t offset_;
};

}  // namespace tado::binary
