#pragma once

// Little-endian primitives shared by the FEX1, RAW1 and KSM1 codecs.

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fexprobe/error.hpp"

namespace fexprobe::detail {

class LeWriter {
 public:
  explicit LeWriter(std::ostream& out) : out_(out) {}

  void bytes(std::string_view b) { out_.write(b.data(), static_cast<std::streamsize>(b.size())); }
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u16(std::uint16_t v) { put_uint(v, 2); }
  void u32(std::uint32_t v) { put_uint(v, 4); }
  void f32(float v) { put_uint(std::bit_cast<std::uint32_t>(v), 4); }
  void f32s(std::span<const float> values);

  void check(const char* what) const {
    if (!out_) throw Error(ErrorCode::IoError, std::string("write failed: ") + what);
  }

 private:
  void put_uint(std::uint64_t v, int n) {
    std::array<char, 8> buf{};
    for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(buf.data(), n);
  }

  std::ostream& out_;
};

/// Reads little-endian values; any short read throws `truncated_code`.
class LeReader {
 public:
  LeReader(std::istream& in, ErrorCode truncated_code) : in_(in), code_(truncated_code) {}

  std::string bytes(std::size_t n);
  std::uint8_t u8() { return static_cast<std::uint8_t>(get_uint(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get_uint(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_uint(4)); }
  void f32s(std::span<float> out);

  /// True when the stream has no bytes left.
  bool at_end();

 private:
  std::uint64_t get_uint(int n);

  std::istream& in_;
  ErrorCode code_;
};

}  // namespace fexprobe::detail
