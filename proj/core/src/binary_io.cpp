#include "binary_io.hpp"

namespace fexprobe::detail {

void LeWriter::f32s(std::span<const float> values) {
  std::vector<char> buf(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(values[i]);
    buf[4 * i + 0] = static_cast<char>(bits & 0xFF);
    buf[4 * i + 1] = static_cast<char>((bits >> 8) & 0xFF);
    buf[4 * i + 2] = static_cast<char>((bits >> 16) & 0xFF);
    buf[4 * i + 3] = static_cast<char>((bits >> 24) & 0xFF);
  }
  out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::string LeReader::bytes(std::size_t n) {
  std::string s(n, '\0');
  in_.read(s.data(), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) throw Error(code_, "unexpected end of stream");
  return s;
}

void LeReader::f32s(std::span<float> out) {
  std::vector<unsigned char> buf(out.size() * 4);
  in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in_.gcount()) != buf.size()) {
    throw Error(code_, "unexpected end of stream");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(buf[4 * i]) |
                               (static_cast<std::uint32_t>(buf[4 * i + 1]) << 8) |
                               (static_cast<std::uint32_t>(buf[4 * i + 2]) << 16) |
                               (static_cast<std::uint32_t>(buf[4 * i + 3]) << 24);
    out[i] = std::bit_cast<float>(bits);
  }
}

bool LeReader::at_end() {
  return in_.peek() == std::char_traits<char>::eof();
}

std::uint64_t LeReader::get_uint(int n) {
  std::array<unsigned char, 8> buf{};
  in_.read(reinterpret_cast<char*>(buf.data()), n);
  if (in_.gcount() != n) throw Error(code_, "unexpected end of stream");
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace fexprobe::detail
