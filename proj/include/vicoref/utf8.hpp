#pragma once

#include <cstddef>
#include <string_view>

// Offsets throughout the library are Unicode scalar values, not bytes:
// Vietnamese text makes byte offsets encoding-dependent.
namespace vicoref::utf8 {

inline bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

// Number of code points in a UTF-8 string.
inline std::size_t length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char b : s) {
    if (!is_continuation(b)) ++n;
  }
  return n;
}

// Byte offset of the code point at position `cp`; s.size() when cp is past the end.
inline std::size_t byte_offset(std::string_view s, std::size_t cp) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!is_continuation(static_cast<unsigned char>(s[i]))) {
      if (seen == cp) return i;
      ++seen;
    }
  }
  return s.size();
}

// Slice by code-point offsets [begin, end).
inline std::string_view slice(std::string_view s, std::size_t begin, std::size_t end) {
  const std::size_t from = byte_offset(s, begin);
  const std::size_t to = byte_offset(s, end);
  return s.substr(from, to - from);
}

}  // namespace vicoref::utf8
