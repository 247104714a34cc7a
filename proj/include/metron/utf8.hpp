// Minimal UTF-8 codec, enough for the Latin ranges verse corpora use.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace metron::utf8 {

inline std::vector<char32_t> decode(const std::string& s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    unsigned char b = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    int extra = 0;
    if (b < 0x80) {
      cp = b;
    } else if ((b & 0xE0) == 0xC0) {
      cp = b & 0x1F;
      extra = 1;
    } else if ((b & 0xF0) == 0xE0) {
      cp = b & 0x0F;
      extra = 2;
    } else if ((b & 0xF8) == 0xF0) {
      cp = b & 0x07;
      extra = 3;
    } else {
      throw std::invalid_argument("invalid UTF-8 byte in '" + s + "'");
    }
    if (i + extra >= s.size()) throw std::invalid_argument("truncated UTF-8 in '" + s + "'");
    for (int k = 1; k <= extra; ++k) {
      unsigned char c = static_cast<unsigned char>(s[i + k]);
      if ((c & 0xC0) != 0x80) throw std::invalid_argument("invalid UTF-8 continuation in '" + s + "'");
      cp = (cp << 6) | (c & 0x3F);
    }
    out.push_back(cp);
    i += 1 + extra;
  }
  return out;
}

inline void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append(out, cp);
  return out;
}

inline std::string encode(char32_t cp) {
  std::string out;
  append(out, cp);
  return out;
}

// Last n codepoints of s (whole string if shorter).
inline std::string suffix(const std::string& s, int n) {
  std::vector<char32_t> cps = decode(s);
  int start = std::max(0, static_cast<int>(cps.size()) - n);
  return encode(std::vector<char32_t>(cps.begin() + start, cps.end()));
}

inline std::string prefix(const std::string& s, int n) {
  std::vector<char32_t> cps = decode(s);
  int len = std::min<int>(n, static_cast<int>(cps.size()));
  return encode(std::vector<char32_t>(cps.begin(), cps.begin() + len));
}

inline int length(const std::string& s) { return static_cast<int>(decode(s).size()); }

}  // namespace metron::utf8
