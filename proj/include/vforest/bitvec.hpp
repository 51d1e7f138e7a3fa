#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vforest {

// One slot per element, each 0 or 1.
using BitVec = std::vector<std::uint8_t>;

inline std::string to_string(const BitVec& bits) {
  std::string out;
  out.reserve(bits.size());
  for (auto b : bits) out.push_back(b ? '1' : '0');
  return out;
}

inline BitVec bits_from_string(std::string_view text) {
  BitVec out;
  out.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1')
      throw std::invalid_argument("bitvector literal may only contain 0 and 1");
    out.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return out;
}

inline std::size_t popcount(const BitVec& bits) {
  std::size_t n = 0;
  for (auto b : bits) n += b;
  return n;
}

// ceil(log2(n)) with lg(0) = lg(1) = 0.
constexpr unsigned ceil_log2(std::uint64_t n) {
  unsigned r = 0;
  std::uint64_t v = 1;
  while (v < n) {
    v <<= 1;
    ++r;
  }
  return r;
}

}  // namespace vforest
