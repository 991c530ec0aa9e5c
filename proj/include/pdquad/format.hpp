#pragma once

#include <array>
#include <charconv>
#include <string>

namespace pdq {

/// Shortest round-trip decimal form; locale independent, so CSV output is
/// byte-stable across runs.
inline std::string fmt_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace pdq
