#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swarmsim {

using Bytes = std::vector<std::uint8_t>;
using Micros = std::uint64_t;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(const Bytes& b) {
  return std::string(b.begin(), b.end());
}

std::string hex_encode(const Bytes& data);
std::string hex_encode(const std::uint8_t* data, std::size_t len);

// Lowercase hex only, even length. Returns nullopt on any malformed input.
std::optional<Bytes> hex_decode(std::string_view hex);

}  // namespace swarmsim
