#pragma once

#include <array>
#include <string>

#include "swarmsim/bytes.hpp"

namespace swarmsim {

using Digest256 = std::array<std::uint8_t, 32>;

Digest256 sha256(const Bytes& data);
Digest256 sha256(std::string_view data);
std::string sha256_hex(const Bytes& data);
std::string sha256_hex(std::string_view data);

Digest256 hmac_sha256(const Bytes& key, const Bytes& data);

// Constant-time comparison.
bool digest_equal(const Digest256& a, const Digest256& b);

}  // namespace swarmsim
