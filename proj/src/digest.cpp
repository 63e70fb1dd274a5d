#include "swarmsim/digest.hpp"

#include <openssl/crypto.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

namespace swarmsim {

Digest256 sha256(const Bytes& data) {
  Digest256 out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Digest256 sha256(std::string_view data) {
  Digest256 out{};
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(),
         out.data());
  return out;
}

std::string sha256_hex(const Bytes& data) {
  const Digest256 d = sha256(data);
  return hex_encode(d.data(), d.size());
}

std::string sha256_hex(std::string_view data) {
  const Digest256 d = sha256(data);
  return hex_encode(d.data(), d.size());
}

Digest256 hmac_sha256(const Bytes& key, const Bytes& data) {
  Digest256 out{};
  unsigned int len = 0;
  HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(),
       data.size(), out.data(), &len);
  return out;
}

bool digest_equal(const Digest256& a, const Digest256& b) {
  return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

}  // namespace swarmsim
