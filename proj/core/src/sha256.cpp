#include "pvmark/sha256.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <stdexcept>

#include "pvmark/error.hpp"
#include "pvmark/rng.hpp"

namespace pvmark {

Sha256Digest sha256(std::span<const uint8_t> data) {
  Sha256Digest out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Sha256Digest sha256(std::string_view data) {
  return sha256(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t*>(data.data()), data.size()));
}

std::string to_hex_string(std::span<const uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xf]);
  }
  return s;
}

Sha256Stream::Sha256Stream() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr ||
      EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(),
                        nullptr) != 1) {
    throw std::runtime_error("EVP sha256 init failed");
  }
}

Sha256Stream::~Sha256Stream() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

void Sha256Stream::update(std::span<const uint8_t> data) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
}

void Sha256Stream::update(std::string_view data) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
}

void Sha256Stream::update_u64(uint64_t v) {
  uint8_t buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<uint8_t>(v >> (56 - 8 * i));
  update(std::span<const uint8_t>(buf, 8));
}

Sha256Digest Sha256Stream::finish() {
  Sha256Digest out{};
  unsigned len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len);
  return out;
}

FieldElement secure_random_field_element() {
  for (;;) {
    uint8_t buf[32];
    if (RAND_bytes(buf, sizeof(buf)) != 1) {
      throw Error(ErrorCode::kIoError, "system RNG unavailable");
    }
    buf[0] &= 0x3f;
    U256 v;
    for (size_t i = 0; i < 32; ++i) {
      const size_t bit = (31 - i) * 8;
      v.limbs[bit / 64] |= static_cast<uint64_t>(buf[i]) << (bit % 64);
    }
    if (v < FieldElement::modulus() && !v.is_zero()) {
      return FieldElement::from_u256(v);
    }
  }
}

}  // namespace pvmark
