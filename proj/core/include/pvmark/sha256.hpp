#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pvmark {

using Sha256Digest = std::array<uint8_t, 32>;

Sha256Digest sha256(std::span<const uint8_t> data);
Sha256Digest sha256(std::string_view data);

std::string to_hex_string(std::span<const uint8_t> bytes);

// Incremental hashing for structured data (constraint-system digests).
class Sha256Stream {
 public:
  Sha256Stream();
  ~Sha256Stream();
  Sha256Stream(const Sha256Stream&) = delete;
  Sha256Stream& operator=(const Sha256Stream&) = delete;

  void update(std::span<const uint8_t> data);
  void update(std::string_view data);
  void update_u64(uint64_t v);
  Sha256Digest finish();

 private:
  void* ctx_;
};

}  // namespace pvmark
