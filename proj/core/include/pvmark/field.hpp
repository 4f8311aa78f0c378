#pragma once

// Arithmetic over the BN254 scalar field
//   p = 21888242871839275222246405745257275088548364400416034343698204186575808495617.
//
// Elements are kept in Montgomery form internally; every accessor that
// exposes an integer (to_u256, bytes, hex, bit) returns the canonical
// representative in [0, p).

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

#if defined(__x86_64__)
#include <x86intrin.h>
#endif

namespace pvmark {

// 256-bit unsigned integer, little-endian 64-bit limbs.
struct U256 {
  std::array<uint64_t, 4> limbs{};

  constexpr U256() = default;
  constexpr explicit U256(uint64_t v) : limbs{v, 0, 0, 0} {}
  constexpr U256(uint64_t l0, uint64_t l1, uint64_t l2, uint64_t l3)
      : limbs{l0, l1, l2, l3} {}

  constexpr bool bit(unsigned i) const {
    return (limbs[i / 64] >> (i % 64)) & 1u;
  }
  constexpr void set_bit(unsigned i, bool v) {
    const uint64_t mask = uint64_t{1} << (i % 64);
    if (v) {
      limbs[i / 64] |= mask;
    } else {
      limbs[i / 64] &= ~mask;
    }
  }
  constexpr bool is_zero() const {
    return (limbs[0] | limbs[1] | limbs[2] | limbs[3]) == 0;
  }
  // Number of significant bits (0 for zero).
  unsigned bit_length() const;

  // Bits [lo, lo + n) as an integer; n <= 64.
  uint64_t extract(unsigned lo, unsigned n) const;

  U256 shr(unsigned n) const;
  U256 shl(unsigned n) const;
  // Low n bits.
  U256 low_bits(unsigned n) const;

  static U256 pow2(unsigned n);
  static U256 from_hex(std::string_view hex);
  static U256 from_decimal(std::string_view dec);
  std::string to_hex() const;  // 0x + 64 lowercase digits
  std::string to_decimal() const;
  double to_double() const;

  friend constexpr bool operator==(const U256& a, const U256& b) {
    return a.limbs == b.limbs;
  }
  friend constexpr std::strong_ordering operator<=>(const U256& a,
                                                    const U256& b) {
    for (int i = 3; i >= 0; --i) {
      if (a.limbs[i] != b.limbs[i]) return a.limbs[i] <=> b.limbs[i];
    }
    return std::strong_ordering::equal;
  }
};

// Wrapping arithmetic modulo 2^256; the bool reports the carry/borrow out.
bool add_with_carry(const U256& a, const U256& b, U256& out);
bool sub_with_borrow(const U256& a, const U256& b, U256& out);

// floor(a * m / 2^shift); the product is exact (320 bits), the result is
// truncated to 256 bits.
U256 mul_u64_shr(const U256& a, uint64_t m, unsigned shift);

namespace detail {

using u128 = unsigned __int128;

inline constexpr U256 kP{0x43e1f593f0000001ull, 0x2833e84879b97091ull,
                         0xb85045b68181585dull, 0x30644e72e131a029ull};
// -p^{-1} mod 2^64
inline constexpr uint64_t kInv = 0xc2e1f593efffffffull;

constexpr bool geq(const U256& a, const U256& b) {
  for (int i = 3; i >= 0; --i) {
    if (a.limbs[i] != b.limbs[i]) return a.limbs[i] > b.limbs[i];
  }
  return true;
}

#if defined(__x86_64__)
inline uint64_t addc(uint64_t a, uint64_t b, uint64_t& carry) {
  unsigned long long out;
  carry = _addcarry_u64(static_cast<unsigned char>(carry), a, b, &out);
  return out;
}

inline uint64_t subb(uint64_t a, uint64_t b, uint64_t& borrow) {
  unsigned long long out;
  borrow = _subborrow_u64(static_cast<unsigned char>(borrow), a, b, &out);
  return out;
}
#else
inline uint64_t addc(uint64_t a, uint64_t b, uint64_t& carry) {
  const u128 s = static_cast<u128>(a) + b + carry;
  carry = static_cast<uint64_t>(s >> 64);
  return static_cast<uint64_t>(s);
}

inline uint64_t subb(uint64_t a, uint64_t b, uint64_t& borrow) {
  const u128 d = static_cast<u128>(a) - b - borrow;
  borrow = static_cast<uint64_t>(d >> 64) & 1u;
  return static_cast<uint64_t>(d);
}
#endif

// a*b + c + d, split into (hi, lo); cannot overflow 128 bits.
inline uint64_t mac(uint64_t a, uint64_t b, uint64_t c, uint64_t& carry) {
  const u128 t = static_cast<u128>(a) * b + c + carry;
  carry = static_cast<uint64_t>(t >> 64);
  return static_cast<uint64_t>(t);
}

constexpr U256 sub_raw(const U256& a, const U256& b) {
  U256 r;
  uint64_t borrow = 0;
  for (int i = 0; i < 4; ++i) {
    const u128 d = static_cast<u128>(a.limbs[i]) - b.limbs[i] - borrow;
    r.limbs[i] = static_cast<uint64_t>(d);
    borrow = static_cast<uint64_t>(d >> 127);
  }
  return r;
}

// Maps r in [0, 2p) to [0, p).
inline U256 cond_sub_p(uint64_t r0, uint64_t r1, uint64_t r2, uint64_t r3) {
  uint64_t b = 0;
  const uint64_t s0 = subb(r0, kP.limbs[0], b);
  const uint64_t s1 = subb(r1, kP.limbs[1], b);
  const uint64_t s2 = subb(r2, kP.limbs[2], b);
  const uint64_t s3 = subb(r3, kP.limbs[3], b);
  return b ? U256{r0, r1, r2, r3} : U256{s0, s1, s2, s3};
}

// a + b for a, b < p; never overflows 256 bits because p < 2^254.
inline U256 add_mod(const U256& a, const U256& b) {
  uint64_t c = 0;
  const uint64_t r0 = addc(a.limbs[0], b.limbs[0], c);
  const uint64_t r1 = addc(a.limbs[1], b.limbs[1], c);
  const uint64_t r2 = addc(a.limbs[2], b.limbs[2], c);
  const uint64_t r3 = addc(a.limbs[3], b.limbs[3], c);
  return cond_sub_p(r0, r1, r2, r3);
}

inline U256 sub_mod(const U256& a, const U256& b) {
  uint64_t br = 0;
  uint64_t r0 = subb(a.limbs[0], b.limbs[0], br);
  uint64_t r1 = subb(a.limbs[1], b.limbs[1], br);
  uint64_t r2 = subb(a.limbs[2], b.limbs[2], br);
  uint64_t r3 = subb(a.limbs[3], b.limbs[3], br);
  const uint64_t mask = 0 - br;
  uint64_t c = 0;
  r0 = addc(r0, kP.limbs[0] & mask, c);
  r1 = addc(r1, kP.limbs[1] & mask, c);
  r2 = addc(r2, kP.limbs[2] & mask, c);
  r3 = addc(r3, kP.limbs[3] & mask, c);
  return U256{r0, r1, r2, r3};
}

// Montgomery product (CIOS). The top limb of p is below 2^62, so the
// intermediate never needs a fifth limb beyond a single carry word.
inline U256 mont_mul(const U256& a, const U256& b) {
  const uint64_t a0 = a.limbs[0], a1 = a.limbs[1], a2 = a.limbs[2],
                 a3 = a.limbs[3];
  constexpr uint64_t p0 = kP.limbs[0], p1 = kP.limbs[1], p2 = kP.limbs[2],
                     p3 = kP.limbs[3];
  uint64_t t0 = 0, t1 = 0, t2 = 0, t3 = 0;
  for (int i = 0; i < 4; ++i) {
    const uint64_t bi = b.limbs[i];
    uint64_t c = 0;
    t0 = mac(a0, bi, t0, c);
    t1 = mac(a1, bi, t1, c);
    t2 = mac(a2, bi, t2, c);
    t3 = mac(a3, bi, t3, c);
    const uint64_t t4 = c;

    const uint64_t m = t0 * kInv;
    c = 0;
    (void)mac(m, p0, t0, c);
    t0 = mac(m, p1, t1, c);
    t1 = mac(m, p2, t2, c);
    t2 = mac(m, p3, t3, c);
    t3 = t4 + c;
  }
  return cond_sub_p(t0, t1, t2, t3);
}

}  // namespace detail

class FieldElement {
 public:
  static constexpr size_t kBytes = 32;
  static constexpr unsigned kBits = 254;

  constexpr FieldElement() = default;
  // Small integers are always canonical.
  FieldElement(uint64_t v);  // NOLINT(google-explicit-constructor)

  static const U256& modulus();
  static FieldElement zero() { return FieldElement(); }
  static FieldElement one();

  // Throws NonCanonicalEncoding when v >= p.
  static FieldElement from_u256(const U256& v);
  // Reduces an arbitrary 256-bit integer modulo p.
  static FieldElement from_u256_reduce(const U256& v);
  static FieldElement from_bytes(std::span<const uint8_t> bytes);
  static FieldElement from_bytes_reduce(std::span<const uint8_t> bytes);
  static FieldElement from_hex(std::string_view hex);

  U256 to_u256() const;
  std::array<uint8_t, kBytes> to_bytes() const;
  std::string to_hex() const;
  bool bit(unsigned i) const { return to_u256().bit(i); }

  bool is_zero() const { return mont_.is_zero(); }
  bool is_one() const;

  FieldElement operator-() const;
  FieldElement& operator+=(const FieldElement& o) {
    mont_ = detail::add_mod(mont_, o.mont_);
    return *this;
  }
  FieldElement& operator-=(const FieldElement& o) {
    mont_ = detail::sub_mod(mont_, o.mont_);
    return *this;
  }
  FieldElement& operator*=(const FieldElement& o) {
    mont_ = detail::mont_mul(mont_, o.mont_);
    return *this;
  }

  friend FieldElement operator+(FieldElement a, const FieldElement& b) {
    return a += b;
  }
  friend FieldElement operator-(FieldElement a, const FieldElement& b) {
    return a -= b;
  }
  friend FieldElement operator*(FieldElement a, const FieldElement& b) {
    return a *= b;
  }

  FieldElement square() const { return *this * *this; }
  FieldElement pow(uint64_t e) const;
  FieldElement pow(const U256& e) const;
  // Throws ZeroInverse on zero.
  FieldElement inverse() const;

  friend bool operator==(const FieldElement& a, const FieldElement& b) {
    return a.mont_ == b.mont_;
  }

  // Orders by canonical integer value.
  friend std::strong_ordering operator<=>(const FieldElement& a,
                                          const FieldElement& b) {
    return a.to_u256() <=> b.to_u256();
  }

  // Raw Montgomery limbs; stable within a process only.
  const U256& montgomery_repr() const { return mont_; }

 private:
  struct RawTag {};
  constexpr FieldElement(const U256& mont, RawTag) : mont_(mont) {}

  U256 mont_{};
};

using Fe = FieldElement;

// Batch inversion (Montgomery's trick). All inputs must be nonzero.
void batch_inverse(std::span<FieldElement> values);

}  // namespace pvmark

template <>
struct std::hash<pvmark::FieldElement> {
  size_t operator()(const pvmark::FieldElement& f) const noexcept {
    const auto& l = f.montgomery_repr().limbs;
    return static_cast<size_t>(l[0] ^ (l[1] * 0x9e3779b97f4a7c15ull) ^
                               (l[2] << 1) ^ (l[3] >> 1));
  }
};
