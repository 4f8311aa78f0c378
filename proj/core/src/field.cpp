#include "pvmark/field.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pvmark/error.hpp"

namespace pvmark {
namespace {

using u128 = unsigned __int128;
using detail::geq;
using detail::kP;
using detail::mont_mul;
using detail::sub_raw;

// 2^512 mod p
constexpr U256 kR2{0x1bb8e645ae216da7ull, 0x53fe3ab1e35c59e3ull,
                   0x8c49833d53bb8085ull, 0x0216d0b17f4e44a5ull};

U256 reduce_once_or_more(U256 v) {
  while (geq(v, kP)) v = sub_raw(v, kP);
  return v;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

// ---------------------------------------------------------------- U256

unsigned U256::bit_length() const {
  for (int i = 3; i >= 0; --i) {
    if (limbs[i] != 0) {
      return static_cast<unsigned>(i * 64 + 64 - __builtin_clzll(limbs[i]));
    }
  }
  return 0;
}

uint64_t U256::extract(unsigned lo, unsigned n) const {
  if (n == 0) return 0;
  const U256 s = shr(lo);
  if (n >= 64) return s.limbs[0];
  return s.limbs[0] & ((uint64_t{1} << n) - 1);
}

U256 U256::shr(unsigned n) const {
  if (n >= 256) return U256{};
  U256 r;
  const unsigned w = n / 64, b = n % 64;
  for (unsigned i = 0; i + w < 4; ++i) {
    uint64_t v = limbs[i + w] >> b;
    if (b != 0 && i + w + 1 < 4) v |= limbs[i + w + 1] << (64 - b);
    r.limbs[i] = v;
  }
  return r;
}

U256 U256::shl(unsigned n) const {
  if (n >= 256) return U256{};
  U256 r;
  const unsigned w = n / 64, b = n % 64;
  for (unsigned i = w; i < 4; ++i) {
    uint64_t v = limbs[i - w] << b;
    if (b != 0 && i - w >= 1) v |= limbs[i - w - 1] >> (64 - b);
    r.limbs[i] = v;
  }
  return r;
}

U256 U256::low_bits(unsigned n) const {
  if (n >= 256) return *this;
  U256 r = *this;
  for (unsigned i = 0; i < 4; ++i) {
    const unsigned lo = i * 64;
    if (lo >= n) {
      r.limbs[i] = 0;
    } else if (n - lo < 64) {
      r.limbs[i] &= (uint64_t{1} << (n - lo)) - 1;
    }
  }
  return r;
}

U256 U256::pow2(unsigned n) {
  U256 r;
  if (n < 256) r.set_bit(n, true);
  return r;
}

U256 U256::from_hex(std::string_view hex) {
  if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) {
    hex.remove_prefix(2);
  }
  if (hex.empty() || hex.size() > 64) {
    throw Error(ErrorCode::kParseError, "bad hex integer length");
  }
  U256 r;
  unsigned pos = 0;
  for (auto it = hex.rbegin(); it != hex.rend(); ++it, pos += 4) {
    const int d = hex_digit(*it);
    if (d < 0) throw Error(ErrorCode::kParseError, "bad hex digit");
    r.limbs[pos / 64] |= static_cast<uint64_t>(d) << (pos % 64);
  }
  return r;
}

U256 U256::from_decimal(std::string_view dec) {
  if (dec.empty()) throw Error(ErrorCode::kParseError, "empty decimal");
  U256 r;
  for (char c : dec) {
    if (c < '0' || c > '9') throw Error(ErrorCode::kParseError, "bad digit");
    uint64_t carry = static_cast<uint64_t>(c - '0');
    for (int i = 0; i < 4; ++i) {
      const u128 v = static_cast<u128>(r.limbs[i]) * 10 + carry;
      r.limbs[i] = static_cast<uint64_t>(v);
      carry = static_cast<uint64_t>(v >> 64);
    }
    if (carry != 0) throw Error(ErrorCode::kParseError, "decimal overflow");
  }
  return r;
}

std::string U256::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s = "0x";
  s.reserve(66);
  for (int i = 63; i >= 0; --i) {
    s.push_back(kDigits[(limbs[i / 16] >> ((i % 16) * 4)) & 0xf]);
  }
  return s;
}

std::string U256::to_decimal() const {
  if (is_zero()) return "0";
  U256 v = *this;
  std::string out;
  while (!v.is_zero()) {
    uint64_t rem = 0;
    for (int i = 3; i >= 0; --i) {
      const u128 cur = (static_cast<u128>(rem) << 64) | v.limbs[i];
      v.limbs[i] = static_cast<uint64_t>(cur / 10);
      rem = static_cast<uint64_t>(cur % 10);
    }
    out.push_back(static_cast<char>('0' + rem));
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double U256::to_double() const {
  double r = 0;
  for (int i = 3; i >= 0; --i) r = r * 18446744073709551616.0 + limbs[i];
  return r;
}

bool add_with_carry(const U256& a, const U256& b, U256& out) {
  uint64_t carry = 0;
  for (int i = 0; i < 4; ++i) {
    const u128 s = static_cast<u128>(a.limbs[i]) + b.limbs[i] + carry;
    out.limbs[i] = static_cast<uint64_t>(s);
    carry = static_cast<uint64_t>(s >> 64);
  }
  return carry != 0;
}

bool sub_with_borrow(const U256& a, const U256& b, U256& out) {
  uint64_t borrow = 0;
  for (int i = 0; i < 4; ++i) {
    const u128 d = static_cast<u128>(a.limbs[i]) - b.limbs[i] - borrow;
    out.limbs[i] = static_cast<uint64_t>(d);
    borrow = static_cast<uint64_t>(d >> 127);
  }
  return borrow != 0;
}

U256 mul_u64_shr(const U256& a, uint64_t m, unsigned shift) {
  std::array<uint64_t, 5> prod{};
  uint64_t carry = 0;
  for (int i = 0; i < 4; ++i) {
    const u128 v = static_cast<u128>(a.limbs[i]) * m + carry;
    prod[i] = static_cast<uint64_t>(v);
    carry = static_cast<uint64_t>(v >> 64);
  }
  prod[4] = carry;
  const unsigned w = shift / 64, b = shift % 64;
  U256 r;
  for (unsigned i = 0; i < 4 && i + w < 5; ++i) {
    uint64_t v = prod[i + w] >> b;
    if (b != 0 && i + w + 1 < 5) v |= prod[i + w + 1] << (64 - b);
    r.limbs[i] = v;
  }
  return r;
}

// ---------------------------------------------------------------- field

FieldElement::FieldElement(uint64_t v) : mont_(mont_mul(U256{v}, kR2)) {}

const U256& FieldElement::modulus() { return kP; }

FieldElement FieldElement::one() {
  static const FieldElement kOne(1);
  return kOne;
}

bool FieldElement::is_one() const { return *this == one(); }

FieldElement FieldElement::from_u256(const U256& v) {
  if (geq(v, kP)) {
    throw Error(ErrorCode::kNonCanonicalEncoding, "value >= p");
  }
  return FieldElement(mont_mul(v, kR2), RawTag{});
}

FieldElement FieldElement::from_u256_reduce(const U256& v) {
  return FieldElement(mont_mul(reduce_once_or_more(v), kR2), RawTag{});
}

namespace {
U256 u256_from_be(std::span<const uint8_t> bytes) {
  if (bytes.size() != FieldElement::kBytes) {
    throw Error(ErrorCode::kNonCanonicalEncoding, "expected 32 bytes");
  }
  U256 v;
  for (size_t i = 0; i < 32; ++i) {
    const size_t bit = (31 - i) * 8;
    v.limbs[bit / 64] |= static_cast<uint64_t>(bytes[i]) << (bit % 64);
  }
  return v;
}
}  // namespace

FieldElement FieldElement::from_bytes(std::span<const uint8_t> bytes) {
  return from_u256(u256_from_be(bytes));
}

FieldElement FieldElement::from_bytes_reduce(std::span<const uint8_t> bytes) {
  return from_u256_reduce(u256_from_be(bytes));
}

FieldElement FieldElement::from_hex(std::string_view hex) {
  if (hex.size() != 66 || hex[0] != '0' || hex[1] != 'x') {
    throw Error(ErrorCode::kNonCanonicalEncoding,
                "field hex must be 0x followed by 64 digits");
  }
  for (char c : hex.substr(2)) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      throw Error(ErrorCode::kNonCanonicalEncoding,
                  "field hex must be lowercase");
    }
  }
  return from_u256(U256::from_hex(hex));
}

U256 FieldElement::to_u256() const { return mont_mul(mont_, U256{1}); }

std::array<uint8_t, FieldElement::kBytes> FieldElement::to_bytes() const {
  const U256 v = to_u256();
  std::array<uint8_t, kBytes> out{};
  for (size_t i = 0; i < 32; ++i) {
    const size_t bit = (31 - i) * 8;
    out[i] = static_cast<uint8_t>(v.limbs[bit / 64] >> (bit % 64));
  }
  return out;
}

std::string FieldElement::to_hex() const { return to_u256().to_hex(); }

FieldElement FieldElement::operator-() const {
  if (is_zero()) return *this;
  return FieldElement(sub_raw(kP, mont_), RawTag{});
}




FieldElement FieldElement::pow(uint64_t e) const {
  FieldElement result = one();
  FieldElement base = *this;
  while (e != 0) {
    if (e & 1u) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

FieldElement FieldElement::pow(const U256& e) const {
  FieldElement result = one();
  for (int i = static_cast<int>(e.bit_length()) - 1; i >= 0; --i) {
    result *= result;
    if (e.bit(static_cast<unsigned>(i))) result *= *this;
  }
  return result;
}

FieldElement FieldElement::inverse() const {
  if (is_zero()) throw Error(ErrorCode::kZeroInverse, "inverse of zero");
  return pow(sub_raw(kP, U256{2}));
}

void batch_inverse(std::span<FieldElement> values) {
  if (values.empty()) return;
  std::vector<FieldElement> prefix(values.size());
  FieldElement acc = FieldElement::one();
  for (size_t i = 0; i < values.size(); ++i) {
    if (values[i].is_zero()) {
      throw Error(ErrorCode::kZeroInverse, "batch inverse of zero");
    }
    prefix[i] = acc;
    acc *= values[i];
  }
  FieldElement inv = acc.inverse();
  for (size_t i = values.size(); i-- > 0;) {
    const FieldElement v = values[i];
    values[i] = inv * prefix[i];
    inv *= v;
  }
}

}  // namespace pvmark
