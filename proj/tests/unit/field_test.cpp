#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "pvmark/error.hpp"
#include "pvmark/field.hpp"

namespace pvmark {
namespace {

using testing::fe_from_mpz;
using testing::mod_p;
using testing::modulus_mpz;
using testing::random_fe;
using testing::to_mpz;

TEST(Field, ModulusMatchesPublishedValue) {
  EXPECT_EQ(FieldElement::modulus().to_decimal(),
            "21888242871839275222246405745257275088548364400416034343698204186575808495617");
  EXPECT_NE(mpz_probab_prime_p(modulus_mpz().get_mpz_t(), 40), 0);
  EXPECT_EQ(FieldElement::modulus().bit_length(), 254u);
  // Montgomery form is invisible: 1 round-trips as the integer 1.
  EXPECT_EQ(to_mpz(Fe(1)), 1);
  EXPECT_EQ(to_mpz(Fe(123456789)), 123456789);
}

TEST(Field, SmallCases) {
  EXPECT_EQ(Fe(1) + Fe(2), Fe(3));
  const Fe pm1 = -Fe(1);
  EXPECT_EQ(to_mpz(pm1), modulus_mpz() - 1);
  EXPECT_EQ(pm1 + Fe(1), Fe(0));
  EXPECT_EQ(Fe(0) - Fe(1), pm1);
  EXPECT_EQ(Fe(2).pow(3), Fe(8));
  EXPECT_EQ(Fe(1).inverse(), Fe(1));
  EXPECT_EQ(pm1.inverse(), pm1);
}

TEST(Field, ZeroInverseThrows) {
  try {
    (void)Fe(0).inverse();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroInverse);
  }
}

TEST(Field, ArithmeticAgreesWithGmp) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const Fe a = random_fe(rng), b = random_fe(rng);
    const mpz_class ma = to_mpz(a), mb = to_mpz(b);
    ASSERT_EQ(to_mpz(a + b), mod_p(ma + mb));
    ASSERT_EQ(to_mpz(a - b), mod_p(ma - mb));
    ASSERT_EQ(to_mpz(a * b), mod_p(ma * mb));
    ASSERT_EQ(to_mpz(-a), mod_p(-ma));
  }
}

TEST(Field, GroupLaws) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10000; ++i) {
    const Fe a = random_fe(rng), b = random_fe(rng), c = random_fe(rng);
    ASSERT_EQ((a + b) + c, a + (b + c));
    ASSERT_EQ((a * b) * c, a * (b * c));
    ASSERT_EQ(a + b, b + a);
    ASSERT_EQ(a * b, b * a);
    ASSERT_EQ(a * (b + c), a * b + a * c);
    ASSERT_EQ(a + (-a), Fe(0));
  }
}

TEST(Field, InverseAndPow) {
  std::mt19937_64 rng(3);
  U256 pm1 = FieldElement::modulus();
  pm1.limbs[0] -= 1;
  for (int i = 0; i < 100; ++i) {
    Fe a = random_fe(rng);
    if (a.is_zero()) a = Fe(7);
    ASSERT_EQ(a * a.inverse(), Fe(1));
    ASSERT_EQ(a.pow(pm1), Fe(1));
    ASSERT_EQ(a.pow(5), a * a * a * a * a);
    ASSERT_EQ(a.pow(0), Fe(1));
    mpz_class inv;
    mpz_class ma = to_mpz(a);
    mpz_invert(inv.get_mpz_t(), ma.get_mpz_t(), modulus_mpz().get_mpz_t());
    ASSERT_EQ(to_mpz(a.inverse()), inv);
  }
}

TEST(Field, BatchInverse) {
  std::mt19937_64 rng(4);
  std::vector<Fe> v;
  for (int i = 0; i < 50; ++i) v.push_back(random_fe(rng) + Fe(1));
  auto expected = v;
  for (auto& x : expected) x = x.inverse();
  batch_inverse(v);
  EXPECT_EQ(v, expected);
}

TEST(Field, CodecRoundTrip) {
  EXPECT_EQ(Fe(0).to_bytes(), (std::array<uint8_t, 32>{}));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const Fe a = random_fe(rng);
    const auto bytes = a.to_bytes();
    ASSERT_EQ(Fe::from_bytes(bytes), a);
    ASSERT_EQ(Fe::from_bytes(a.to_bytes()).to_bytes(), bytes);
    ASSERT_EQ(Fe::from_hex(a.to_hex()), a);
  }
}

TEST(Field, CodecRejectsNonCanonical) {
  std::array<uint8_t, 32> p_bytes{};
  const U256& p = FieldElement::modulus();
  for (size_t i = 0; i < 32; ++i) {
    const size_t bit = (31 - i) * 8;
    p_bytes[i] = static_cast<uint8_t>(p.limbs[bit / 64] >> (bit % 64));
  }
  try {
    (void)Fe::from_bytes(p_bytes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonCanonicalEncoding);
  }
  p_bytes[31] -= 1;
  EXPECT_EQ(Fe::from_bytes(p_bytes), -Fe(1));
  EXPECT_THROW((void)Fe::from_hex("0x1"), Error);
  EXPECT_THROW((void)Fe::from_hex(p.to_hex()), Error);
}

TEST(Field, HexFormat) {
  EXPECT_EQ(Fe(255).to_hex(),
            "0x00000000000000000000000000000000000000000000000000000000000000ff");
  EXPECT_EQ((-Fe(1)).to_hex(),
            "0x30644e72e131a029b85045b68181585d2833e84879b9709143e1f593f0000000");
}

TEST(U256, ShiftsAndExtract) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    U256 v{rng(), rng(), rng(), rng()};
    const unsigned n = static_cast<unsigned>(rng() % 256);
    const mpz_class mv = to_mpz(v);
    const mpz_class mask = (mpz_class(1) << 256) - 1;
    ASSERT_EQ(to_mpz(v.shr(n)), mpz_class(mv >> n));
    ASSERT_EQ(to_mpz(v.shl(n)), mpz_class((mv << n) & mask));
    ASSERT_EQ(to_mpz(v.low_bits(n)), mpz_class(mv & ((mpz_class(1) << n) - 1)));
    const unsigned w = static_cast<unsigned>(rng() % 65);
    const mpz_class ex = (mv >> n) & ((mpz_class(1) << w) - 1);
    ASSERT_EQ(mpz_class(static_cast<unsigned long>(v.extract(n, w))), ex);
    const uint64_t m = rng();
    const unsigned s = static_cast<unsigned>(rng() % 300);
    ASSERT_EQ(to_mpz(mul_u64_shr(v, m, s)),
              mpz_class(((mv * mpz_class(static_cast<unsigned long>(m))) >> s) & mask));
    ASSERT_EQ(U256::from_decimal(v.to_decimal()), v);
    ASSERT_EQ(U256::from_hex(v.to_hex()), v);
  }
}

TEST(Field, ReduceFromWideValue) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    U256 v{rng(), rng(), rng(), rng()};
    ASSERT_EQ(to_mpz(Fe::from_u256_reduce(v)), mod_p(to_mpz(v)));
  }
  (void)fe_from_mpz;
}

}  // namespace
}  // namespace pvmark
