#pragma once

// Independent big-integer oracle built on GMP. Test code only.

#include <gmpxx.h>

#include <cstdint>
#include <random>

#include "pvmark/field.hpp"

namespace pvmark::testing {

inline mpz_class to_mpz(const U256& v) {
  mpz_class r = 0;
  for (int i = 3; i >= 0; --i) {
    r <<= 64;
    r += mpz_class(static_cast<unsigned long>(v.limbs[i]));
  }
  return r;
}

inline mpz_class to_mpz(const FieldElement& f) { return to_mpz(f.to_u256()); }

inline U256 from_mpz(mpz_class v) {
  U256 r;
  for (int i = 0; i < 4; ++i) {
    mpz_class lo = v & mpz_class("0xffffffffffffffff");
    r.limbs[i] = lo.get_ui();
    v >>= 64;
  }
  return r;
}

inline const mpz_class& modulus_mpz() {
  static const mpz_class p(
      "21888242871839275222246405745257275088548364400416034343698204186575808495617");
  return p;
}

inline mpz_class mod_p(const mpz_class& v) {
  mpz_class r = v % modulus_mpz();
  if (r < 0) r += modulus_mpz();
  return r;
}

inline FieldElement fe_from_mpz(const mpz_class& v) {
  return FieldElement::from_u256(from_mpz(mod_p(v)));
}

inline FieldElement random_fe(std::mt19937_64& rng) {
  U256 v;
  for (auto& l : v.limbs) l = rng();
  v.limbs[3] &= (uint64_t{1} << 62) - 1;
  return FieldElement::from_u256_reduce(v);
}

}  // namespace pvmark::testing
