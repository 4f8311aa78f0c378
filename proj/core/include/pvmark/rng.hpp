#pragma once

#include <cstdint>
#include <random>

#include "pvmark/field.hpp"

namespace pvmark {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Independent stream for (seed, index) pairs, e.g. one per iteration.
inline std::mt19937_64 derived_rng(uint64_t seed, uint64_t index) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(index),
                    static_cast<uint32_t>(index >> 32), 0x7076u};
  return std::mt19937_64(seq);
}

// Uniform element of [0, p) by rejection on 254-bit draws.
template <class Rng>
FieldElement random_field_element(Rng& rng) {
  for (;;) {
    U256 v{rng(), rng(), rng(), rng() & ((uint64_t{1} << 62) - 1)};
    if (v < FieldElement::modulus()) return FieldElement::from_u256(v);
  }
}

template <class Rng>
FieldElement random_nonzero_field_element(Rng& rng) {
  for (;;) {
    FieldElement f = random_field_element(rng);
    if (!f.is_zero()) return f;
  }
}

// Uniform double in [0, 1) with 53 random bits.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Field element from the operating system CSPRNG.
FieldElement secure_random_field_element();

}  // namespace pvmark
