#pragma once

// ZK-friendly hashes over the BN254 scalar field.
//
// MiMC: exponent 7, 91 rounds.  E_k(x) = F(x) + k where F is the composition
// of f_i(Y) = (Y + k + C_i)^7, C_0 = 0.  Inputs are absorbed one block at a
// time in Miyaguchi-Preneel style: h_0 = 0, h_{j+1} = h_j + x_j + E_{h_j}(x_j).
//
// Poseidon: width t = arity + 1, alpha = 5, (R_f, R_p) = (8, 57) for t = 3
// and (8, 56) for t = 4.  The capacity lane state[0] starts at zero, inputs
// fill state[1..t), the digest is state[1] after the permutation.  Partial
// rounds apply the S-box to the last lane.
//
// All constants come from SHA-256 in counter mode over fixed ASCII domain
// strings, so anyone can regenerate them.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pvmark/field.hpp"

namespace pvmark {

enum class HashKind { kMimc, kPoseidon };

std::string_view hash_kind_name(HashKind kind);
HashKind parse_hash_kind(std::string_view name);

// Deterministic stream of field elements: SHA-256(domain || be32(counter)),
// top two bits cleared, values >= p skipped.
std::vector<FieldElement> derive_field_elements(std::string_view domain,
                                                size_t count);

struct MimcParams {
  unsigned rounds = 0;
  unsigned exponent = 0;
  std::vector<FieldElement> round_constants;

  static MimcParams generate(unsigned rounds, unsigned exponent,
                             std::string_view domain);
  static const MimcParams& standard();
};

// E_k(x) = F(x) + k.
FieldElement mimc_encrypt(const FieldElement& x, const FieldElement& key,
                          const MimcParams& params = MimcParams::standard());

// One chaining step: h + x + E_h(x).
FieldElement mimc_absorb(const FieldElement& h, const FieldElement& x,
                         const MimcParams& params = MimcParams::standard());

// Arity 2 or 3, otherwise ArityUnsupported.
FieldElement mimc_hash(std::span<const FieldElement> inputs,
                       const MimcParams& params = MimcParams::standard());

struct PoseidonParams {
  unsigned t = 0;
  unsigned full_rounds = 0;
  unsigned partial_rounds = 0;
  unsigned alpha = 5;
  // mds[i][j]; row i produces output lane i.
  std::vector<std::vector<FieldElement>> mds;
  // (full_rounds + partial_rounds) * t, round-major.
  std::vector<FieldElement> round_constants;

  // Equivalent schedule for the partial rounds, derived from mds and
  // round_constants.  Lanes are reordered so that the S-box lane is 0.
  struct Optimized {
    // Constants for the first half of the full rounds, unchanged.
    // Per partial round: constant added to the S-box lane only.
    std::vector<FieldElement> partial_constants;
    // Per partial round: sparse matrix [[a, b^T], [w, I]] stored as
    // first_row (t entries: a, b...) and first_col (t - 1 entries: w).
    std::vector<std::vector<FieldElement>> first_row;
    std::vector<std::vector<FieldElement>> first_col;
    // Block-diagonal [[1, 0], [0, tail]] applied after the last partial
    // round; tail is (t-1) x (t-1).
    std::vector<std::vector<FieldElement>> tail;
    // Round constants of the full round following the partial rounds,
    // with the pushed-forward partial-round constants folded in.
    std::vector<FieldElement> second_half_first_constants;
  } optimized;

  static PoseidonParams generate(unsigned t, unsigned full_rounds,
                                 unsigned partial_rounds,
                                 std::string_view domain);
  // t = 3 or 4.
  static const PoseidonParams& standard(unsigned t);

  const FieldElement& rc(unsigned round, unsigned lane) const {
    return round_constants[round * t + lane];
  }
};

// Straight-line permutation exactly as the round description reads.
void poseidon_permute_reference(std::span<FieldElement> state,
                                const PoseidonParams& params);
// Same permutation using the sparse partial-round schedule.
void poseidon_permute(std::span<FieldElement> state,
                      const PoseidonParams& params);

// Arity 2 or 3, otherwise ArityUnsupported.
FieldElement poseidon_hash(std::span<const FieldElement> inputs);

// Arbitrary-length digest (t = 4, rate 3).  The capacity lane is seeded with
// the input length so inputs of different lengths never collide by padding.
FieldElement poseidon_sponge(std::span<const FieldElement> inputs);

FieldElement hash(HashKind kind, std::span<const FieldElement> inputs);

inline FieldElement hash2(HashKind kind, const FieldElement& a,
                          const FieldElement& b) {
  const std::array<FieldElement, 2> in{a, b};
  return hash(kind, in);
}

inline FieldElement hash3(HashKind kind, const FieldElement& a,
                          const FieldElement& b, const FieldElement& c) {
  const std::array<FieldElement, 3> in{a, b, c};
  return hash(kind, in);
}

// The pseudorandom function used for seeds and vocabulary partitioning.
inline FieldElement prf(HashKind kind, std::span<const FieldElement> inputs) {
  return hash(kind, inputs);
}

// out[i] = prf(kind, prefix || last[i]); prefix has length 1 or 2.
// Uses a vectorized kernel when the CPU supports it; results are identical
// to calling prf() in a loop.
void prf_batch(HashKind kind, std::span<const FieldElement> prefix,
               std::span<const FieldElement> last, std::span<FieldElement> out);

// out[i] = hash(kind, inputs[i*arity .. (i+1)*arity)) for arity 2 or 3; every
// lane may differ.  Same results as the scalar functions.
void hash_batch(HashKind kind, unsigned arity,
                std::span<const FieldElement> inputs, std::span<FieldElement> out);

// Forces the portable scalar path for prf_batch (testing and benchmarks).
void set_simd_enabled(bool enabled);
bool simd_available();

}  // namespace pvmark
