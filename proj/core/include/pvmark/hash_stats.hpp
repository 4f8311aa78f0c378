#pragma once

// Randomness tests for hash-based PRFs: avalanche coefficient and chi-square
// uniformity over a vocabulary-sized batch of digests.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pvmark/field.hpp"
#include "pvmark/hash.hpp"

namespace pvmark {

// out[i] = F(prefix || last[i]).  prefix always has two elements here:
// (key, previous token).
using BatchPrf = std::function<void(std::span<const FieldElement> prefix,
                                    std::span<const FieldElement> last,
                                    std::span<FieldElement> out)>;

BatchPrf hash_batch_prf(HashKind kind);

// Controls for the harness itself.
// SHA-256 over the 96-byte big-endian encoding, read as a 256-bit integer and
// reduced mod p.  2^256 is not a multiple of p, so small residues are
// over-represented.
BatchPrf sha256_mod_p_prf();
// A sound hash with its low `zero_bits` output bits cleared.
BatchPrf biased_prf(HashKind kind, unsigned zero_bits = 250);
// Ignores its input entirely.
BatchPrf constant_prf();

inline constexpr unsigned kAvalancheBits = 254;

struct AvalancheReport {
  double coefficient = 0;
  uint64_t trials = 0;
};

// Each trial draws (key, previous, current), flips one uniformly chosen bit of
// the current input (redrawn when the result is not canonical) and counts the
// output bits that change among the low 254.
AvalancheReport avalanche(const BatchPrf& prf, uint64_t trials, uint64_t seed);
AvalancheReport avalanche(HashKind kind, uint64_t trials, uint64_t seed);

inline constexpr unsigned kChiSquareBins = 17;
inline constexpr uint64_t kDefaultVocabSize = 50265;
// 95th percentile of chi-square with 16 degrees of freedom.
inline constexpr double kChiSquareThreshold16 = 26.296;

struct ChiSquareReport {
  double mean_chi2 = 0;
  double stddev_chi2 = 0;
  double pass_rate = 0;
  uint64_t iterations = 0;
  unsigned bins = 0;
  uint64_t vocab_size = 0;
  double threshold = 0;
  std::vector<double> chi2;  // per iteration
};

// Boundaries ceil(k p / bins) for k = 1..bins-1; bin j holds [b_j, b_{j+1}).
std::vector<U256> uniform_bin_boundaries(unsigned bins);
unsigned bin_of(const U256& value, std::span<const U256> boundaries);

// Per iteration: random key and previous token, digests of every current
// token index in [0, vocab_size), binned into equal subranges of [0, p).
// Pass iff chi2 < threshold.  Only bins = 17 has a built-in threshold; other
// bin counts require an explicit one.
ChiSquareReport chi_square_uniformity(const BatchPrf& prf, uint64_t iterations,
                                      uint64_t seed,
                                      unsigned bins = kChiSquareBins,
                                      uint64_t vocab_size = kDefaultVocabSize,
                                      double threshold = kChiSquareThreshold16);
ChiSquareReport chi_square_uniformity(HashKind kind, uint64_t iterations,
                                      uint64_t seed,
                                      unsigned bins = kChiSquareBins,
                                      uint64_t vocab_size = kDefaultVocabSize);

}  // namespace pvmark
