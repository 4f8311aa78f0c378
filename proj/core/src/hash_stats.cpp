#include "pvmark/hash_stats.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>

#include "pvmark/error.hpp"
#include "pvmark/parallel.hpp"
#include "pvmark/rng.hpp"
#include "pvmark/sha256.hpp"

namespace pvmark {
namespace {

using u128 = unsigned __int128;

U256 div_small(const U256& a, uint64_t d, uint64_t& rem) {
  U256 q;
  u128 r = 0;
  for (int i = 3; i >= 0; --i) {
    const u128 cur = (r << 64) | a.limbs[i];
    q.limbs[i] = static_cast<uint64_t>(cur / d);
    r = cur % d;
  }
  rem = static_cast<uint64_t>(r);
  return q;
}

constexpr size_t kTrialsPerGroup = 16;

}  // namespace

BatchPrf hash_batch_prf(HashKind kind) {
  return [kind](std::span<const FieldElement> prefix,
                std::span<const FieldElement> last, std::span<FieldElement> out) {
    prf_batch(kind, prefix, last, out);
  };
}

BatchPrf sha256_mod_p_prf() {
  return [](std::span<const FieldElement> prefix,
            std::span<const FieldElement> last, std::span<FieldElement> out) {
    std::vector<uint8_t> buf;
    for (const FieldElement& f : prefix) {
      const auto b = f.to_bytes();
      buf.insert(buf.end(), b.begin(), b.end());
    }
    const size_t base = buf.size();
    buf.resize(base + FieldElement::kBytes);
    for (size_t i = 0; i < last.size(); ++i) {
      const auto b = last[i].to_bytes();
      std::copy(b.begin(), b.end(), buf.begin() + static_cast<ptrdiff_t>(base));
      out[i] = FieldElement::from_bytes_reduce(sha256(buf));
    }
  };
}

BatchPrf biased_prf(HashKind kind, unsigned zero_bits) {
  return [kind, zero_bits](std::span<const FieldElement> prefix,
                           std::span<const FieldElement> last,
                           std::span<FieldElement> out) {
    prf_batch(kind, prefix, last, out);
    for (FieldElement& f : out) {
      f = FieldElement::from_u256(f.to_u256().shr(zero_bits).shl(zero_bits));
    }
  };
}

BatchPrf constant_prf() {
  return [](std::span<const FieldElement>, std::span<const FieldElement>,
            std::span<FieldElement> out) {
    std::fill(out.begin(), out.end(), FieldElement(0x5eed));
  };
}

AvalancheReport avalanche(const BatchPrf& prf, uint64_t trials, uint64_t seed) {
  if (trials == 0) throw Error(ErrorCode::kInvalidParams, "zero trials");
  const size_t groups = (trials + kTrialsPerGroup - 1) / kTrialsPerGroup;
  std::vector<uint64_t> flipped(groups, 0);
  parallel_for(groups, [&](size_t g) {
    auto rng = derived_rng(seed, g);
    const size_t count =
        std::min<uint64_t>(kTrialsPerGroup, trials - g * kTrialsPerGroup);
    const std::array<FieldElement, 2> prefix{random_field_element(rng),
                                             random_field_element(rng)};
    std::vector<FieldElement> last(2 * count), out(2 * count);
    std::uniform_int_distribution<unsigned> pick(0, kAvalancheBits - 1);
    for (size_t i = 0; i < count; ++i) {
      const FieldElement x = random_field_element(rng);
      const U256 xv = x.to_u256();
      U256 yv;
      do {
        yv = xv;
        const unsigned b = pick(rng);
        yv.set_bit(b, !yv.bit(b));
      } while (!(yv < FieldElement::modulus()));
      last[i] = x;
      last[count + i] = FieldElement::from_u256(yv);
    }
    prf(prefix, last, out);
    uint64_t sum = 0;
    for (size_t i = 0; i < count; ++i) {
      const U256 a = out[i].to_u256(), b = out[count + i].to_u256();
      for (int l = 0; l < 4; ++l) {
        uint64_t diff = a.limbs[l] ^ b.limbs[l];
        if (l == 3) diff &= (uint64_t{1} << (kAvalancheBits - 192)) - 1;
        sum += static_cast<uint64_t>(std::popcount(diff));
      }
    }
    flipped[g] = sum;
  });
  const uint64_t total = std::accumulate(flipped.begin(), flipped.end(), uint64_t{0});
  AvalancheReport r;
  r.trials = trials;
  r.coefficient = static_cast<double>(total) /
                  (static_cast<double>(trials) * kAvalancheBits);
  return r;
}

AvalancheReport avalanche(HashKind kind, uint64_t trials, uint64_t seed) {
  return avalanche(hash_batch_prf(kind), trials, seed);
}

std::vector<U256> uniform_bin_boundaries(unsigned bins) {
  if (bins < 2) throw Error(ErrorCode::kInvalidParams, "need at least two bins");
  uint64_t r = 0;
  const U256 q = div_small(FieldElement::modulus(), bins, r);
  std::vector<U256> out;
  for (unsigned k = 1; k < bins; ++k) {
    // k * p / bins = k q + k r / bins
    U256 b = mul_u64_shr(q, k, 0);
    const uint64_t extra = (k * r + bins - 1) / bins;
    add_with_carry(b, U256{extra}, b);
    out.push_back(b);
  }
  return out;
}

unsigned bin_of(const U256& value, std::span<const U256> boundaries) {
  return static_cast<unsigned>(
      std::upper_bound(boundaries.begin(), boundaries.end(), value) -
      boundaries.begin());
}

ChiSquareReport chi_square_uniformity(const BatchPrf& prf, uint64_t iterations,
                                      uint64_t seed, unsigned bins,
                                      uint64_t vocab_size, double threshold) {
  if (iterations == 0 || vocab_size == 0) {
    throw Error(ErrorCode::kInvalidParams, "empty chi-square run");
  }
  if (bins != kChiSquareBins && threshold == kChiSquareThreshold16) {
    throw Error(ErrorCode::kInvalidParams,
                "the default threshold assumes 17 bins (16 degrees of freedom)");
  }
  const auto bounds = uniform_bin_boundaries(bins);
  std::vector<FieldElement> tokens(vocab_size);
  for (uint64_t y = 0; y < vocab_size; ++y) tokens[y] = FieldElement(y);
  const double expected = static_cast<double>(vocab_size) / bins;

  ChiSquareReport rep;
  rep.iterations = iterations;
  rep.bins = bins;
  rep.vocab_size = vocab_size;
  rep.threshold = threshold;
  rep.chi2.assign(iterations, 0.0);
  parallel_for(iterations, [&](size_t it) {
    auto rng = derived_rng(seed, it);
    std::uniform_int_distribution<uint64_t> tok(0, vocab_size - 1);
    const std::array<FieldElement, 2> prefix{random_field_element(rng),
                                             FieldElement(tok(rng))};
    std::vector<FieldElement> out(vocab_size);
    prf(prefix, tokens, out);
    std::vector<uint64_t> counts(bins, 0);
    for (const FieldElement& f : out) ++counts[bin_of(f.to_u256(), bounds)];
    double chi2 = 0;
    for (uint64_t c : counts) {
      const double d = static_cast<double>(c) - expected;
      chi2 += d * d / expected;
    }
    rep.chi2[it] = chi2;
  });

  double sum = 0, passes = 0;
  for (double c : rep.chi2) {
    sum += c;
    if (c < threshold) passes += 1;
  }
  rep.mean_chi2 = sum / static_cast<double>(iterations);
  double var = 0;
  for (double c : rep.chi2) var += (c - rep.mean_chi2) * (c - rep.mean_chi2);
  rep.stddev_chi2 =
      iterations > 1 ? std::sqrt(var / static_cast<double>(iterations - 1)) : 0.0;
  rep.pass_rate = passes / static_cast<double>(iterations);
  return rep;
}

ChiSquareReport chi_square_uniformity(HashKind kind, uint64_t iterations,
                                      uint64_t seed, unsigned bins,
                                      uint64_t vocab_size) {
  if (bins != kChiSquareBins) {
    throw Error(ErrorCode::kInvalidParams, "only 17 bins have a built-in threshold");
  }
  return chi_square_uniformity(hash_batch_prf(kind), iterations, seed, bins,
                               vocab_size, kChiSquareThreshold16);
}

}  // namespace pvmark
