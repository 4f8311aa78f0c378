#include <gtest/gtest.h>

#include <random>
#include <unordered_set>
#include <vector>

#include "hash_oracle.hpp"
#include "pvmark/error.hpp"
#include "pvmark/hash.hpp"

using namespace pvmark;
using namespace pvmark::testing;

namespace {

std::vector<mpz_class> to_mpz_vec(std::span<const Fe> in) {
  std::vector<mpz_class> out;
  for (const Fe& f : in) out.push_back(to_mpz(f));
  return out;
}

Fe p_minus(uint64_t k) { return -Fe(k); }

// Inputs near the edges of the field exercise the lazy reductions of the
// vector kernels.
std::vector<Fe> edge_values() {
  return {Fe(0), Fe(1), Fe(2), p_minus(1), p_minus(2), p_minus(3),
          fe_from_mpz(modulus_mpz() / 2), fe_from_mpz(modulus_mpz() / 2 + 1),
          fe_from_mpz((mpz_class(1) << 253) - 1), fe_from_mpz(mpz_class(1) << 252)};
}

struct SimdGuard {
  ~SimdGuard() { set_simd_enabled(true); }
};

}  // namespace

TEST(Constants, MimcRoundConstantsMatchIndependentDerivation) {
  const OracleMimc o;
  const auto& p = MimcParams::standard();
  ASSERT_EQ(p.rounds, 91u);
  ASSERT_EQ(p.exponent, 7u);
  ASSERT_EQ(p.round_constants.size(), 91u);
  EXPECT_TRUE(p.round_constants[0].is_zero());
  for (size_t i = 0; i < 91; ++i) {
    EXPECT_EQ(to_mpz(p.round_constants[i]), o.c[i]) << i;
  }
}

TEST(Constants, PoseidonConstantsMatchIndependentDerivation) {
  for (unsigned t : {3u, 4u}) {
    const OraclePoseidon o(t);
    const auto& p = PoseidonParams::standard(t);
    ASSERT_EQ(p.t, t);
    EXPECT_EQ(p.full_rounds, 8u);
    EXPECT_EQ(p.partial_rounds, t == 3 ? 57u : 56u);
    EXPECT_EQ(p.alpha, 5u);
    ASSERT_EQ(p.round_constants.size(), o.arc.size());
    for (size_t i = 0; i < o.arc.size(); ++i) {
      EXPECT_EQ(to_mpz(p.round_constants[i]), o.arc[i]);
    }
    for (unsigned i = 0; i < t; ++i) {
      for (unsigned j = 0; j < t; ++j) EXPECT_EQ(to_mpz(p.mds[i][j]), o.mds[i][j]);
    }
  }
}

TEST(Constants, ExponentsArePermutations) {
  const mpz_class pm1 = modulus_mpz() - 1;
  mpz_class g;
  mpz_gcd_ui(g.get_mpz_t(), pm1.get_mpz_t(), 7);
  EXPECT_EQ(g, 1);
  mpz_gcd_ui(g.get_mpz_t(), pm1.get_mpz_t(), 5);
  EXPECT_EQ(g, 1);
  mpz_gcd_ui(g.get_mpz_t(), pm1.get_mpz_t(), 3);
  EXPECT_NE(g, 1);
}

TEST(Constants, MdsIsInvertible) {
  for (unsigned t : {3u, 4u}) {
    const auto& p = PoseidonParams::standard(t);
    std::vector<std::vector<mpz_class>> m(t, std::vector<mpz_class>(t));
    for (unsigned i = 0; i < t; ++i) {
      for (unsigned j = 0; j < t; ++j) m[i][j] = to_mpz(p.mds[i][j]);
    }
    mpz_class det = 1;
    for (unsigned c = 0; c < t; ++c) {
      unsigned piv = c;
      while (piv < t && m[piv][c] == 0) ++piv;
      ASSERT_LT(piv, t) << "singular MDS for t=" << t;
      std::swap(m[c], m[piv]);
      det = mod_p(det * m[c][c]);
      const mpz_class inv = invm(m[c][c]);
      for (unsigned r = c + 1; r < t; ++r) {
        const mpz_class f = mod_p(m[r][c] * inv);
        for (unsigned k = c; k < t; ++k) m[r][k] = mod_p(m[r][k] - f * m[c][k]);
      }
    }
    EXPECT_NE(det, 0);
  }
}

TEST(Mimc, KeyZeroSingleBlockTrace) {
  const OracleMimc o;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const Fe x = random_fe(rng);
    // step by step: y <- (y + C_i)^7, then + k with k = 0
    mpz_class y = to_mpz(x);
    for (const auto& c : o.c) y = powm(mod_p(y + c), 7);
    EXPECT_EQ(to_mpz(mimc_encrypt(x, Fe(0))), y);
  }
}

TEST(Mimc, MatchesStraightLineOracle) {
  const OracleMimc o;
  std::mt19937_64 rng(12);
  auto edges = edge_values();
  for (int i = 0; i < 60; ++i) {
    std::vector<Fe> in;
    const size_t n = 2 + (i % 2);
    for (size_t k = 0; k < n; ++k) {
      in.push_back(i < 20 ? edges[(i + 3 * k) % edges.size()] : random_fe(rng));
    }
    EXPECT_EQ(to_mpz(mimc_hash(in)), o.hash(to_mpz_vec(in))) << i;
  }
}

TEST(Poseidon, MatchesStraightLineOracle) {
  std::mt19937_64 rng(13);
  auto edges = edge_values();
  for (unsigned t : {3u, 4u}) {
    const OraclePoseidon o(t);
    for (int i = 0; i < 40; ++i) {
      std::vector<Fe> in;
      for (unsigned k = 0; k + 1 < t; ++k) {
        in.push_back(i < 15 ? edges[(i + 5 * k) % edges.size()] : random_fe(rng));
      }
      EXPECT_EQ(to_mpz(poseidon_hash(in)), o.hash(to_mpz_vec(in))) << t << " " << i;
    }
  }
}

TEST(Poseidon, ReferencePermutationMatchesOracleOnFullStates) {
  std::mt19937_64 rng(14);
  for (unsigned t : {3u, 4u}) {
    const OraclePoseidon o(t);
    const auto& p = PoseidonParams::standard(t);
    for (int i = 0; i < 10; ++i) {
      std::vector<Fe> s(t);
      for (auto& v : s) v = random_fe(rng);
      auto ms = to_mpz_vec(s);
      poseidon_permute_reference(s, p);
      o.permute(ms);
      EXPECT_EQ(to_mpz_vec(s), ms);
    }
  }
}

TEST(Poseidon, OptimizedScheduleEqualsReference) {
  std::mt19937_64 rng(15);
  for (unsigned t : {3u, 4u}) {
    const auto& p = PoseidonParams::standard(t);
    for (int i = 0; i < 300; ++i) {
      std::vector<Fe> a(t);
      for (auto& v : a) v = random_fe(rng);
      if (i < 8) {
        for (unsigned k = 0; k < t; ++k) a[k] = edge_values()[(i + k) % 10];
      }
      auto b = a;
      poseidon_permute_reference(a, p);
      poseidon_permute(b, p);
      ASSERT_EQ(a, b) << t << " " << i;
    }
  }
}

TEST(Poseidon, OptimizedScheduleEqualsReferenceForOtherShapes) {
  std::mt19937_64 rng(16);
  for (unsigned t : {2u, 3u, 5u}) {
    const auto p = PoseidonParams::generate(t, 4, 9, "test/shape");
    for (int i = 0; i < 20; ++i) {
      std::vector<Fe> a(t);
      for (auto& v : a) v = random_fe(rng);
      auto b = a;
      poseidon_permute_reference(a, p);
      poseidon_permute(b, p);
      ASSERT_EQ(a, b);
    }
  }
}

TEST(Hash, ArityIsChecked) {
  const std::vector<Fe> one{Fe(1)}, four{Fe(1), Fe(2), Fe(3), Fe(4)};
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    for (const auto* in : {&one, &four}) {
      try {
        (void)hash(kind, *in);
        FAIL() << "expected ArityUnsupported";
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kArityUnsupported);
      }
    }
  }
}

TEST(Hash, Deterministic) {
  std::mt19937_64 rng(17);
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    const Fe a = random_fe(rng), b = random_fe(rng), c = random_fe(rng);
    EXPECT_EQ(hash3(kind, a, b, c), hash3(kind, a, b, c));
    EXPECT_EQ(hash2(kind, a, b), hash2(kind, a, b));
    EXPECT_EQ(prf(kind, std::vector<Fe>{a, b, c}), hash3(kind, a, b, c));
  }
}

TEST(Hash, DistinctKeysGiveDistinctDigests) {
  std::mt19937_64 rng(18);
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    for (int i = 0; i < 50; ++i) {
      const Fe k1 = random_fe(rng), k2 = random_fe(rng), y0 = random_fe(rng),
               y1 = random_fe(rng);
      EXPECT_NE(hash3(kind, k1, y0, y1), hash3(kind, k2, y0, y1));
    }
  }
}

TEST(Hash, ArgumentOrderMatters) {
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    EXPECT_NE(hash2(kind, Fe(1), Fe(2)), hash2(kind, Fe(2), Fe(1)));
    EXPECT_NE(hash3(kind, Fe(0), Fe(0), Fe(1)), hash3(kind, Fe(0), Fe(1), Fe(0)));
  }
}

TEST(Hash, NoCollisionsOverSixtyFiveThousandInputs) {
  std::vector<Fe> last(1u << 16);
  for (size_t i = 0; i < last.size(); ++i) last[i] = Fe(i);
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    for (size_t plen : {1u, 2u}) {
      const std::vector<Fe> prefix(plen, Fe(0xabcdef));
      std::vector<Fe> out(last.size());
      prf_batch(kind, prefix, last, out);
      std::unordered_set<Fe> seen(out.begin(), out.end());
      EXPECT_EQ(seen.size(), out.size()) << hash_kind_name(kind) << " " << plen;
    }
  }
}

TEST(Hash, BatchMatchesScalarOnBothPaths) {
  SimdGuard guard;
  std::mt19937_64 rng(19);
  std::vector<Fe> last = edge_values();
  for (int i = 0; i < 90; ++i) last.push_back(random_fe(rng));
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    for (size_t plen : {1u, 2u}) {
      std::vector<Fe> prefix;
      for (size_t k = 0; k < plen; ++k) prefix.push_back(k == 0 ? p_minus(1) : random_fe(rng));
      for (size_t n : {size_t{1}, size_t{7}, size_t{8}, size_t{33}, last.size()}) {
        const std::span<const Fe> sub(last.data(), n);
        std::vector<Fe> expect(n);
        for (size_t i = 0; i < n; ++i) {
          std::vector<Fe> in = prefix;
          in.push_back(sub[i]);
          expect[i] = hash(kind, in);
        }
        for (bool simd : {true, false}) {
          set_simd_enabled(simd);
          std::vector<Fe> out(n);
          prf_batch(kind, prefix, sub, out);
          EXPECT_EQ(out, expect) << hash_kind_name(kind) << " simd=" << simd << " n=" << n;
        }
      }
    }
  }
}

TEST(Hash, LaneBatchMatchesScalarOnBothPaths) {
  SimdGuard guard;
  std::mt19937_64 rng(21);
  const auto edges = edge_values();
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    for (unsigned arity : {2u, 3u}) {
      for (size_t n : {size_t{0}, size_t{1}, size_t{9}, size_t{64}, size_t{77}}) {
        std::vector<Fe> in(n * arity);
        for (size_t i = 0; i < in.size(); ++i) {
          in[i] = i % 5 == 0 ? edges[(i / 5) % edges.size()] : random_fe(rng);
        }
        std::vector<Fe> expect(n);
        for (size_t i = 0; i < n; ++i) {
          expect[i] = hash(kind, std::span<const Fe>(in).subspan(i * arity, arity));
        }
        for (bool simd : {true, false}) {
          set_simd_enabled(simd);
          std::vector<Fe> out(n);
          hash_batch(kind, arity, in, out);
          EXPECT_EQ(out, expect) << hash_kind_name(kind) << arity << " simd=" << simd;
        }
      }
    }
  }
  std::vector<Fe> out(2);
  EXPECT_THROW(hash_batch(HashKind::kMimc, 4, std::vector<Fe>(8), out), Error);
  EXPECT_THROW(hash_batch(HashKind::kMimc, 2, std::vector<Fe>(3), out), Error);
}

TEST(Hash, BatchRejectsBadShapes) {
  std::vector<Fe> last(4), out(3);
  const std::vector<Fe> prefix{Fe(1)};
  EXPECT_THROW(prf_batch(HashKind::kMimc, prefix, last, out), Error);
  std::vector<Fe> out4(4);
  EXPECT_THROW(prf_batch(HashKind::kPoseidon, std::vector<Fe>{}, last, out4), Error);
}

// Values pinned when the parameters were fixed; any change here breaks every
// previously issued commitment and proof.
TEST(Hash, GoldenVectors) {
  EXPECT_EQ(hash2(HashKind::kMimc, Fe(1), Fe(2)).to_hex(), "0x23342012c32ff900a6e4e6085df37aeaa17b89fe7c4616d6c40810341f7acfeb");
  EXPECT_EQ(hash3(HashKind::kMimc, Fe(1), Fe(2), Fe(3)).to_hex(), "0x2171344646e23e61acaaa3e1e0d9cc850cab4c0d5e579d31e59869b23c2e845c");
  EXPECT_EQ(hash2(HashKind::kPoseidon, Fe(1), Fe(2)).to_hex(), "0x2fd86dceb9e32e4b8e616845da3b097309cbff7fc70f749ee535b9c59bfaeb73");
  EXPECT_EQ(hash3(HashKind::kPoseidon, Fe(1), Fe(2), Fe(3)).to_hex(), "0x26d6285d4649e59f6f9d2707bc9a33f253d3c26b2d4308b50e5c76bbac271d6b");
  EXPECT_EQ(poseidon_sponge(std::vector<Fe>{Fe(1), Fe(2), Fe(3), Fe(4)}).to_hex(),
            "0x04fa5652ad06a671a3157ae798d3c01343c9694757c3e3cff070ec8c6c49999d");
}

TEST(Sponge, MatchesOracleAbsorption) {
  const OraclePoseidon o(4);
  std::mt19937_64 rng(20);
  for (size_t n : {0u, 1u, 3u, 4u, 7u, 10u}) {
    std::vector<Fe> in(n);
    for (auto& v : in) v = random_fe(rng);
    std::vector<mpz_class> s{mpz_class(static_cast<unsigned long>(n)), 0, 0, 0};
    size_t i = 0;
    do {
      for (size_t k = 0; k < 3 && i < n; ++k, ++i) s[k + 1] = mod_p(s[k + 1] + to_mpz(in[i]));
      o.permute(s);
    } while (i < n);
    EXPECT_EQ(to_mpz(poseidon_sponge(in)), s[1]) << n;
  }
}

TEST(Sponge, LengthIsBound) {
  EXPECT_NE(poseidon_sponge(std::vector<Fe>{Fe(1), Fe(2)}),
            poseidon_sponge(std::vector<Fe>{Fe(1), Fe(2), Fe(0)}));
  EXPECT_NE(poseidon_sponge(std::vector<Fe>{}), poseidon_sponge(std::vector<Fe>{Fe(0)}));
}

TEST(Hash, KindNamesRoundTrip) {
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    EXPECT_EQ(parse_hash_kind(hash_kind_name(kind)), kind);
  }
  EXPECT_THROW(parse_hash_kind("keccak"), Error);
}

TEST(Hash, DeriveFieldElementsIsCanonicalAndStable) {
  const auto a = derive_field_elements("x", 64);
  const auto b = derive_field_elements("x", 64);
  EXPECT_EQ(a, b);
  const auto o = oracle_derive("x", 64);
  for (size_t i = 0; i < 64; ++i) EXPECT_EQ(to_mpz(a[i]), o[i]);
  EXPECT_NE(derive_field_elements("y", 1)[0], a[0]);
}
