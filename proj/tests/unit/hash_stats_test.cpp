#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <stdexcept>

#include "hash_oracle.hpp"
#include "pvmark/error.hpp"
#include "pvmark/hash_stats.hpp"
#include "pvmark/parallel.hpp"
#include "pvmark/rng.hpp"

using namespace pvmark;
using namespace pvmark::testing;

TEST(Bins, BoundariesAreCeilOfEqualSplit) {
  const auto b = uniform_bin_boundaries(17);
  ASSERT_EQ(b.size(), 16u);
  for (unsigned k = 1; k < 17; ++k) {
    mpz_class num = modulus_mpz() * k, q;
    mpz_cdiv_q_ui(q.get_mpz_t(), num.get_mpz_t(), 17);
    EXPECT_EQ(to_mpz(b[k - 1]), q) << k;
  }
}

TEST(Bins, BinOfAgreesWithIntegerDivision) {
  const auto b = uniform_bin_boundaries(17);
  std::mt19937_64 rng(3);
  std::vector<Fe> vals;
  for (const U256& x : b) {
    vals.push_back(Fe::from_u256(x));
    vals.push_back(Fe::from_u256(x) - Fe(1));
  }
  vals.push_back(Fe(0));
  vals.push_back(-Fe(1));
  for (int i = 0; i < 2000; ++i) vals.push_back(random_fe(rng));
  for (const Fe& v : vals) {
    mpz_class num = to_mpz(v) * 17, q;
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), modulus_mpz().get_mpz_t());
    EXPECT_EQ(bin_of(v.to_u256(), b), q.get_ui());
  }
}

TEST(Avalanche, HashesAreNearOneHalf) {
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    const auto r = avalanche(kind, 20000, 1);
    EXPECT_EQ(r.trials, 20000u);
    EXPECT_NEAR(r.coefficient, 0.5, 0.01) << hash_kind_name(kind);
  }
}

TEST(Avalanche, ConstantControlIsZero) {
  EXPECT_EQ(avalanche(constant_prf(), 1000, 1).coefficient, 0.0);
}

TEST(Avalanche, HandlesPartialGroups) {
  const auto a = avalanche(HashKind::kPoseidon, 37, 9);
  EXPECT_EQ(a.trials, 37u);
  EXPECT_GT(a.coefficient, 0.3);
  EXPECT_LT(a.coefficient, 0.7);
}

TEST(Avalanche, IsDeterministicPerSeed) {
  EXPECT_EQ(avalanche(HashKind::kMimc, 500, 5).coefficient,
            avalanche(HashKind::kMimc, 500, 5).coefficient);
}

TEST(ChiSquare, StatisticMatchesIndependentRecount) {
  const uint64_t vocab = 3000;
  const auto rep = chi_square_uniformity(hash_batch_prf(HashKind::kPoseidon), 3, 77,
                                         17, vocab, kChiSquareThreshold16);
  for (uint64_t it = 0; it < 3; ++it) {
    auto rng = derived_rng(77, it);
    std::uniform_int_distribution<uint64_t> tok(0, vocab - 1);
    const Fe sk = random_field_element(rng);
    const Fe prev(tok(rng));
    std::vector<unsigned long> counts(17, 0);
    for (uint64_t y = 0; y < vocab; ++y) {
      mpz_class num = to_mpz(hash3(HashKind::kPoseidon, sk, prev, Fe(y))) * 17, q;
      mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), modulus_mpz().get_mpz_t());
      ++counts[q.get_ui()];
    }
    const double e = static_cast<double>(vocab) / 17;
    double chi2 = 0;
    for (auto c : counts) chi2 += (c - e) * (c - e) / e;
    EXPECT_NEAR(rep.chi2[it], chi2, 1e-9);
  }
}

TEST(ChiSquare, HashesPassAtSmallScale) {
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    const auto rep = chi_square_uniformity(kind, 8, 2024);
    EXPECT_EQ(rep.iterations, 8u);
    EXPECT_LT(rep.mean_chi2, kChiSquareThreshold16);
    EXPECT_GE(rep.pass_rate, 0.5);
  }
}

TEST(ChiSquare, BiasedControlFails) {
  const auto rep = chi_square_uniformity(biased_prf(HashKind::kPoseidon), 4, 1);
  EXPECT_EQ(rep.pass_rate, 0.0);
  EXPECT_GT(rep.mean_chi2, 1000.0);
}

TEST(ChiSquare, Sha256ModPFails) {
  const auto rep = chi_square_uniformity(sha256_mod_p_prf(), 4, 1);
  EXPECT_EQ(rep.pass_rate, 0.0);
  EXPECT_GT(rep.mean_chi2, 200.0);
}

TEST(ChiSquare, RejectsUnsupportedBinCounts) {
  EXPECT_THROW(chi_square_uniformity(HashKind::kMimc, 1, 1, 10), Error);
  EXPECT_THROW(chi_square_uniformity(HashKind::kMimc, 0, 1), Error);
}

TEST(Parallel, ResultsDoNotDependOnThreadCount) {
  ::setenv("PVMARK_THREADS", "1", 1);
  const auto a = chi_square_uniformity(hash_batch_prf(HashKind::kMimc), 6, 3, 17, 500,
                                       kChiSquareThreshold16);
  const auto av = avalanche(HashKind::kMimc, 300, 3);
  ::setenv("PVMARK_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  const auto b = chi_square_uniformity(hash_batch_prf(HashKind::kMimc), 6, 3, 17, 500,
                                       kChiSquareThreshold16);
  const auto bv = avalanche(HashKind::kMimc, 300, 3);
  ::unsetenv("PVMARK_THREADS");
  EXPECT_EQ(a.chi2, b.chi2);
  EXPECT_EQ(av.coefficient, bv.coefficient);
}

TEST(Parallel, VisitsEveryIndexOnceAndPropagatesErrors) {
  ::setenv("PVMARK_THREADS", "4", 1);
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](size_t i) { hits[i].fetch_add(1); });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(100,
                            [](size_t i) {
                              if (i == 42) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  ::setenv("PVMARK_THREADS", "garbage", 1);
  EXPECT_GE(worker_count(), 1u);
  ::unsetenv("PVMARK_THREADS");
}
