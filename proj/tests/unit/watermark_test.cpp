#include <gtest/gtest.h>

#include <cmath>

#include "hash_oracle.hpp"
#include "pvmark/error.hpp"
#include "pvmark/watermark.hpp"

using namespace pvmark;
using namespace pvmark::testing;

namespace {

mpz_class floor_fraction_of_p(double x) {
  mpq_class q(x);
  q *= mpq_class(modulus_mpz());
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

WatermarkParams small(Scheme s, uint64_t vocab = 1000) {
  auto p = WatermarkParams::defaults(s);
  p.vocab_size = vocab;
  return p;
}

TokenSeq random_tokens(size_t n, uint64_t vocab, uint64_t seed) {
  std::mt19937_64 rng(seed);
  TokenSeq t(n);
  for (auto& x : t) x = static_cast<uint32_t>(rng() % vocab);
  return t;
}

// Seed chain written out directly from its definition.
Fe naive_seed(HashKind k, const Fe& sk, std::span<const uint32_t> c) {
  if (c.size() == 1) return hash2(k, sk, Fe(c[0]));
  Fe h = hash3(k, sk, Fe(c[0]), Fe(c[1]));
  size_t i = 2;
  for (; i + 1 < c.size(); i += 2) h = hash3(k, h, Fe(c[i]), Fe(c[i + 1]));
  if (i < c.size()) h = hash2(k, h, Fe(c[i]));
  return h;
}

bool below(const Fe& v, const mpz_class& thr) { return to_mpz(v) < thr; }

}  // namespace

TEST(Thresholds, MatchExactRationalFloor) {
  for (double g : {0.25, 0.5, 0.1, 1.0 / 3, 0.75, 1e-9, 0.999999}) {
    EXPECT_EQ(to_mpz(fraction_of_modulus(g)), floor_fraction_of_p(g)) << g;
  }
  EXPECT_EQ(to_mpz(fraction_of_modulus(0)), 0);
  EXPECT_EQ(to_mpz(half_field_threshold()), modulus_mpz() / 2);
  EXPECT_THROW(fraction_of_modulus(1.0), Error);
  auto p = small(Scheme::kSynthId);
  EXPECT_EQ(p.threshold(), half_field_threshold());
  p = small(Scheme::kKgw);
  EXPECT_EQ(p.threshold(), p.green_threshold());
}

TEST(ZScore, WorkedExample) {
  EXPECT_NEAR(kgw_z_score(200, 200, 0.25), 150 / std::sqrt(37.5), 1e-12);
  EXPECT_NEAR(kgw_z_score(200, 200, 0.25), 24.4949, 1e-4);
  EXPECT_EQ(kgw_z_score(50, 200, 0.25), 0.0);
}

TEST(Params, ValidationErrors) {
  auto p = small(Scheme::kKgw);
  p.psi = 2;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::kFusionUnavailable);
  p.fused = false;
  EXPECT_NO_THROW(p.validate());
  p.gamma = 1.0;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::kInvalidParams);
  auto s = small(Scheme::kSynthId);
  s.psi = 3;
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::kOddContextWidth);
  s = small(Scheme::kSynthId, 8);
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::kVocabTooSmall);
  auto g = small(Scheme::kSegment);
  g.psi = 2;
  EXPECT_EQ(code_of([&] { g.validate(); }), ErrorCode::kInvalidParams);
  EXPECT_EQ(parse_scheme("synthid"), Scheme::kSynthId);
  EXPECT_EQ(code_of([] { parse_scheme("nope"); }), ErrorCode::kParseError);
  for (auto sc : {Scheme::kKgw, Scheme::kSynthId, Scheme::kSegment}) {
    EXPECT_EQ(parse_scheme(scheme_name(sc)), sc);
    EXPECT_NO_THROW(WatermarkParams::defaults(sc).validate());
  }
}

TEST(Keys, CommitmentAndSeeding) {
  const auto a = SecretKey::from_seed(1), b = SecretKey::from_seed(1);
  EXPECT_EQ(a.sk, b.sk);
  EXPECT_EQ(a.s_h, b.s_h);
  EXPECT_NE(a.sk, SecretKey::from_seed(2).sk);
  const auto g = SecretKey::generate();
  EXPECT_FALSE(g.sk.is_zero());
  EXPECT_NE(g.sk, SecretKey::generate().sk);
  static const OraclePoseidon p3(3);
  EXPECT_EQ(to_mpz(setup_commit(a.sk)), p3.hash({to_mpz(a.sk), 0}));
  EXPECT_THROW(setup_commit(Fe(0)), Error);
}

TEST(ContextSeed, FollowsChainDefinition) {
  const Fe sk(42);
  const TokenSeq c{5, 9, 11, 2, 7};
  for (auto k : {HashKind::kMimc, HashKind::kPoseidon}) {
    for (size_t w = 1; w <= c.size(); ++w) {
      std::span<const uint32_t> ctx(c.data(), w);
      EXPECT_EQ(context_seed(k, sk, ctx), naive_seed(k, sk, ctx)) << w;
    }
  }
  EXPECT_EQ(context_seed(HashKind::kPoseidon, sk, std::span<const uint32_t>(c.data(), 2)),
            hash3(HashKind::kPoseidon, sk, Fe(5), Fe(9)));
}

TEST(DetectKgw, MatchesBruteForceRecount) {
  const auto key = SecretKey::from_seed(7);
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    for (unsigned psi : {1u, 2u, 3u}) {
      for (bool fused : {true, false}) {
        if (fused && psi != 1) continue;
        auto p = small(Scheme::kKgw);
        p.hash = kind;
        p.psi = psi;
        p.fused = fused;
        const auto toks = random_tokens(60, p.vocab_size, psi * 10 + fused);
        const mpz_class thr = floor_fraction_of_p(p.gamma);
        uint64_t green = 0;
        for (size_t i = psi; i < toks.size(); ++i) {
          const Fe g =
              fused ? hash3(kind, key.sk, Fe(toks[i - 1]), Fe(toks[i]))
                    : hash2(kind,
                            naive_seed(kind, key.sk,
                                       std::span<const uint32_t>(toks.data() + i - psi, psi)),
                            Fe(toks[i]));
          green += below(g, thr);
        }
        const auto r = detect_kgw(toks, p, key);
        EXPECT_EQ(r.n_scored, toks.size() - psi);
        EXPECT_EQ(r.green_count, green);
        EXPECT_DOUBLE_EQ(r.score, kgw_z_score(green, r.n_scored, p.gamma));
        EXPECT_EQ(detect(toks, p, key), r);
      }
    }
  }
}

TEST(DetectKgw, InputErrors) {
  const auto key = SecretKey::from_seed(7);
  const auto p = small(Scheme::kKgw);
  EXPECT_EQ(code_of([&] { detect_kgw({3}, p, key); }), ErrorCode::kTextTooShort);
  EXPECT_EQ(code_of([&] { detect_kgw({3, 1000}, p, key); }), ErrorCode::kIndexOutOfRange);
  EXPECT_EQ(code_of([&] { detect_synthid({3, 4}, p, key); }), ErrorCode::kInvalidParams);
  const auto sp = small(Scheme::kSegment);
  EXPECT_EQ(code_of([&] { detect({1, 2, 3}, sp, key); }), ErrorCode::kInvalidParams);
}

TEST(DetectSynthId, MatchesBruteForceRecount) {
  const auto key = SecretKey::from_seed(8);
  for (auto kind : {HashKind::kMimc, HashKind::kPoseidon}) {
    auto p = small(Scheme::kSynthId);
    p.hash = kind;
    p.xi = 5;
    const auto toks = random_tokens(30, p.vocab_size, 3);
    const mpz_class half = modulus_mpz() / 2;
    uint64_t sg = 0;
    for (size_t i = p.psi; i < toks.size(); ++i) {
      const Fe sd =
          naive_seed(kind, key.sk, std::span<const uint32_t>(toks.data() + i - p.psi, p.psi));
      for (unsigned k = 1; k <= p.xi; ++k) sg += below(hash3(kind, sd, Fe(toks[i]), Fe(k)), half);
    }
    const auto r = detect_synthid(toks, p, key);
    EXPECT_EQ(r.s_g, sg);
    EXPECT_EQ(r.n_scored, toks.size() - p.psi);
    EXPECT_DOUBLE_EQ(r.score, static_cast<double>(sg) / (r.n_scored * p.xi));
  }
}

TEST(DetectSegment, MatchesBruteForceRecount) {
  const auto key = SecretKey::from_seed(9);
  auto p = small(Scheme::kSegment);
  p.n_hat = 3;
  p.m_hat = 2;
  const auto map = TokenPositionMap::derive(key.sk, p.vocab_size, p.n_hat);
  const auto toks = random_tokens(80, p.vocab_size, 4);
  const mpz_class thr = floor_fraction_of_p(p.gamma);
  std::vector<std::vector<uint64_t>> count(3, std::vector<uint64_t>(4, 0));
  for (size_t i = 1; i < toks.size(); ++i) {
    for (unsigned j = 0; j < 4; ++j) {
      const Fe sd = hash3(p.hash, key.sk, Fe(toks[i - 1]), Fe(j));
      count[map[toks[i - 1]]][j] += below(hash2(p.hash, sd, Fe(toks[i])), thr);
    }
  }
  const auto r = detect_segment(toks, p, key, map);
  EXPECT_EQ(r.count, count);
  uint64_t total = 0;
  for (unsigned pos = 0; pos < 3; ++pos) {
    unsigned best = 0;
    for (unsigned j = 1; j < 4; ++j) {
      if (count[pos][j] > count[pos][best]) best = j;
    }
    EXPECT_EQ(r.decoded_msg[pos], best);
    total += count[pos][best];
  }
  EXPECT_DOUBLE_EQ(r.score, kgw_z_score(total, toks.size() - 1, p.gamma));
  auto wrong = map;
  wrong.n_hat = 4;
  EXPECT_EQ(code_of([&] { detect_segment(toks, p, key, wrong); }),
            ErrorCode::kMsgShapeMismatch);
}

TEST(EmbedKgw, ZeroDeltaReproducesPlainSampling) {
  const MockLm lm(1000, 5);
  const auto key = SecretKey::from_seed(1);
  const auto p = [] {
    auto q = small(Scheme::kKgw);
    q.delta = 0;
    return q;
  }();
  const TokenSeq prompt{17};
  EXPECT_EQ(embed_kgw(prompt, 100, p, key, lm, 33), generate_plain(prompt, 100, lm, 33));
}

TEST(EmbedKgw, LargeDeltaMakesTextGreen) {
  const MockLm lm(1000, 5);
  const auto key = SecretKey::from_seed(1);
  for (bool fused : {true, false}) {
    auto p = small(Scheme::kKgw);
    p.delta = 10;
    p.fused = fused;
    const auto toks = embed_kgw({17}, 200, p, key, lm, 3);
    ASSERT_EQ(toks.size(), 201u);
    EXPECT_EQ(toks[0], 17u);
    const auto r = detect_kgw(toks, p, key);
    EXPECT_GE(static_cast<double>(r.green_count) / r.n_scored, 0.9);
  }
}

TEST(EmbedKgw, DetectsAtDefaultStrengthAndNotWithoutKey) {
  const MockLm lm(50265, 11);
  const auto key = SecretKey::from_seed(2);
  const auto p = WatermarkParams::defaults(Scheme::kKgw);
  const auto toks = embed_kgw({100}, 200, p, key, lm, 4);
  EXPECT_GT(detect_kgw(toks, p, key).score, 4);
  EXPECT_LT(std::abs(detect_kgw(toks, p, SecretKey::from_seed(3)).score), 4);
  const auto plain = generate_plain({100}, 200, lm, 4);
  EXPECT_LT(std::abs(detect_kgw(plain, p, key).score), 4);
}

TEST(EmbedKgw, IsDeterministicAndChecksInputs) {
  const MockLm lm(1000, 5);
  const auto key = SecretKey::from_seed(1);
  const auto p = small(Scheme::kKgw);
  EXPECT_EQ(embed_kgw({1}, 30, p, key, lm, 8), embed_kgw({1}, 30, p, key, lm, 8));
  EXPECT_NE(embed_kgw({1}, 30, p, key, lm, 8), embed_kgw({1}, 30, p, key, lm, 9));
  EXPECT_EQ(code_of([&] { embed_kgw({}, 5, p, key, lm, 1); }), ErrorCode::kPromptTooShort);
  const MockLm other(999, 5);
  EXPECT_EQ(code_of([&] { embed_kgw({1}, 5, p, key, other, 1); }), ErrorCode::kInvalidParams);
}

TEST(EmbedSynthId, RaisesMeanGValue) {
  const MockLm lm(1000, 6, 1.0);
  const auto key = SecretKey::from_seed(4);
  auto p = small(Scheme::kSynthId);
  p.xi = p.tourney_depth;
  const TokenSeq prompt{1, 2, 3, 4};
  const auto toks = embed_synthid(prompt, 200, p, key, lm, 12);
  ASSERT_EQ(toks.size(), 204u);
  EXPECT_GT(detect_synthid(toks, p, key).score, 0.6);
  const auto plain = generate_plain(prompt, 200, lm, 12);
  EXPECT_NEAR(detect_synthid(plain, p, key).score, 0.5, 0.06);
  EXPECT_EQ(toks, embed_synthid(prompt, 200, p, key, lm, 12));
  EXPECT_EQ(code_of([&] { embed_synthid({1, 2, 3}, 5, p, key, lm, 1); }),
            ErrorCode::kPromptTooShort);
}

TEST(EmbedSegment, DecodesMessage) {
  const MockLm lm(50265, 13);
  const auto key = SecretKey::from_seed(5);
  auto p = WatermarkParams::defaults(Scheme::kSegment);
  p.delta = 4;
  const auto map = TokenPositionMap::derive(key.sk, p.vocab_size, p.n_hat);
  const std::vector<uint32_t> msg{3, 15, 0, 7, 9, 12};
  const auto toks = embed_segment({77}, 960, p, key, lm, 21, msg, map);
  const auto r = detect_segment(toks, p, key, map);
  EXPECT_EQ(r.decoded_msg, msg);
  EXPECT_GT(r.score, 4);
  const std::vector<uint32_t> other{4, 15, 0, 7, 9, 12};
  EXPECT_NE(toks, embed_segment({77}, 960, p, key, lm, 21, other, map));
  const std::vector<uint32_t> bad{16, 0, 0, 0, 0, 0};
  EXPECT_EQ(code_of([&] { embed_segment({77}, 5, p, key, lm, 21, bad, map); }),
            ErrorCode::kMsgShapeMismatch);
  EXPECT_EQ(code_of([&] {
              embed_segment({77}, 5, p, key, lm, 21, std::span(msg).first(5), map);
            }),
            ErrorCode::kMsgShapeMismatch);
}

TEST(MockLm, LogitsAreBoundedAndContextKeyed) {
  const MockLm lm(500, 1, 2.0);
  std::vector<double> a(500), b(500), c(500);
  const TokenSeq x{1, 2, 3}, y{9, 2, 3}, z{1, 2, 4};
  lm.next_logits(x, a);
  lm.next_logits(y, b);
  lm.next_logits(z, c);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (double v : a) {
    EXPECT_GE(v, -2.0);
    EXPECT_LE(v, 2.0);
  }
  std::vector<double> wrong(10);
  EXPECT_THROW(lm.next_logits(x, wrong), Error);
}
