#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "pvmark/circuits.hpp"
#include "pvmark/error.hpp"

using namespace pvmark;

namespace {

constexpr uint64_t kVocab = 1000;

TokenSeq random_text(std::mt19937_64& rng, size_t n) {
  TokenSeq t(n);
  for (auto& v : t) v = static_cast<uint32_t>(rng() % kVocab);
  return t;
}

WatermarkParams params_for(Scheme s, HashKind h) {
  auto p = WatermarkParams::defaults(s);
  p.hash = h;
  p.vocab_size = kVocab;
  if (s == Scheme::kSynthId) p.xi = 4;
  if (s == Scheme::kSegment) p.m_hat = 2;
  return p;
}

struct Setup {
  WatermarkParams params;
  SecretKey key;
  TokenSeq tokens;
  DetectionStatement stmt;
  SegmentOpenings openings;
};

Setup make_setup(Scheme s, HashKind h, uint64_t seed, size_t n, unsigned psi = 0,
                 bool fused = true) {
  Setup out;
  out.params = params_for(s, h);
  if (psi != 0) out.params.psi = psi;
  out.params.fused = fused;
  out.key = SecretKey::from_seed(seed);
  std::mt19937_64 rng(seed);
  out.tokens = random_text(rng, n);
  const auto upsilon = setup_commit(out.key.sk);
  if (s == Scheme::kSegment) {
    const auto map = TokenPositionMap::derive(out.key.sk, kVocab, out.params.n_hat);
    const auto tree = MerkleTree::build(map, out.key.sk, h);
    const auto rep = detect_segment(out.tokens, out.params, out.key, map);
    out.stmt = DetectionStatement::from_report(out.params, out.tokens, rep, upsilon, tree.root());
    out.openings = segment_openings(tree, map, out.tokens);
  } else {
    out.stmt = DetectionStatement::from_report(out.params, out.tokens,
                                               detect(out.tokens, out.params, out.key), upsilon);
  }
  return out;
}

bool holds(const Setup& s, const DetectionStatement& stmt, const CircuitOptions& opts = {}) {
  const auto b = build_circuit(stmt, s.key, &s.openings, opts);
  return is_satisfied(b.cs, b.assignment).ok;
}

}  // namespace

class CircuitScheme : public ::testing::TestWithParam<std::tuple<Scheme, HashKind>> {};

TEST_P(CircuitScheme, HonestWitnessSatisfiesAndClaimsAreBound) {
  const auto [scheme, hash] = GetParam();
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    const auto s = make_setup(scheme, hash, seed, scheme == Scheme::kSegment ? 6 : 12);
    EXPECT_TRUE(holds(s, s.stmt));
    for (int d : {-1, 1}) {
      auto bad = s.stmt;
      if (scheme == Scheme::kSegment) {
        bad.count_matrix[seed % bad.n_hat][seed % 4] += d;
      } else {
        bad.claimed_count += d;
      }
      if (bad.claimed_count == UINT64_MAX) continue;
      EXPECT_FALSE(holds(s, bad));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    All, CircuitScheme,
    ::testing::Combine(::testing::Values(Scheme::kKgw, Scheme::kSynthId, Scheme::kSegment),
                       ::testing::Values(HashKind::kPoseidon, HashKind::kMimc)));

TEST(KgwCircuit, UnfusedAndWiderContexts) {
  for (unsigned psi : {1u, 2u, 3u}) {
    const auto s = make_setup(Scheme::kKgw, HashKind::kPoseidon, 40 + psi, 14, psi, false);
    EXPECT_TRUE(holds(s, s.stmt)) << psi;
  }
}

TEST(KgwCircuit, FusedIsSmaller) {
  for (auto h : {HashKind::kPoseidon, HashKind::kMimc}) {
    const auto fused = make_setup(Scheme::kKgw, h, 5, 10, 1, true);
    const auto unfused = make_setup(Scheme::kKgw, h, 5, 10, 1, false);
    const auto rf = build_circuit(fused.stmt, fused.key).rows;
    const auto ru = build_circuit(unfused.stmt, unfused.key).rows;
    EXPECT_LT(rf, ru);
  }
}

TEST(KgwCircuit, BindingUnderFlagRepair) {
  const auto s = make_setup(Scheme::kKgw, HashKind::kPoseidon, 9, 20);
  std::mt19937_64 rng(3);
  const uint64_t n = s.stmt.scored_tokens();
  for (int trial = 0; trial < 40; ++trial) {
    const int d = trial % 2 == 0 ? 1 : -1;
    auto bad = s.stmt;
    bad.claimed_count += d;
    if (bad.claimed_count > n) continue;
    // Flip one flag in the direction that makes the sum match the claim.
    const size_t target = rng() % n;
    CircuitOptions opts;
    opts.flag_hook = [&](size_t idx, bool honest) {
      return idx == target && honest == (d < 0) ? !honest : honest;
    };
    const auto b = build_circuit(bad, s.key, nullptr, opts);
    EXPECT_FALSE(is_satisfied(b.cs, b.assignment).ok);
  }
}

TEST(KgwCircuit, ParamErrors) {
  auto s = make_setup(Scheme::kKgw, HashKind::kPoseidon, 1, 8);
  auto bad = s.stmt;
  bad.psi = 2;
  EXPECT_THROW(build_circuit(bad, s.key), Error);
  try {
    build_circuit(bad, s.key);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFusionUnavailable);
  }
  bad = s.stmt;
  bad.tokens.resize(1);
  try {
    build_circuit(bad, s.key);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTextTooShort);
  }
}

TEST(SynthIdCircuit, RowsLinearInXi) {
  auto s = make_setup(Scheme::kSynthId, HashKind::kPoseidon, 2, 10);
  std::vector<size_t> rows;
  for (unsigned xi : {2u, 4u, 8u}) {
    auto st = s.stmt;
    st.xi = xi;
    rows.push_back(verifier_circuit(st).rows);
  }
  EXPECT_EQ(rows[2] - rows[1], 2 * (rows[1] - rows[0]));
  auto odd = s.stmt;
  odd.psi = 3;
  try {
    build_circuit(odd, s.key);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOddContextWidth);
  }
}

TEST(SegmentCircuit, WrongRootAndMissingOpening) {
  const auto s = make_setup(Scheme::kSegment, HashKind::kPoseidon, 4, 6);
  auto bad = s.stmt;
  bad.root += FieldElement(1);
  EXPECT_FALSE(holds(s, bad));
  auto missing = s.openings;
  missing.erase(s.tokens[2]);
  try {
    build_segment_circuit(s.stmt, s.key, missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingOpening);
  }
  // Position claimed for another slot.
  auto moved = s.openings;
  auto& op = moved.at(s.tokens[0]);
  op.position = (op.position + 1) % s.stmt.n_hat;
  const auto b = build_segment_circuit(s.stmt, s.key, moved);
  EXPECT_FALSE(is_satisfied(b.cs, b.assignment).ok);
}

TEST(Monolithic, ProveVerifyAndTamper) {
  for (auto scheme : {Scheme::kKgw, Scheme::kSynthId, Scheme::kSegment}) {
    const auto s = make_setup(scheme, HashKind::kPoseidon, 12, scheme == Scheme::kSegment ? 5 : 10);
    const auto proof = prove_monolithic(s.stmt, s.key, &s.openings);
    EXPECT_TRUE(verify_monolithic(proof));
    EXPECT_TRUE(verify_monolithic(monolithic_proof_from_json(
        nlohmann::json::parse(to_json(proof).dump()))));

    auto tampered = proof;
    tampered.statement.tokens[3] = (tampered.statement.tokens[3] + 1) % kVocab;
    EXPECT_FALSE(verify_monolithic(tampered));
    tampered = proof;
    tampered.publics[0] += FieldElement(1);
    EXPECT_FALSE(verify_monolithic(tampered));
    tampered = proof;
    tampered.witness[0] = FieldElement();  // sk
    EXPECT_FALSE(verify_monolithic(tampered));
    tampered = proof;
    tampered.cs_digest[0] ^= 1;
    EXPECT_FALSE(verify_monolithic(tampered));
    tampered = proof;
    tampered.witness.pop_back();
    EXPECT_FALSE(verify_monolithic(tampered));

    const auto bundle = build_circuit(s.stmt, s.key, &s.openings);
    EXPECT_TRUE(prove_and_verify_monolithic(bundle, bundle.assignment));
    auto short_asg = bundle.assignment;
    short_asg.pub.pop_back();
    EXPECT_THROW(prove_and_verify_monolithic(bundle, short_asg), Error);
  }
}

TEST(Monolithic, WrongKeyFailsCommitment) {
  const auto s = make_setup(Scheme::kKgw, HashKind::kPoseidon, 13, 10);
  const auto other = SecretKey::from_seed(99);
  auto st = s.stmt;
  st.claimed_count = detect_kgw(s.tokens, s.params, other).green_count;
  const auto b = build_circuit(st, other);
  EXPECT_FALSE(is_satisfied(b.cs, b.assignment).ok);
}

TEST(Layout, PublicNamesOnceAndKeyPrivate) {
  for (auto scheme : {Scheme::kKgw, Scheme::kSynthId, Scheme::kSegment}) {
    const auto s = make_setup(scheme, HashKind::kPoseidon, 21, 6);
    const auto b = build_circuit(s.stmt, s.key, &s.openings);
    std::map<std::string, int> seen;
    for (const auto& e : b.layout.pub) ++seen[e.name];
    for (const auto& [name, n] : seen) EXPECT_EQ(n, 1) << name;
    EXPECT_TRUE(seen.count("tokens") && seen.count("psi") && seen.count("threshold") &&
                seen.count("upsilon"));
    EXPECT_EQ(seen.count("sk"), 0u);
    EXPECT_EQ(b.layout.wit.front().name, "sk");
    EXPECT_EQ(b.layout.public_range("tokens").count, s.tokens.size());
    const auto again = verifier_circuit(s.stmt);
    EXPECT_EQ(to_json(again.layout).dump(), to_json(b.layout).dump());
    EXPECT_EQ(again.cs.digest(), b.cs.digest());
  }
}

TEST(Statement, JsonRoundTrip) {
  const auto s = make_setup(Scheme::kSegment, HashKind::kMimc, 3, 8);
  EXPECT_EQ(statement_from_json(nlohmann::json::parse(to_json(s.stmt).dump())), s.stmt);
  auto j = to_json(s.stmt);
  j.erase("tokens");
  EXPECT_THROW(statement_from_json(j), Error);
}

TEST(RowCounts, PerTokenCostsArePinned) {
  auto per_token = [](Scheme scheme, HashKind h, bool fused) {
    const auto a = make_setup(scheme, h, 1, 8, 0, fused);
    auto b = a.stmt;
    b.tokens.push_back(5);
    return verifier_circuit(b).rows - verifier_circuit(a.stmt).rows;
  };
  // Fused Poseidon: 280-row three-to-one hash plus a 261-row flag.
  EXPECT_EQ(per_token(Scheme::kKgw, HashKind::kPoseidon, true), 541u);
  EXPECT_EQ(per_token(Scheme::kKgw, HashKind::kPoseidon, false), 771u);
  EXPECT_EQ(per_token(Scheme::kKgw, HashKind::kMimc, true), 1353u);
  EXPECT_EQ(per_token(Scheme::kKgw, HashKind::kMimc, false), 1717u);
  EXPECT_EQ(per_token(Scheme::kSynthId, HashKind::kPoseidon, true), 2712u);
  EXPECT_EQ(per_token(Scheme::kSegment, HashKind::kPoseidon, true), 6066u);
}
