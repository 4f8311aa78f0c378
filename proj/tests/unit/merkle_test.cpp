#include <gtest/gtest.h>

#include "hash_oracle.hpp"
#include "pvmark/error.hpp"
#include "pvmark/merkle.hpp"

using namespace pvmark;
using namespace pvmark::testing;

namespace {

// Naive rebuild through the GMP Poseidon oracle.
mpz_class oracle_root(const TokenPositionMap& map, const mpz_class& sk) {
  static const OraclePoseidon p3(3), p4(4);
  size_t width = 1;
  while (width < map.vocab_size()) width <<= 1;
  std::vector<mpz_class> level;
  for (size_t y = 0; y < width; ++y) {
    const bool real = y < map.vocab_size();
    level.push_back(p4.hash({mpz_class(real ? static_cast<unsigned long>(y) : 0ul),
                             mpz_class(real ? map.positions[y] : 0u), sk}));
  }
  while (level.size() > 1) {
    std::vector<mpz_class> up;
    for (size_t i = 0; i < level.size(); i += 2) up.push_back(p3.hash({level[i], level[i + 1]}));
    level = up;
  }
  return level[0];
}

}  // namespace

TEST(PositionMap, DerivationIsDeterministicAndKeyed) {
  const Fe sk(12345);
  const auto a = TokenPositionMap::derive(sk, 1000, 6);
  const auto b = TokenPositionMap::derive(sk, 1000, 6);
  const auto c = TokenPositionMap::derive(Fe(12346), 1000, 6);
  EXPECT_EQ(a.positions, b.positions);
  EXPECT_NE(a.positions, c.positions);
  std::vector<int> hist(6, 0);
  for (auto p : a.positions) ++hist.at(p);
  for (int h : hist) EXPECT_GT(h, 100);
  EXPECT_THROW(a[1000], Error);
  EXPECT_THROW(TokenPositionMap::derive(sk, 0, 6), Error);
}

TEST(Merkle, RootMatchesOracleRebuild) {
  const Fe sk(777);
  for (uint64_t vocab : {1ull, 2ull, 5ull, 16ull, 37ull}) {
    const auto map = TokenPositionMap::derive(sk, vocab, 3);
    const auto tree = MerkleTree::build(map, sk);
    EXPECT_EQ(to_mpz(tree.root()), oracle_root(map, to_mpz(sk))) << vocab;
  }
}

TEST(Merkle, DepthOneTreeByHand) {
  const Fe sk(5);
  TokenPositionMap map{2, {1, 0}};
  const auto tree = MerkleTree::build(map, sk);
  ASSERT_EQ(tree.depth(), 1u);
  const Fe l0 = hash3(HashKind::kPoseidon, Fe(0), Fe(1), sk);
  const Fe l1 = hash3(HashKind::kPoseidon, Fe(1), Fe(0), sk);
  EXPECT_EQ(tree.root(), hash2(HashKind::kPoseidon, l0, l1));
  const auto p0 = tree.open(0);
  EXPECT_EQ(p0.path_bits, std::vector<uint8_t>{1});
  EXPECT_EQ(p0.siblings[0], l1);
  const auto p1 = tree.open(1);
  EXPECT_EQ(p1.path_bits, std::vector<uint8_t>{0});
  EXPECT_EQ(p1.siblings[0], l0);
}

TEST(Merkle, EveryOpeningVerifiesAndTamperingFails) {
  const Fe sk(99);
  for (auto kind : {HashKind::kPoseidon, HashKind::kMimc}) {
    const auto map = TokenPositionMap::derive(sk, 13, 4);
    const auto tree = MerkleTree::build(map, sk, kind);
    EXPECT_EQ(tree.leaf_count(), 16u);
    for (uint64_t y = 0; y < 13; ++y) {
      const auto path = tree.open(y);
      const Fe leaf = merkle_leaf(kind, y, map[y], sk);
      EXPECT_EQ(leaf, tree.leaf(y));
      EXPECT_TRUE(verify_path(kind, leaf, path, tree.root()));
      EXPECT_FALSE(verify_path(kind, merkle_leaf(kind, y, (map[y] + 1) % 4, sk), path,
                               tree.root()));
      for (size_t i = 0; i < path.siblings.size(); ++i) {
        auto bad = path;
        bad.path_bits[i] ^= 1;
        EXPECT_FALSE(verify_path(kind, leaf, bad, tree.root()));
        bad = path;
        bad.siblings[i] += Fe(1);
        EXPECT_FALSE(verify_path(kind, leaf, bad, tree.root()));
        bad = path;
        bad.path_bits[i] = 2;
        EXPECT_FALSE(verify_path(kind, leaf, bad, tree.root()));
      }
      auto shortp = path;
      shortp.siblings.pop_back();
      EXPECT_FALSE(verify_path(kind, leaf, shortp, tree.root()));
    }
    EXPECT_THROW(tree.open(13), Error);
  }
}

TEST(Merkle, RootDependsOnKeyAndMap) {
  const Fe sk(3);
  auto map = TokenPositionMap::derive(sk, 64, 6);
  const Fe r = MerkleTree::build(map, sk).root();
  EXPECT_NE(r, MerkleTree::build(map, Fe(4)).root());
  map.positions[17] = (map.positions[17] + 1) % 6;
  EXPECT_NE(r, MerkleTree::build(map, sk).root());
  map.positions[17] = 6;
  EXPECT_THROW(MerkleTree::build(map, sk), Error);
}
