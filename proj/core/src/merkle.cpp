#include "pvmark/merkle.hpp"

#include <random>
#include <string>

#include "pvmark/error.hpp"
#include "pvmark/sha256.hpp"

namespace pvmark {

uint32_t TokenPositionMap::operator[](uint64_t token) const {
  if (token >= positions.size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "token " + std::to_string(token) + " outside the position map");
  }
  return positions[token];
}

TokenPositionMap TokenPositionMap::derive(const FieldElement& sk,
                                          uint64_t vocab_size, unsigned n_hat) {
  if (vocab_size == 0 || n_hat == 0) {
    throw Error(ErrorCode::kInvalidParams, "empty position map");
  }
  Sha256Stream s;
  s.update("pvmark/position-map");
  s.update(sk.to_bytes());
  s.update_u64(vocab_size);
  s.update_u64(n_hat);
  const Sha256Digest d = s.finish();
  std::seed_seq seq(d.begin(), d.end());
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<uint32_t> pos(0, n_hat - 1);
  TokenPositionMap m;
  m.n_hat = n_hat;
  m.positions.resize(vocab_size);
  for (auto& p : m.positions) p = pos(rng);
  return m;
}

void TokenPositionMap::validate() const {
  if (n_hat == 0 || positions.empty()) {
    throw Error(ErrorCode::kInvalidParams, "empty position map");
  }
  for (uint32_t p : positions) {
    if (p >= n_hat) throw Error(ErrorCode::kInvalidParams, "position out of range");
  }
}

FieldElement merkle_leaf(HashKind kind, uint64_t token, uint64_t position,
                         const FieldElement& sk) {
  return hash3(kind, FieldElement(token), FieldElement(position), sk);
}

FieldElement merkle_recompute(HashKind kind, const FieldElement& leaf,
                              const MerklePath& path) {
  if (path.siblings.size() != path.path_bits.size()) {
    throw Error(ErrorCode::kShapeMismatch, "siblings and path bits differ in length");
  }
  FieldElement h = leaf;
  for (size_t i = 0; i < path.siblings.size(); ++i) {
    h = path.path_bits[i] ? hash2(kind, h, path.siblings[i])
                          : hash2(kind, path.siblings[i], h);
  }
  return h;
}

bool verify_path(HashKind kind, const FieldElement& leaf, const MerklePath& path,
                 const FieldElement& root) {
  if (path.siblings.size() != path.path_bits.size()) return false;
  for (uint8_t b : path.path_bits) {
    if (b > 1) return false;
  }
  return merkle_recompute(kind, leaf, path) == root;
}

MerkleTree MerkleTree::build(const TokenPositionMap& map, const FieldElement& sk,
                             HashKind kind) {
  map.validate();
  MerkleTree t;
  t.kind_ = kind;
  t.vocab_size_ = map.vocab_size();
  uint64_t width = 1;
  while (width < t.vocab_size_) width <<= 1;

  std::vector<FieldElement> rows;
  rows.reserve(3 * width);
  for (uint64_t y = 0; y < width; ++y) {
    const bool real = y < t.vocab_size_;
    rows.push_back(FieldElement(real ? y : 0));
    rows.push_back(FieldElement(real ? map.positions[y] : 0));
    rows.push_back(sk);
  }
  std::vector<FieldElement> level(width);
  hash_batch(kind, 3, rows, level);
  t.levels_.push_back(std::move(level));
  while (t.levels_.back().size() > 1) {
    const auto& below = t.levels_.back();
    std::vector<FieldElement> up(below.size() / 2);
    hash_batch(kind, 2, below, up);
    t.levels_.push_back(std::move(up));
  }
  return t;
}

const FieldElement& MerkleTree::leaf(uint64_t index) const {
  if (index >= levels_.front().size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "leaf index");
  }
  return levels_.front()[index];
}

MerklePath MerkleTree::open(uint64_t token) const {
  if (token >= vocab_size_) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "token " + std::to_string(token) + " has no leaf");
  }
  MerklePath path;
  path.leaf_index = token;
  uint64_t idx = token;
  for (size_t lvl = 0; lvl + 1 < levels_.size(); ++lvl) {
    const bool left = (idx & 1) == 0;
    path.siblings.push_back(levels_[lvl][left ? idx + 1 : idx - 1]);
    path.path_bits.push_back(left ? 1 : 0);
    idx >>= 1;
  }
  return path;
}

}  // namespace pvmark
