#pragma once

// Merkle commitment to the secret token-to-position map of the multi-bit
// scheme.  Leaves are H(y, M[y], sk); internal nodes are two-to-one hashes.
// The leaf count is padded to a power of two with H(0, 0, sk).

#include <cstdint>
#include <span>
#include <vector>

#include "pvmark/field.hpp"
#include "pvmark/hash.hpp"

namespace pvmark {

struct TokenPositionMap {
  unsigned n_hat = 0;
  std::vector<uint32_t> positions;  // indexed by token

  uint64_t vocab_size() const { return positions.size(); }
  uint32_t operator[](uint64_t token) const;

  // Pseudorandom assignment keyed by the secret key, so the map never has to
  // be stored separately from the key.
  static TokenPositionMap derive(const FieldElement& sk, uint64_t vocab_size,
                                 unsigned n_hat);
  void validate() const;
};

struct MerklePath {
  uint64_t leaf_index = 0;
  std::vector<FieldElement> siblings;  // bottom-up
  // path_bits[i] = 1 when the running node is the left input at level i.
  std::vector<uint8_t> path_bits;
};

FieldElement merkle_leaf(HashKind kind, uint64_t token, uint64_t position,
                         const FieldElement& sk);

// H_0 = leaf; H_i = H(H_{i-1}, Sib_i) if path_i = 1 else H(Sib_i, H_{i-1}).
FieldElement merkle_recompute(HashKind kind, const FieldElement& leaf,
                              const MerklePath& path);
bool verify_path(HashKind kind, const FieldElement& leaf, const MerklePath& path,
                 const FieldElement& root);

class MerkleTree {
 public:
  static MerkleTree build(const TokenPositionMap& map, const FieldElement& sk,
                          HashKind kind = HashKind::kPoseidon);

  const FieldElement& root() const { return levels_.back().front(); }
  unsigned depth() const { return static_cast<unsigned>(levels_.size() - 1); }
  uint64_t leaf_count() const { return levels_.front().size(); }
  uint64_t vocab_size() const { return vocab_size_; }
  HashKind kind() const { return kind_; }
  const FieldElement& leaf(uint64_t index) const;

  MerklePath open(uint64_t token) const;

 private:
  HashKind kind_ = HashKind::kPoseidon;
  uint64_t vocab_size_ = 0;
  std::vector<std::vector<FieldElement>> levels_;  // leaves first
};

}  // namespace pvmark
