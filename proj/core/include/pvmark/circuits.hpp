#pragma once

// Detection circuits.  A statement fixes the public side (tokens, context
// width, threshold, claimed counts, commitment and for Segment the Merkle
// root); the builders emit rows and the honest witness in one pass.  The rows
// depend only on the statement, so a verifier rebuilds the system with a
// placeholder key and compares digests.

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pvmark/gadgets.hpp"
#include "pvmark/merkle.hpp"
#include "pvmark/r1cs.hpp"
#include "pvmark/watermark.hpp"

namespace pvmark {

struct DetectionStatement {
  Scheme scheme = Scheme::kKgw;
  HashKind hash = HashKind::kPoseidon;
  TokenSeq tokens;
  unsigned psi = 1;
  FieldElement threshold;
  bool fused = true;     // KGW
  unsigned xi = 0;       // SynthID
  unsigned n_hat = 0;    // Segment
  unsigned m_hat = 0;    // Segment
  uint64_t vocab_size = 0;
  uint64_t claimed_count = 0;                        // |y|_G or S_g
  std::vector<std::vector<uint64_t>> count_matrix;   // Segment COUNT
  FieldElement root;                                 // Segment
  FieldElement upsilon;

  // Statement mirroring a detection report; Segment needs the Merkle root.
  static DetectionStatement from_report(const WatermarkParams& params, const TokenSeq& tokens,
                                        const DetectionReport& report,
                                        const FieldElement& upsilon,
                                        const FieldElement& root = FieldElement());
  uint64_t scored_tokens() const { return tokens.size() - psi; }

  bool operator==(const DetectionStatement&) const = default;
};

// TextTooShort, FusionUnavailable, OddContextWidth, MsgShapeMismatch or
// InvalidParams for an inconsistent statement.
void validate_statement(const DetectionStatement& s);

nlohmann::json to_json(const DetectionStatement& s);
DetectionStatement statement_from_json(const nlohmann::json& j);

// Merkle openings for the Segment circuit, keyed by context token.
struct SegmentOpening {
  uint32_t position = 0;
  MerklePath path;
};
using SegmentOpenings = std::unordered_map<uint32_t, SegmentOpening>;

SegmentOpenings segment_openings(const MerkleTree& tree, const TokenPositionMap& map,
                                 const TokenSeq& tokens);
unsigned merkle_depth(uint64_t vocab_size);

struct CircuitOptions {
  RangeMode range = RangeMode::kBitwise;
  // Witness-repair probe, see Builder::flag_hook.
  std::function<bool(size_t index, bool honest)> flag_hook;
  // false skips row storage (witness generation only).
  bool record = true;
};

struct CircuitBundle {
  ConstraintSystem cs;  // empty when built with record = false
  Layout layout;
  Assignment assignment;
  size_t rows = 0;
};

nlohmann::json to_json(const Layout& layout);

// TextTooShort, FusionUnavailable, OddContextWidth as for detection.
CircuitBundle build_kgw_circuit(const DetectionStatement& stmt, const SecretKey& key,
                                const CircuitOptions& opts = {});
CircuitBundle build_synthid_circuit(const DetectionStatement& stmt, const SecretKey& key,
                                    const CircuitOptions& opts = {});
// MissingOpening when a scored token's context has no opening.
CircuitBundle build_segment_circuit(const DetectionStatement& stmt, const SecretKey& key,
                                    const SegmentOpenings& openings,
                                    const CircuitOptions& opts = {});
CircuitBundle build_circuit(const DetectionStatement& stmt, const SecretKey& key,
                            const SegmentOpenings* openings = nullptr,
                            const CircuitOptions& opts = {});

// Rows and publics as the verifier sees them, computed without the key.
CircuitBundle verifier_circuit(const DetectionStatement& stmt, RangeMode range = RangeMode::kBitwise);

// Transparent proof: the witness travels in the clear and verification is a
// satisfaction check against the rebuilt system.
struct MonolithicProof {
  DetectionStatement statement;
  RangeMode range = RangeMode::kBitwise;
  Sha256Digest cs_digest{};
  std::vector<FieldElement> publics;
  std::vector<FieldElement> witness;
};

bool prove_and_verify_monolithic(const CircuitBundle& bundle, const Assignment& assignment);
MonolithicProof prove_monolithic(const DetectionStatement& stmt, const SecretKey& key,
                                 const SegmentOpenings* openings = nullptr,
                                 RangeMode range = RangeMode::kBitwise);
bool verify_monolithic(const MonolithicProof& proof);

nlohmann::json to_json(const MonolithicProof& p);
MonolithicProof monolithic_proof_from_json(const nlohmann::json& j);

// Shared per-token pieces, also used by the folding step circuits.
namespace circuit_parts {

// context_seed() in-circuit.
LC context_seed(Builder& b, HashKind kind, const LC& sk, std::span<const LC> context);
// Flags for one scored token.  KGW/Segment give one flag (Segment one per
// hypothesis), SynthID gives xi.
LC kgw_flag(Builder& b, const DetectionStatement& s, const LC& sk, std::span<const LC> context,
            const LC& token, RangeMode range);
std::vector<LC> synthid_flags(Builder& b, const DetectionStatement& s, const LC& sk,
                              std::span<const LC> context, const LC& token, RangeMode range);
std::vector<LC> segment_flags(Builder& b, const DetectionStatement& s, const LC& sk,
                              const LC& prev, const LC& token, RangeMode range);
// Poseidon(sk, 0) = upsilon.
void bind_commitment(Builder& b, const LC& sk, const LC& upsilon);

}  // namespace circuit_parts

}  // namespace pvmark
