#pragma once

// Relaxed R1CS folding and the chunked recursive detection prover.
//
// A text is cut into chunks of n_t scored tokens.  Each chunk is a plain
// instance of one step circuit that advances a hidden green count:
//   H_in = Acc(count_in, s_H),  H_out = Acc(count_out, s_H),
//   count_out = count_in + sum_i mask_i * flag_i.
// The chunks are folded one by one into a running relaxed instance with
// Fiat-Shamir challenges; an auxiliary instance ties the last accumulator to
// the public final count.  Folding here is transparent: witnesses travel with
// the proof and the verifier replays every fold.

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pvmark/circuits.hpp"
#include "pvmark/r1cs.hpp"

namespace pvmark {

// T = AZ1 o BZ2 + AZ2 o BZ1 - mu1 CZ2 - mu2 CZ1
std::vector<FieldElement> compute_cross_term(const ConstraintSystem& cs, const Assignment& z1,
                                             const FieldElement& mu1, const Assignment& z2,
                                             const FieldElement& mu2);

// Z = Z1 + r Z2, mu = mu1 + r mu2, err = err1 + r T + r^2 err2.
RelaxedInstance fold_with_cross_term(const RelaxedInstance& i1, const RelaxedInstance& i2,
                                     std::span<const FieldElement> cross_term,
                                     const FieldElement& r);
RelaxedInstance fold(const ConstraintSystem& cs, const RelaxedInstance& i1,
                     const RelaxedInstance& i2, const FieldElement& r);

struct FoldChallenge {
  FieldElement r;
};

// SHA-256 over mu, publics, witness and err, reduced into the field.
FieldElement instance_digest(const RelaxedInstance& inst);
FieldElement plain_instance_digest(const Assignment& asg);
FieldElement vector_digest(std::span<const FieldElement> v);
// r = Poseidon(d1, d2, dT).
FoldChallenge derive_challenge(const FieldElement& d1, const FieldElement& d2,
                               const FieldElement& dT);

// Acc(c_0..c_k, s) = H(c_k, ... H(c_1, H(c_0, s))); one count gives H(c, s).
FieldElement accumulator_hash(HashKind kind, std::span<const uint64_t> counts,
                              const FieldElement& s_h);

// Step circuit shape: everything the statement fixes except the tokens.
struct StepShape {
  DetectionStatement params;  // tokens and claims unused
  size_t n_t = 0;
  size_t counters() const;    // 1, or 2^m_hat for Segment
};

// Inputs for one chunk.  KGW/SynthID: `tokens` holds psi context tokens
// followed by n_t chunk tokens.  Segment: one scored slot per entry of
// `index`, with its context and current token.
struct StepInput {
  std::vector<uint32_t> tokens;
  std::vector<uint32_t> index;
  std::vector<uint32_t> context;
  std::vector<uint8_t> mask;
  uint32_t position = 0;
  std::vector<SegmentOpening> openings;
  std::vector<uint64_t> count_in;
};

struct StepResult {
  CircuitBundle bundle;
  std::vector<uint64_t> count_out;
};

// Throws ChunkSizeMismatch when the input does not hold n_t slots.
StepResult build_step_instance(const StepShape& shape, const StepInput& in,
                               const SecretKey& key, const FieldElement& s_h,
                               bool record = false);
// Step rows as the verifier rebuilds them.
ConstraintSystem step_constraint_system(const StepShape& shape);
// Publics (final counts, H_init, H_final), witness s_H.
CircuitBundle build_aux_instance(const StepShape& shape, std::span<const uint64_t> final_count,
                                 const FieldElement& s_h);

struct TranscriptEntry {
  FieldElement r;
  FieldElement t_digest;
};

// One fold chain: the whole text for KGW/SynthID, one message position for
// Segment.
struct IvcChain {
  uint32_t position = 0;
  std::vector<Assignment> chunks;          // fresh step instances, mu = 1, err = 0
  std::vector<TranscriptEntry> transcript; // one per fold, n_f - 1 entries
  std::vector<FieldElement> acc_hashes;    // H^(1) .. H^(n_f + 1)
  RelaxedInstance final_instance;
  Assignment aux;
  std::vector<uint64_t> final_count;
};

struct IvcProof {
  DetectionStatement statement;
  size_t n_t = 0;
  std::vector<IvcChain> chains;

  size_t n_f() const;  // chunks across all chains
};

struct IvcTimings {
  double witness_s = 0;
  double fold_s = 0;
};

// Segment requires openings for every scored token's context.
IvcProof ivc_prove(const DetectionStatement& stmt, const SecretKey& key, const FieldElement& s_h,
                   size_t n_t, const SegmentOpenings* openings = nullptr,
                   IvcTimings* timings = nullptr);
// Accepts iff every challenge replays, each chain's folded instance is
// relaxed-satisfied, the aux instances bind the public counts to the last
// accumulators, and the chunk publics reproduce the statement.  Throws
// TranscriptTruncated when fold records are missing.
bool ivc_verify(const IvcProof& proof, const DetectionStatement& stmt);

nlohmann::json to_json(const IvcProof& p);
IvcProof ivc_proof_from_json(const nlohmann::json& j);

struct SweepRow {
  size_t n_t = 0;
  size_t n_f = 0;
  size_t rows_step = 0;    // rows of the folded (final) instance
  size_t rows_folded = 0;  // rows pushed through folds
  double setup_s = 0;      // step system construction
  double prove_s = 0;      // witness generation + folding
  double verify_s = 0;
  double total_s() const { return setup_s + prove_s; }
};

// Candidates must divide the scored-token count.  Each timing is the
// minimum over `repeats` runs.
std::vector<SweepRow> sweep_nt(const DetectionStatement& stmt, const SecretKey& key,
                               std::span<const size_t> candidates, unsigned repeats = 1);

}  // namespace pvmark
