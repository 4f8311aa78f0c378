#pragma once

// Hash-partitioned LLM watermarks: KGW (green lists), SynthID-Text
// (tournament sampling over binary g-values) and Segment-Watermark (multi-bit
// KGW keyed on a message digit per position).  Every PRF is one of the
// ZK-friendly hashes and every partition is a comparison against a fixed
// field threshold, so detection can be arithmetized exactly.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "pvmark/field.hpp"
#include "pvmark/hash.hpp"
#include "pvmark/merkle.hpp"

namespace pvmark {

enum class Scheme { kKgw, kSynthId, kSegment };

std::string_view scheme_name(Scheme s);
Scheme parse_scheme(std::string_view name);

using TokenSeq = std::vector<uint32_t>;

struct WatermarkParams {
  Scheme scheme = Scheme::kKgw;
  HashKind hash = HashKind::kPoseidon;
  double gamma = 0.25;
  unsigned psi = 1;
  double delta = 2.0;
  unsigned xi = 30;             // g-values scored per token (SynthID)
  unsigned tourney_depth = 4;   // embedding tournament levels (SynthID)
  unsigned n_hat = 6;           // message positions (Segment)
  unsigned m_hat = 4;           // bits per position (Segment)
  uint64_t vocab_size = 50265;
  // KGW only: g = H(sk, y_{i-1}, y_i) instead of H(H(sk, y_{i-1}), y_i).
  bool fused = true;

  static WatermarkParams defaults(Scheme scheme);

  // Throws InvalidParams, OddContextWidth, VocabTooSmall or FusionUnavailable.
  void validate() const;

  // floor(gamma * p), exact for the binary value of gamma.
  FieldElement green_threshold() const;
  // Threshold actually used by the scheme: floor(gamma p) or floor(p / 2).
  FieldElement threshold() const;
  unsigned hypotheses() const { return 1u << m_hat; }
};

// floor(p / 2)
FieldElement half_field_threshold();
// floor(x * p) for x in [0, 1).
FieldElement fraction_of_modulus(double x);

struct SecretKey {
  FieldElement sk;
  FieldElement s_h;  // accumulator blind for recursive proofs

  static SecretKey generate();
  // Reproducible keys for tests and seeded CLI runs.
  static SecretKey from_seed(uint64_t seed);
};

// Public commitment Υ = Poseidon(sk, 0).
FieldElement setup_commit(const FieldElement& sk);

class LogitsSource {
 public:
  virtual ~LogitsSource() = default;
  virtual uint64_t vocab_size() const = 0;
  virtual void next_logits(std::span<const uint32_t> context,
                           std::span<double> out) const = 0;
};

// Deterministic pseudorandom logits keyed on (seed, last two context tokens),
// uniform in [-spread, spread].  spread = 0 gives a uniform distribution.
class MockLm final : public LogitsSource {
 public:
  MockLm(uint64_t vocab_size, uint64_t seed, double spread = 4.0);
  uint64_t vocab_size() const override { return vocab_; }
  void next_logits(std::span<const uint32_t> context,
                   std::span<double> out) const override;

 private:
  uint64_t vocab_;
  uint64_t seed_;
  double spread_;
};

// Seed derivation from the psi context tokens: psi = 1 gives H(sk, c_0);
// otherwise pairs are absorbed with three-to-one hashes,
// H_1 = H(sk, c_0, c_1), H_k = H(H_{k-1}, c_{2k-2}, c_{2k-1}), and a trailing
// odd token with a two-to-one hash.
FieldElement context_seed(HashKind kind, const FieldElement& sk,
                          std::span<const uint32_t> context);

// Every embed_* returns the prompt followed by n generated tokens.
TokenSeq generate_plain(const TokenSeq& prompt, size_t n, const LogitsSource& lm,
                        uint64_t rng_seed);
TokenSeq embed_kgw(const TokenSeq& prompt, size_t n, const WatermarkParams& params,
                   const SecretKey& key, const LogitsSource& lm, uint64_t rng_seed);
TokenSeq embed_synthid(const TokenSeq& prompt, size_t n,
                       const WatermarkParams& params, const SecretKey& key,
                       const LogitsSource& lm, uint64_t rng_seed);
TokenSeq embed_segment(const TokenSeq& prompt, size_t n,
                       const WatermarkParams& params, const SecretKey& key,
                       const LogitsSource& lm, uint64_t rng_seed,
                       std::span<const uint32_t> msg, const TokenPositionMap& map);

struct DetectionReport {
  Scheme scheme = Scheme::kKgw;
  uint64_t n_scored = 0;
  uint64_t green_count = 0;                  // KGW
  uint64_t s_g = 0;                          // SynthID
  std::vector<std::vector<uint64_t>> count;  // Segment: n_hat x 2^m_hat
  std::vector<uint32_t> decoded_msg;         // Segment
  double score = 0;

  bool operator==(const DetectionReport&) const = default;
};

// z = (|y|_G - gamma n) / sqrt(n gamma (1 - gamma)).
double kgw_z_score(uint64_t green, uint64_t n, double gamma);

DetectionReport detect_kgw(const TokenSeq& tokens, const WatermarkParams& params,
                           const SecretKey& key);
DetectionReport detect_synthid(const TokenSeq& tokens, const WatermarkParams& params,
                               const SecretKey& key);
// decoded_msg[p] = argmax_j count[p][j], ties to the smallest j.  score is
// the z-statistic of the decoded cells' total against gamma.
DetectionReport detect_segment(const TokenSeq& tokens, const WatermarkParams& params,
                               const SecretKey& key, const TokenPositionMap& map);
DetectionReport detect(const TokenSeq& tokens, const WatermarkParams& params,
                       const SecretKey& key, const TokenPositionMap* map = nullptr);

}  // namespace pvmark
