#include "pvmark/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "pvmark/error.hpp"
#include "pvmark/rng.hpp"

namespace pvmark {
namespace {

void require_tokens_in_vocab(std::span<const uint32_t> tokens, uint64_t vocab) {
  for (uint32_t t : tokens) {
    if (t >= vocab) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "token " + std::to_string(t) + " outside vocabulary of " +
                      std::to_string(vocab));
    }
  }
}

void require_prompt(const TokenSeq& prompt, const WatermarkParams& params,
                    const LogitsSource& lm) {
  if (prompt.size() < params.psi) {
    throw Error(ErrorCode::kPromptTooShort,
                "prompt has " + std::to_string(prompt.size()) +
                    " tokens, context width is " + std::to_string(params.psi));
  }
  if (lm.vocab_size() != params.vocab_size) {
    throw Error(ErrorCode::kInvalidParams, "language model vocabulary differs from params");
  }
  require_tokens_in_vocab(prompt, params.vocab_size);
}

void require_scheme(const WatermarkParams& params, Scheme s) {
  if (params.scheme != s) {
    throw Error(ErrorCode::kInvalidParams,
                "params are for " + std::string(scheme_name(params.scheme)) +
                    ", expected " + std::string(scheme_name(s)));
  }
}

// Cumulative softmax, for repeated sampling from one distribution.
class Categorical {
 public:
  explicit Categorical(std::span<const double> logits) : cdf_(logits.size()) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    double acc = 0;
    for (size_t i = 0; i < logits.size(); ++i) {
      acc += std::exp(logits[i] - mx);
      cdf_[i] = acc;
    }
  }

  template <class Rng>
  uint32_t sample(Rng& rng) const {
    const double u = uniform01(rng) * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<uint32_t>(
        std::min<size_t>(static_cast<size_t>(it - cdf_.begin()), cdf_.size() - 1));
  }

 private:
  std::vector<double> cdf_;
};

// Samples from p(v) e^{delta [green(v)]} / Z by proposing from p and
// accepting red tokens with probability e^{-delta}; one hash per proposal.
template <class Rng, class Green>
uint32_t sample_biased(const Categorical& dist, double delta, Rng& rng, Green&& green) {
  const double accept_red = std::exp(-delta);
  for (;;) {
    const uint32_t v = dist.sample(rng);
    if (delta == 0 || green(v)) return v;
    if (uniform01(rng) < accept_red) return v;
  }
}

// Seeds for every scored position i in [psi, n), batched level by level.
std::vector<FieldElement> context_seeds(HashKind kind, const FieldElement& sk,
                                        std::span<const uint32_t> tokens,
                                        unsigned psi) {
  const size_t n = tokens.size();
  const size_t m = n - psi;
  std::vector<FieldElement> h(m, sk);
  std::vector<FieldElement> rows;
  for (unsigned k = 0; k + 1 < psi; k += 2) {
    rows.clear();
    for (size_t i = psi; i < n; ++i) {
      rows.push_back(h[i - psi]);
      rows.emplace_back(tokens[i - psi + k]);
      rows.emplace_back(tokens[i - psi + k + 1]);
    }
    hash_batch(kind, 3, rows, h);
  }
  if (psi % 2 == 1) {
    rows.clear();
    for (size_t i = psi; i < n; ++i) {
      rows.push_back(h[i - psi]);
      rows.emplace_back(tokens[i - 1]);
    }
    hash_batch(kind, 2, rows, h);
  }
  return h;
}

void require_text(const TokenSeq& tokens, const WatermarkParams& params) {
  if (tokens.size() <= params.psi) {
    throw Error(ErrorCode::kTextTooShort,
                "text has " + std::to_string(tokens.size()) +
                    " tokens; nothing to score after a context of " +
                    std::to_string(params.psi));
  }
  require_tokens_in_vocab(tokens, params.vocab_size);
}

}  // namespace

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kKgw: return "kgw";
    case Scheme::kSynthId: return "synthid";
    case Scheme::kSegment: return "segment";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "kgw") return Scheme::kKgw;
  if (name == "synthid") return Scheme::kSynthId;
  if (name == "segment") return Scheme::kSegment;
  throw Error(ErrorCode::kParseError, "unknown scheme '" + std::string(name) + "'");
}

WatermarkParams WatermarkParams::defaults(Scheme scheme) {
  WatermarkParams p;
  p.scheme = scheme;
  if (scheme == Scheme::kSynthId) p.psi = 4;
  return p;
}

void WatermarkParams::validate() const {
  if (!(gamma > 0 && gamma < 1)) {
    throw Error(ErrorCode::kInvalidParams, "gamma must lie in (0, 1)");
  }
  if (psi < 1) throw Error(ErrorCode::kInvalidParams, "psi must be at least 1");
  if (vocab_size < 2 || vocab_size > (uint64_t{1} << 32)) {
    throw Error(ErrorCode::kVocabTooSmall, "vocabulary size out of range");
  }
  if (gamma * static_cast<double>(vocab_size) < 1) {
    throw Error(ErrorCode::kInvalidParams, "gamma * vocab_size must be at least 1");
  }
  if (!(delta >= 0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kInvalidParams, "delta must be finite and non-negative");
  }
  switch (scheme) {
    case Scheme::kKgw:
      if (fused && psi != 1) {
        throw Error(ErrorCode::kFusionUnavailable,
                    "three-to-one fusion needs a context of exactly one token");
      }
      break;
    case Scheme::kSynthId:
      if (psi % 2 != 0) {
        throw Error(ErrorCode::kOddContextWidth,
                    "SynthID seeds absorb context tokens in pairs; psi must be even");
      }
      if (xi < 1 || tourney_depth < 1 || tourney_depth > 20) {
        throw Error(ErrorCode::kInvalidParams, "xi and tournament depth must be positive");
      }
      if ((uint64_t{1} << tourney_depth) > vocab_size) {
        throw Error(ErrorCode::kVocabTooSmall, "2^depth candidates exceed the vocabulary");
      }
      break;
    case Scheme::kSegment:
      if (psi != 1) {
        throw Error(ErrorCode::kInvalidParams,
                    "the position map is indexed by a single context token; psi must be 1");
      }
      if (n_hat < 1 || m_hat < 1 || m_hat > 16) {
        throw Error(ErrorCode::kInvalidParams, "need n_hat >= 1 and 1 <= m_hat <= 16");
      }
      break;
  }
}

FieldElement fraction_of_modulus(double x) {
  if (!(x >= 0 && x < 1)) {
    throw Error(ErrorCode::kInvalidParams, "fraction must lie in [0, 1)");
  }
  if (x == 0) return FieldElement();
  int e = 0;
  const double f = std::frexp(x, &e);  // x = f 2^e, f in [0.5, 1)
  const auto m = static_cast<uint64_t>(std::ldexp(f, 53));
  const int shift = 53 - e;
  if (shift >= 320) return FieldElement();
  return FieldElement::from_u256(
      mul_u64_shr(FieldElement::modulus(), m, static_cast<unsigned>(shift)));
}

FieldElement half_field_threshold() {
  static const FieldElement kHalf = FieldElement::from_u256(FieldElement::modulus().shr(1));
  return kHalf;
}

FieldElement WatermarkParams::green_threshold() const {
  return fraction_of_modulus(gamma);
}

FieldElement WatermarkParams::threshold() const {
  return scheme == Scheme::kSynthId ? half_field_threshold() : green_threshold();
}

SecretKey SecretKey::generate() {
  SecretKey k;
  do {
    k.sk = secure_random_field_element();
  } while (k.sk.is_zero());
  k.s_h = secure_random_field_element();
  return k;
}

SecretKey SecretKey::from_seed(uint64_t seed) {
  auto rng = derived_rng(seed, 0x736b);
  SecretKey k;
  k.sk = random_nonzero_field_element(rng);
  k.s_h = random_field_element(rng);
  return k;
}

FieldElement setup_commit(const FieldElement& sk) {
  if (sk.is_zero()) throw Error(ErrorCode::kInvalidParams, "secret key must be nonzero");
  return hash2(HashKind::kPoseidon, sk, FieldElement());
}

MockLm::MockLm(uint64_t vocab_size, uint64_t seed, double spread)
    : vocab_(vocab_size), seed_(seed), spread_(spread) {
  if (vocab_size < 2) throw Error(ErrorCode::kVocabTooSmall, "mock vocabulary");
  if (!(spread >= 0)) throw Error(ErrorCode::kInvalidParams, "negative spread");
}

void MockLm::next_logits(std::span<const uint32_t> context,
                         std::span<double> out) const {
  if (out.size() != vocab_) throw Error(ErrorCode::kShapeMismatch, "logits buffer");
  uint64_t key = splitmix64(seed_);
  const size_t n = context.size();
  key = splitmix64(key ^ (n >= 1 ? context[n - 1] + 1ull : 0));
  key = splitmix64(key ^ ((n >= 2 ? context[n - 2] + 1ull : 0) << 32));
  for (uint64_t v = 0; v < vocab_; ++v) {
    const uint64_t r = splitmix64(key + v * 0x9e3779b97f4a7c15ull);
    const double u = static_cast<double>(r >> 11) * 0x1.0p-53;
    out[v] = spread_ * (2 * u - 1);
  }
}

FieldElement context_seed(HashKind kind, const FieldElement& sk,
                          std::span<const uint32_t> context) {
  if (context.empty()) throw Error(ErrorCode::kPromptTooShort, "empty context");
  FieldElement h = sk;
  size_t i = 0;
  for (; i + 1 < context.size(); i += 2) {
    h = hash3(kind, h, FieldElement(context[i]), FieldElement(context[i + 1]));
  }
  if (i < context.size()) h = hash2(kind, h, FieldElement(context[i]));
  return h;
}

TokenSeq generate_plain(const TokenSeq& prompt, size_t n, const LogitsSource& lm,
                        uint64_t rng_seed) {
  require_tokens_in_vocab(prompt, lm.vocab_size());
  auto rng = derived_rng(rng_seed, 0);
  TokenSeq seq = prompt;
  std::vector<double> logits(lm.vocab_size());
  for (size_t step = 0; step < n; ++step) {
    lm.next_logits(seq, logits);
    seq.push_back(Categorical(logits).sample(rng));
  }
  return seq;
}

TokenSeq embed_kgw(const TokenSeq& prompt, size_t n, const WatermarkParams& params,
                   const SecretKey& key, const LogitsSource& lm, uint64_t rng_seed) {
  require_scheme(params, Scheme::kKgw);
  params.validate();
  require_prompt(prompt, params, lm);
  const FieldElement thr = params.green_threshold();
  auto rng = derived_rng(rng_seed, 0);
  TokenSeq seq = prompt;
  std::vector<double> logits(lm.vocab_size());
  for (size_t step = 0; step < n; ++step) {
    lm.next_logits(seq, logits);
    const Categorical dist(logits);
    const std::span<const uint32_t> ctx(seq.data() + seq.size() - params.psi, params.psi);
    const FieldElement prev(seq.back());
    const FieldElement sd = params.fused ? FieldElement() : context_seed(params.hash, key.sk, ctx);
    const uint32_t v = sample_biased(dist, params.delta, rng, [&](uint32_t y) {
      const FieldElement g = params.fused ? hash3(params.hash, key.sk, prev, FieldElement(y))
                                          : hash2(params.hash, sd, FieldElement(y));
      return g < thr;
    });
    seq.push_back(v);
  }
  return seq;
}

TokenSeq embed_segment(const TokenSeq& prompt, size_t n,
                       const WatermarkParams& params, const SecretKey& key,
                       const LogitsSource& lm, uint64_t rng_seed,
                       std::span<const uint32_t> msg, const TokenPositionMap& map) {
  require_scheme(params, Scheme::kSegment);
  params.validate();
  require_prompt(prompt, params, lm);
  if (msg.size() != params.n_hat) {
    throw Error(ErrorCode::kMsgShapeMismatch,
                "message has " + std::to_string(msg.size()) + " digits, expected " +
                    std::to_string(params.n_hat));
  }
  for (uint32_t d : msg) {
    if (d >= params.hypotheses()) {
      throw Error(ErrorCode::kMsgShapeMismatch, "message digit exceeds 2^m_hat - 1");
    }
  }
  if (map.vocab_size() != params.vocab_size || map.n_hat != params.n_hat) {
    throw Error(ErrorCode::kMsgShapeMismatch, "position map does not match params");
  }
  const FieldElement thr = params.green_threshold();
  auto rng = derived_rng(rng_seed, 0);
  TokenSeq seq = prompt;
  std::vector<double> logits(lm.vocab_size());
  for (size_t step = 0; step < n; ++step) {
    lm.next_logits(seq, logits);
    const Categorical dist(logits);
    const uint32_t prev = seq.back();
    const FieldElement sd =
        hash3(params.hash, key.sk, FieldElement(prev), FieldElement(msg[map[prev]]));
    const uint32_t v = sample_biased(dist, params.delta, rng, [&](uint32_t y) {
      return hash2(params.hash, sd, FieldElement(y)) < thr;
    });
    seq.push_back(v);
  }
  return seq;
}

TokenSeq embed_synthid(const TokenSeq& prompt, size_t n,
                       const WatermarkParams& params, const SecretKey& key,
                       const LogitsSource& lm, uint64_t rng_seed) {
  require_scheme(params, Scheme::kSynthId);
  params.validate();
  require_prompt(prompt, params, lm);
  const FieldElement half = half_field_threshold();
  const unsigned depth = params.tourney_depth;
  const size_t k_cand = size_t{1} << depth;
  auto rng = derived_rng(rng_seed, 0);
  TokenSeq seq = prompt;
  std::vector<double> logits(lm.vocab_size());
  std::vector<uint32_t> order(lm.vocab_size());
  for (size_t step = 0; step < n; ++step) {
    lm.next_logits(seq, logits);
    // Top-K support, ties broken toward the smaller token index.
    std::iota(order.begin(), order.end(), 0u);
    auto better = [&](uint32_t a, uint32_t b) {
      return logits[a] != logits[b] ? logits[a] > logits[b] : a < b;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<ptrdiff_t>(k_cand),
                      order.end(), better);
    std::vector<double> top(k_cand);
    for (size_t j = 0; j < k_cand; ++j) top[j] = logits[order[j]];
    const Categorical dist(top);
    std::vector<uint32_t> cur(k_cand);
    for (auto& c : cur) c = order[dist.sample(rng)];

    const std::span<const uint32_t> ctx(seq.data() + seq.size() - params.psi, params.psi);
    const FieldElement sd = context_seed(params.hash, key.sk, ctx);
    std::unordered_map<uint64_t, bool> memo;
    auto g = [&](uint32_t y, unsigned level) {
      const uint64_t key_id = (uint64_t{y} << 8) | level;
      const auto it = memo.find(key_id);
      if (it != memo.end()) return it->second;
      const bool v = hash3(params.hash, sd, FieldElement(y), FieldElement(level)) < half;
      memo.emplace(key_id, v);
      return v;
    };
    for (unsigned level = 1; level <= depth; ++level) {
      std::vector<uint32_t> next(cur.size() / 2);
      for (size_t j = 0; j < next.size(); ++j) {
        const uint32_t a = cur[2 * j], b = cur[2 * j + 1];
        const bool ga = g(a, level), gb = g(b, level);
        if (ga != gb) {
          next[j] = ga ? a : b;
        } else {
          next[j] = (rng() & 1) ? b : a;
        }
      }
      cur.swap(next);
    }
    seq.push_back(cur[0]);
  }
  return seq;
}

double kgw_z_score(uint64_t green, uint64_t n, double gamma) {
  if (n == 0) return 0;
  const double nn = static_cast<double>(n);
  return (static_cast<double>(green) - gamma * nn) / std::sqrt(nn * gamma * (1 - gamma));
}

DetectionReport detect_kgw(const TokenSeq& tokens, const WatermarkParams& params,
                           const SecretKey& key) {
  require_scheme(params, Scheme::kKgw);
  params.validate();
  require_text(tokens, params);
  const size_t n = tokens.size(), psi = params.psi;
  const FieldElement thr = params.green_threshold();
  std::vector<FieldElement> g(n - psi), rows;
  if (params.fused) {
    for (size_t i = psi; i < n; ++i) {
      rows.push_back(key.sk);
      rows.emplace_back(tokens[i - 1]);
      rows.emplace_back(tokens[i]);
    }
    hash_batch(params.hash, 3, rows, g);
  } else {
    const auto sd = context_seeds(params.hash, key.sk, tokens, params.psi);
    for (size_t i = psi; i < n; ++i) {
      rows.push_back(sd[i - psi]);
      rows.emplace_back(tokens[i]);
    }
    hash_batch(params.hash, 2, rows, g);
  }
  DetectionReport r;
  r.scheme = Scheme::kKgw;
  r.n_scored = n - psi;
  for (const FieldElement& v : g) r.green_count += v < thr ? 1 : 0;
  r.score = kgw_z_score(r.green_count, r.n_scored, params.gamma);
  return r;
}

DetectionReport detect_synthid(const TokenSeq& tokens, const WatermarkParams& params,
                               const SecretKey& key) {
  require_scheme(params, Scheme::kSynthId);
  params.validate();
  require_text(tokens, params);
  const size_t n = tokens.size(), psi = params.psi;
  const auto sd = context_seeds(params.hash, key.sk, tokens, params.psi);
  const FieldElement half = half_field_threshold();
  std::vector<FieldElement> rows;
  rows.reserve((n - psi) * params.xi * 3);
  for (size_t i = psi; i < n; ++i) {
    for (unsigned k = 1; k <= params.xi; ++k) {
      rows.push_back(sd[i - psi]);
      rows.emplace_back(tokens[i]);
      rows.emplace_back(k);
    }
  }
  std::vector<FieldElement> g(rows.size() / 3);
  hash_batch(params.hash, 3, rows, g);
  DetectionReport r;
  r.scheme = Scheme::kSynthId;
  r.n_scored = n - psi;
  for (const FieldElement& v : g) r.s_g += v < half ? 1 : 0;
  r.score = static_cast<double>(r.s_g) /
            (static_cast<double>(r.n_scored) * params.xi);
  return r;
}

DetectionReport detect_segment(const TokenSeq& tokens, const WatermarkParams& params,
                               const SecretKey& key, const TokenPositionMap& map) {
  require_scheme(params, Scheme::kSegment);
  params.validate();
  require_text(tokens, params);
  if (map.vocab_size() != params.vocab_size || map.n_hat != params.n_hat) {
    throw Error(ErrorCode::kMsgShapeMismatch, "position map does not match params");
  }
  const size_t n = tokens.size();
  const unsigned hyps = params.hypotheses();
  const FieldElement thr = params.green_threshold();
  std::vector<FieldElement> rows;
  rows.reserve((n - 1) * hyps * 3);
  for (size_t i = 1; i < n; ++i) {
    for (unsigned j = 0; j < hyps; ++j) {
      rows.push_back(key.sk);
      rows.emplace_back(tokens[i - 1]);
      rows.emplace_back(j);
    }
  }
  std::vector<FieldElement> sd(rows.size() / 3);
  hash_batch(params.hash, 3, rows, sd);
  rows.clear();
  for (size_t i = 1; i < n; ++i) {
    for (unsigned j = 0; j < hyps; ++j) {
      rows.push_back(sd[(i - 1) * hyps + j]);
      rows.emplace_back(tokens[i]);
    }
  }
  std::vector<FieldElement> g(sd.size());
  hash_batch(params.hash, 2, rows, g);

  DetectionReport r;
  r.scheme = Scheme::kSegment;
  r.n_scored = n - 1;
  r.count.assign(params.n_hat, std::vector<uint64_t>(hyps, 0));
  for (size_t i = 1; i < n; ++i) {
    const uint32_t pos = map[tokens[i - 1]];
    for (unsigned j = 0; j < hyps; ++j) {
      if (g[(i - 1) * hyps + j] < thr) ++r.count[pos][j];
    }
  }
  uint64_t total = 0;
  r.decoded_msg.resize(params.n_hat);
  for (unsigned p = 0; p < params.n_hat; ++p) {
    const auto& row = r.count[p];
    const auto best = std::max_element(row.begin(), row.end());  // first maximum
    r.decoded_msg[p] = static_cast<uint32_t>(best - row.begin());
    total += *best;
  }
  r.score = kgw_z_score(total, r.n_scored, params.gamma);
  return r;
}

DetectionReport detect(const TokenSeq& tokens, const WatermarkParams& params,
                       const SecretKey& key, const TokenPositionMap* map) {
  switch (params.scheme) {
    case Scheme::kKgw: return detect_kgw(tokens, params, key);
    case Scheme::kSynthId: return detect_synthid(tokens, params, key);
    case Scheme::kSegment:
      if (map == nullptr) {
        throw Error(ErrorCode::kInvalidParams, "segment detection needs the position map");
      }
      return detect_segment(tokens, params, key, *map);
  }
  throw Error(ErrorCode::kInvalidParams, "unknown scheme");
}

}  // namespace pvmark
