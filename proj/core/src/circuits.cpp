#include "pvmark/circuits.hpp"

#include <string>

#include "pvmark/error.hpp"
#include "pvmark/json_io.hpp"

namespace pvmark {

using nlohmann::json;

void validate_statement(const DetectionStatement& s) {
  if (s.tokens.size() <= s.psi) {
    throw Error(ErrorCode::kTextTooShort, "statement needs more than psi tokens");
  }
  if (s.psi == 0) throw Error(ErrorCode::kInvalidParams, "psi must be positive");
  if (s.threshold.is_zero()) throw Error(ErrorCode::kInvalidParams, "threshold must be positive");
  switch (s.scheme) {
    case Scheme::kKgw:
      if (s.fused && s.psi != 1) {
        throw Error(ErrorCode::kFusionUnavailable, "three-to-one fusion needs psi = 1");
      }
      break;
    case Scheme::kSynthId:
      if (s.psi % 2 != 0) throw Error(ErrorCode::kOddContextWidth, "SynthID needs an even psi");
      if (s.xi == 0) throw Error(ErrorCode::kInvalidParams, "xi must be positive");
      break;
    case Scheme::kSegment:
      if (s.psi != 1) throw Error(ErrorCode::kInvalidParams, "Segment uses psi = 1");
      if (s.n_hat == 0 || s.m_hat == 0 || s.m_hat > 16) {
        throw Error(ErrorCode::kInvalidParams, "Segment needs n_hat >= 1 and 1 <= m_hat <= 16");
      }
      if (s.count_matrix.size() != s.n_hat) {
        throw Error(ErrorCode::kMsgShapeMismatch, "COUNT must have n_hat rows");
      }
      for (const auto& row : s.count_matrix) {
        if (row.size() != (1u << s.m_hat)) {
          throw Error(ErrorCode::kMsgShapeMismatch, "COUNT rows must have 2^m_hat cells");
        }
      }
      if (s.vocab_size == 0) throw Error(ErrorCode::kInvalidParams, "vocab_size must be positive");
      break;
  }
}

namespace {

std::vector<LC> public_prelude(Builder& b, const DetectionStatement& s) {
  b.section("tokens");
  std::vector<LC> toks;
  toks.reserve(s.tokens.size());
  for (uint32_t t : s.tokens) toks.emplace_back(b.input(FieldElement(t)));
  b.section("psi");
  b.assert_equal(b.input(FieldElement(s.psi)), FieldElement(s.psi));
  b.section("threshold");
  b.assert_equal(b.input(s.threshold), s.threshold);
  return toks;
}

CircuitBundle finish(Builder& b) {
  CircuitBundle out;
  if (b.recording()) out.cs = b.constraint_system();
  out.layout = b.layout();
  out.assignment = b.assignment();
  out.rows = b.num_rows();
  return out;
}

Builder make_builder(const CircuitOptions& opts) {
  Builder b(opts.record);
  b.flag_hook = opts.flag_hook;
  return b;
}

json layout_list(const std::vector<LayoutEntry>& entries) {
  json a = json::array();
  for (const auto& e : entries) a.push_back({{"name", e.name}, {"begin", e.begin}, {"count", e.count}});
  return a;
}

CircuitBundle build_segment_impl(const DetectionStatement& s, const SecretKey& key,
                                 const SegmentOpenings* openings, const CircuitOptions& opts) {
  validate_statement(s);
  Builder b = make_builder(opts);
  const auto toks = public_prelude(b, s);
  b.section("root");
  const Var root = b.input(s.root);
  b.section("count_matrix");
  const unsigned hyps = 1u << s.m_hat;
  std::vector<std::vector<Var>> claimed(s.n_hat);
  for (unsigned p = 0; p < s.n_hat; ++p) {
    for (unsigned j = 0; j < hyps; ++j) claimed[p].push_back(b.input(FieldElement(s.count_matrix[p][j])));
  }
  b.section("upsilon");
  const Var upsilon = b.input(s.upsilon);
  b.section("sk");
  const Var sk = b.witness(key.sk);
  circuit_parts::bind_commitment(b, sk, upsilon);

  const unsigned depth = merkle_depth(s.vocab_size);
  SegmentOpening placeholder;
  placeholder.path.siblings.assign(depth, FieldElement());
  placeholder.path.path_bits.assign(depth, 0);

  std::vector<std::vector<LC>> cells(s.n_hat, std::vector<LC>(hyps));
  for (size_t i = 1; i < s.tokens.size(); ++i) {
    const SegmentOpening* op = &placeholder;
    if (openings != nullptr) {
      const auto it = openings->find(s.tokens[i - 1]);
      if (it == openings->end()) {
        throw Error(ErrorCode::kMissingOpening,
                    "no Merkle opening for token " + std::to_string(s.tokens[i - 1]));
      }
      op = &it->second;
      if (op->path.siblings.size() != depth) {
        throw Error(ErrorCode::kShapeMismatch, "opening depth does not match the vocabulary");
      }
    }
    b.section("position");
    std::vector<Var> e(s.n_hat);
    LC total, pos;
    for (unsigned p = 0; p < s.n_hat; ++p) {
      e[p] = b.witness(FieldElement(op->position == p ? 1 : 0));
      b.assert_boolean(e[p]);
      total += e[p];
      pos.add(e[p], FieldElement(p));
    }
    b.assert_equal(total, FieldElement::one());
    b.section("membership");
    merkle_gadget(b, s.hash, toks[i - 1], pos, sk, op->path, root);
    const auto flags = circuit_parts::segment_flags(b, s, sk, toks[i - 1], toks[i], opts.range);
    b.section("count");
    for (unsigned p = 0; p < s.n_hat; ++p) {
      for (unsigned j = 0; j < hyps; ++j) cells[p][j] += b.mul(e[p], flags[j]);
    }
  }
  b.section("count");
  for (unsigned p = 0; p < s.n_hat; ++p) {
    for (unsigned j = 0; j < hyps; ++j) b.assert_equal(cells[p][j], claimed[p][j]);
  }
  return finish(b);
}

}  // namespace

// ------------------------------------------------------------ statement

DetectionStatement DetectionStatement::from_report(const WatermarkParams& params,
                                                   const TokenSeq& tokens,
                                                   const DetectionReport& report,
                                                   const FieldElement& upsilon,
                                                   const FieldElement& root) {
  DetectionStatement s;
  s.scheme = params.scheme;
  s.hash = params.hash;
  s.tokens = tokens;
  s.psi = params.psi;
  s.threshold = params.threshold();
  s.fused = params.scheme == Scheme::kKgw && params.fused;
  s.xi = params.scheme == Scheme::kSynthId ? params.xi : 0;
  if (params.scheme == Scheme::kSegment) {
    s.n_hat = params.n_hat;
    s.m_hat = params.m_hat;
    s.count_matrix = report.count;
    s.root = root;
  }
  s.vocab_size = params.vocab_size;
  s.claimed_count = params.scheme == Scheme::kSynthId ? report.s_g : report.green_count;
  s.upsilon = upsilon;
  return s;
}

json to_json(const DetectionStatement& s) {
  json count = json::array();
  for (const auto& row : s.count_matrix) count.push_back(row);
  return {{"format", kFormatTag},
          {"scheme", scheme_name(s.scheme)},
          {"hash", hash_kind_name(s.hash)},
          {"tokens", s.tokens},
          {"psi", s.psi},
          {"threshold", fe_to_json(s.threshold)},
          {"fused", s.fused},
          {"xi", s.xi},
          {"n_hat", s.n_hat},
          {"m_hat", s.m_hat},
          {"vocab_size", s.vocab_size},
          {"claimed_count", s.claimed_count},
          {"count_matrix", std::move(count)},
          {"root", fe_to_json(s.root)},
          {"upsilon", fe_to_json(s.upsilon)}};
}

DetectionStatement statement_from_json(const json& j) {
  require_format(j);
  DetectionStatement s;
  s.scheme = parse_scheme(require_string(j, "scheme"));
  s.hash = parse_hash_kind(require_string(j, "hash"));
  for (uint64_t t : require_u64_array(j, "tokens")) {
    if (t > UINT32_MAX) throw Error(ErrorCode::kParseError, "token out of range");
    s.tokens.push_back(static_cast<uint32_t>(t));
  }
  s.psi = static_cast<unsigned>(require_u64(j, "psi"));
  s.threshold = fe_from_json(require(j, "threshold"));
  s.fused = require_bool(j, "fused");
  s.xi = static_cast<unsigned>(require_u64(j, "xi"));
  s.n_hat = static_cast<unsigned>(require_u64(j, "n_hat"));
  s.m_hat = static_cast<unsigned>(require_u64(j, "m_hat"));
  s.vocab_size = require_u64(j, "vocab_size");
  s.claimed_count = require_u64(j, "claimed_count");
  const json& count = require(j, "count_matrix");
  if (!count.is_array()) throw Error(ErrorCode::kParseError, "count_matrix must be an array");
  for (const json& row : count) s.count_matrix.push_back(require_u64_array(json{{"row", row}}, "row"));
  s.root = fe_from_json(require(j, "root"));
  s.upsilon = fe_from_json(require(j, "upsilon"));
  return s;
}

unsigned merkle_depth(uint64_t vocab_size) {
  unsigned d = 0;
  while ((uint64_t{1} << d) < vocab_size) ++d;
  return d;
}

SegmentOpenings segment_openings(const MerkleTree& tree, const TokenPositionMap& map,
                                 const TokenSeq& tokens) {
  SegmentOpenings out;
  for (size_t i = 0; i + 1 < tokens.size(); ++i) {
    const uint32_t y = tokens[i];
    if (out.count(y) == 0) out.emplace(y, SegmentOpening{map[y], tree.open(y)});
  }
  return out;
}

json to_json(const Layout& layout) {
  return {{"public", layout_list(layout.pub)}, {"witness", layout_list(layout.wit)}};
}

// ------------------------------------------------------------ parts

namespace circuit_parts {

LC context_seed(Builder& b, HashKind kind, const LC& sk, std::span<const LC> context) {
  if (context.empty()) throw Error(ErrorCode::kPromptTooShort, "empty context");
  LC h = sk;
  size_t i = 0;
  for (; i + 1 < context.size(); i += 2) h = hash3_gadget(b, kind, h, context[i], context[i + 1]);
  if (i < context.size()) h = hash2_gadget(b, kind, h, context[i]);
  return h;
}

LC kgw_flag(Builder& b, const DetectionStatement& s, const LC& sk, std::span<const LC> context,
            const LC& token, RangeMode range) {
  b.section("hash");
  const LC g = s.fused ? hash3_gadget(b, s.hash, sk, context.back(), token)
                       : hash2_gadget(b, s.hash, context_seed(b, s.hash, sk, context), token);
  b.section("flag");
  return threshold_flag(b, g, s.threshold, range);
}

std::vector<LC> synthid_flags(Builder& b, const DetectionStatement& s, const LC& sk,
                              std::span<const LC> context, const LC& token, RangeMode range) {
  b.section("hash");
  const LC seed = context_seed(b, s.hash, sk, context);
  std::vector<LC> flags;
  flags.reserve(s.xi);
  for (unsigned k = 1; k <= s.xi; ++k) {
    b.section("hash");
    const LC g = hash3_gadget(b, s.hash, seed, token, FieldElement(k));
    b.section("flag");
    flags.push_back(threshold_flag(b, g, s.threshold, range));
  }
  return flags;
}

std::vector<LC> segment_flags(Builder& b, const DetectionStatement& s, const LC& sk,
                              const LC& prev, const LC& token, RangeMode range) {
  const unsigned hyps = 1u << s.m_hat;
  std::vector<LC> flags;
  flags.reserve(hyps);
  for (unsigned j = 0; j < hyps; ++j) {
    b.section("hash");
    const LC seed = hash3_gadget(b, s.hash, sk, prev, FieldElement(j));
    const LC g = hash2_gadget(b, s.hash, seed, token);
    b.section("flag");
    flags.push_back(threshold_flag(b, g, s.threshold, range));
  }
  return flags;
}

void bind_commitment(Builder& b, const LC& sk, const LC& upsilon) {
  b.section("commitment");
  b.assert_equal(hash2_gadget(b, HashKind::kPoseidon, sk, LC()), upsilon);
}

}  // namespace circuit_parts

// ------------------------------------------------------------ builders

CircuitBundle build_kgw_circuit(const DetectionStatement& s, const SecretKey& key,
                                const CircuitOptions& opts) {
  if (s.scheme != Scheme::kKgw) throw Error(ErrorCode::kInvalidParams, "statement is not KGW");
  validate_statement(s);
  Builder b = make_builder(opts);
  const auto toks = public_prelude(b, s);
  b.section("count");
  const Var count = b.input(FieldElement(s.claimed_count));
  b.section("upsilon");
  const Var upsilon = b.input(s.upsilon);
  b.section("sk");
  const Var sk = b.witness(key.sk);
  circuit_parts::bind_commitment(b, sk, upsilon);
  std::vector<LC> flags;
  flags.reserve(s.scored_tokens());
  for (size_t i = s.psi; i < s.tokens.size(); ++i) {
    const std::span<const LC> ctx(toks.data() + i - s.psi, s.psi);
    flags.push_back(circuit_parts::kgw_flag(b, s, sk, ctx, toks[i], opts.range));
  }
  b.section("sum");
  b.assert_equal(sum_gadget(b, flags), count);
  return finish(b);
}

CircuitBundle build_synthid_circuit(const DetectionStatement& s, const SecretKey& key,
                                    const CircuitOptions& opts) {
  if (s.scheme != Scheme::kSynthId) {
    throw Error(ErrorCode::kInvalidParams, "statement is not SynthID");
  }
  validate_statement(s);
  Builder b = make_builder(opts);
  const auto toks = public_prelude(b, s);
  b.section("xi");
  b.assert_equal(b.input(FieldElement(s.xi)), FieldElement(s.xi));
  b.section("s_g");
  const Var sg = b.input(FieldElement(s.claimed_count));
  b.section("upsilon");
  const Var upsilon = b.input(s.upsilon);
  b.section("sk");
  const Var sk = b.witness(key.sk);
  circuit_parts::bind_commitment(b, sk, upsilon);
  std::vector<LC> flags;
  flags.reserve(s.scored_tokens() * s.xi);
  for (size_t i = s.psi; i < s.tokens.size(); ++i) {
    const std::span<const LC> ctx(toks.data() + i - s.psi, s.psi);
    for (LC& f : circuit_parts::synthid_flags(b, s, sk, ctx, toks[i], opts.range)) {
      flags.push_back(std::move(f));
    }
  }
  b.section("sum");
  b.assert_equal(sum_gadget(b, flags), sg);
  return finish(b);
}

CircuitBundle build_segment_circuit(const DetectionStatement& s, const SecretKey& key,
                                    const SegmentOpenings& openings, const CircuitOptions& opts) {
  if (s.scheme != Scheme::kSegment) {
    throw Error(ErrorCode::kInvalidParams, "statement is not Segment");
  }
  return build_segment_impl(s, key, &openings, opts);
}

CircuitBundle build_circuit(const DetectionStatement& s, const SecretKey& key,
                            const SegmentOpenings* openings, const CircuitOptions& opts) {
  switch (s.scheme) {
    case Scheme::kKgw: return build_kgw_circuit(s, key, opts);
    case Scheme::kSynthId: return build_synthid_circuit(s, key, opts);
    case Scheme::kSegment:
      if (openings == nullptr) throw Error(ErrorCode::kMissingOpening, "Segment needs openings");
      return build_segment_circuit(s, key, *openings, opts);
  }
  throw Error(ErrorCode::kInvalidParams, "unknown scheme");
}

CircuitBundle verifier_circuit(const DetectionStatement& s, RangeMode range) {
  CircuitOptions opts;
  opts.range = range;
  const SecretKey placeholder{};
  if (s.scheme == Scheme::kSegment) return build_segment_impl(s, placeholder, nullptr, opts);
  return build_circuit(s, placeholder, nullptr, opts);
}

// ------------------------------------------------------------ monolithic

bool prove_and_verify_monolithic(const CircuitBundle& bundle, const Assignment& assignment) {
  check_shape(bundle.cs, assignment);
  return is_satisfied(bundle.cs, assignment).ok;
}

MonolithicProof prove_monolithic(const DetectionStatement& stmt, const SecretKey& key,
                                 const SegmentOpenings* openings, RangeMode range) {
  CircuitOptions opts;
  opts.range = range;
  const auto bundle = build_circuit(stmt, key, openings, opts);
  MonolithicProof p;
  p.statement = stmt;
  p.range = range;
  p.cs_digest = bundle.cs.digest();
  p.publics = bundle.assignment.pub;
  p.witness = bundle.assignment.wit;
  return p;
}

bool verify_monolithic(const MonolithicProof& proof) {
  CircuitBundle v;
  try {
    v = verifier_circuit(proof.statement, proof.range);
  } catch (const Error&) {
    return false;
  }
  if (v.cs.digest() != proof.cs_digest) return false;
  if (proof.publics != v.assignment.pub) return false;
  if (proof.witness.size() != v.cs.num_witness()) return false;
  return is_satisfied(v.cs, {proof.publics, proof.witness}).ok;
}

json to_json(const MonolithicProof& p) {
  return {{"format", kFormatTag},
          {"kind", "monolithic"},
          {"statement", to_json(p.statement)},
          {"range_mode", range_mode_name(p.range)},
          {"cs_digest", digest_to_json(p.cs_digest)},
          {"publics", fe_vector_to_json(p.publics)},
          {"witness", fe_vector_to_json(p.witness)}};
}

MonolithicProof monolithic_proof_from_json(const json& j) {
  require_format(j);
  if (require_string(j, "kind") != "monolithic") {
    throw Error(ErrorCode::kParseError, "not a monolithic proof");
  }
  MonolithicProof p;
  p.statement = statement_from_json(require(j, "statement"));
  p.range = parse_range_mode(require_string(j, "range_mode"));
  p.cs_digest = digest_from_json(require(j, "cs_digest"));
  p.publics = fe_vector_from_json(require(j, "publics"));
  p.witness = fe_vector_from_json(require(j, "witness"));
  return p;
}

}  // namespace pvmark
