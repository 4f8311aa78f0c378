#include "pvmark/folding.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "pvmark/error.hpp"
#include "pvmark/json_io.hpp"
#include "pvmark/parallel.hpp"

namespace pvmark {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

class DigestWriter {
 public:
  explicit DigestWriter(std::string_view tag) { stream_.update(tag); }

  void put(const FieldElement& v) {
    const auto bytes = v.to_bytes();
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    if (buf_.size() >= (1u << 16)) flush();
  }
  void put(std::span<const FieldElement> v) {
    flush();
    stream_.update_u64(v.size());
    for (const auto& x : v) put(x);
  }
  FieldElement finish() {
    flush();
    const auto d = stream_.finish();
    return FieldElement::from_bytes_reduce(d);
  }

 private:
  void flush() {
    if (!buf_.empty()) stream_.update(buf_);
    buf_.clear();
  }

  Sha256Stream stream_;
  std::vector<uint8_t> buf_;
};

uint64_t small_count(const FieldElement& v) {
  const U256 u = v.to_u256();
  if (u.bit_length() > 63) throw Error(ErrorCode::kInvalidParams, "count out of range");
  return u.extract(0, 63);
}

LC acc_gadget(Builder& b, HashKind kind, std::span<const LC> counts, const LC& s_h) {
  LC h = s_h;
  for (const LC& c : counts) h = hash2_gadget(b, kind, c, h);
  return h;
}

void require_size(size_t got, size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::kChunkSizeMismatch, std::string(what) + " has " + std::to_string(got) +
                                                    " entries, expected " + std::to_string(want));
  }
}

SegmentOpening placeholder_opening(uint64_t vocab) {
  SegmentOpening op;
  const unsigned d = merkle_depth(vocab);
  op.path.siblings.assign(d, FieldElement());
  op.path.path_bits.assign(d, 0);
  return op;
}

// Running relaxed instance together with A Z, B Z and C Z.
struct FoldState {
  RelaxedInstance u;
  std::vector<FieldElement> az, bz, cz;
};

struct Products {
  std::vector<FieldElement> az, bz, cz;
};

Products products(const ConstraintSystem& cs, const Assignment& z, const FieldElement& mu) {
  const auto full = full_vector(cs, z, mu);
  return {cs.a().multiply(full), cs.b().multiply(full), cs.c().multiply(full)};
}

std::vector<FieldElement> cross_term(const Products& p1, const FieldElement& mu1,
                                     const Products& p2, const FieldElement& mu2) {
  std::vector<FieldElement> t(p1.az.size());
  for (size_t i = 0; i < t.size(); ++i) {
    t[i] = p1.az[i] * p2.bz[i] + p2.az[i] * p1.bz[i] - mu1 * p2.cz[i] - mu2 * p1.cz[i];
  }
  return t;
}

void axpy(std::vector<FieldElement>& y, const FieldElement& r, std::span<const FieldElement> x) {
  for (size_t i = 0; i < y.size(); ++i) y[i] += r * x[i];
}

// Folds chunks left to right.  With `expected` set, each recomputed challenge
// must match; a mismatch yields nullopt.
std::optional<RelaxedInstance> run_folds(const ConstraintSystem& cs,
                                         const std::vector<Assignment>& chunks,
                                         std::vector<TranscriptEntry>* record,
                                         const std::vector<TranscriptEntry>* expected) {
  FoldState st;
  st.u = RelaxedInstance::embed(cs, chunks.front());
  {
    auto p = products(cs, st.u.z, st.u.mu);
    st.az = std::move(p.az);
    st.bz = std::move(p.bz);
    st.cz = std::move(p.cz);
  }
  for (size_t k = 1; k < chunks.size(); ++k) {
    check_shape(cs, chunks[k]);
    const Products fresh = products(cs, chunks[k], FieldElement::one());
    const Products running{st.az, st.bz, st.cz};
    const auto t = cross_term(running, st.u.mu, fresh, FieldElement::one());
    const FieldElement dt = vector_digest(t);
    const FieldElement r =
        derive_challenge(instance_digest(st.u), plain_instance_digest(chunks[k]), dt).r;
    if (expected != nullptr) {
      const auto& e = (*expected)[k - 1];
      if (e.r != r || e.t_digest != dt) return std::nullopt;
    }
    if (record != nullptr) record->push_back({r, dt});
    axpy(st.u.z.pub, r, chunks[k].pub);
    axpy(st.u.z.wit, r, chunks[k].wit);
    st.u.mu += r;
    axpy(st.u.err, r, t);
    axpy(st.az, r, fresh.az);
    axpy(st.bz, r, fresh.bz);
    axpy(st.cz, r, fresh.cz);
  }
  return st.u;
}

// ------------------------------------------------------------ chunk layout

// Public column offsets of a step instance.
struct StepColumns {
  size_t position = 0, index = 0, context = 0, tokens = 0, mask = 0, root = 0, upsilon = 0,
         h_in = 0, h_out = 0, total = 0;
};

StepColumns step_columns(const StepShape& shape) {
  StepColumns c;
  const size_t n = shape.n_t;
  if (shape.params.scheme == Scheme::kSegment) {
    c.position = 0;
    c.index = 1;
    c.context = c.index + n;
    c.tokens = c.context + n;
    c.mask = c.tokens + n;
    c.root = c.mask + n;
    c.upsilon = c.root + 1;
  } else {
    c.tokens = 0;
    c.mask = shape.params.psi + n;
    c.upsilon = c.mask + n;
  }
  c.h_in = c.upsilon + 1;
  c.h_out = c.h_in + 1;
  c.total = c.h_out + 1;
  return c;
}

size_t chunk_count(size_t scored, size_t n_t) { return std::max<size_t>(1, (scored + n_t - 1) / n_t); }

// Tokens and mask of chunk c for KGW/SynthID.
void fill_linear_chunk(const DetectionStatement& s, size_t n_t, size_t c, StepInput& in) {
  in.tokens.assign(s.psi + n_t, 0);
  in.mask.assign(n_t, 0);
  const size_t base = c * n_t;
  for (size_t k = 0; k < s.psi + n_t && base + k < s.tokens.size(); ++k) {
    in.tokens[k] = s.tokens[base + k];
  }
  for (size_t k = 0; k < n_t; ++k) in.mask[k] = base + s.psi + k < s.tokens.size() ? 1 : 0;
}

// Scored slots grouped by message position.
std::vector<std::vector<uint32_t>> group_slots(const DetectionStatement& s,
                                               const SegmentOpenings& openings) {
  std::vector<std::vector<uint32_t>> groups(s.n_hat);
  for (size_t i = 1; i < s.tokens.size(); ++i) {
    const auto it = openings.find(s.tokens[i - 1]);
    if (it == openings.end()) {
      throw Error(ErrorCode::kMissingOpening,
                  "no Merkle opening for token " + std::to_string(s.tokens[i - 1]));
    }
    if (it->second.position >= s.n_hat) {
      throw Error(ErrorCode::kIndexOutOfRange, "opening position exceeds n_hat");
    }
    groups[it->second.position].push_back(static_cast<uint32_t>(i));
  }
  return groups;
}

IvcChain prove_chain(const ConstraintSystem& cs, const StepShape& shape,
                     std::vector<StepInput> inputs, const SecretKey& key,
                     const FieldElement& s_h, IvcTimings* timings) {
  IvcChain chain;
  chain.position = inputs.front().position;
  std::vector<uint64_t> count(shape.counters(), 0);
  auto t0 = Clock::now();
  chain.acc_hashes.push_back(accumulator_hash(shape.params.hash, count, s_h));
  for (StepInput& in : inputs) {
    in.count_in = count;
    auto res = build_step_instance(shape, in, key, s_h, false);
    count = res.count_out;
    chain.acc_hashes.push_back(accumulator_hash(shape.params.hash, count, s_h));
    chain.chunks.push_back(std::move(res.bundle.assignment));
  }
  if (timings != nullptr) timings->witness_s += seconds_since(t0);
  t0 = Clock::now();
  chain.final_instance = *run_folds(cs, chain.chunks, &chain.transcript, nullptr);
  if (timings != nullptr) timings->fold_s += seconds_since(t0);
  chain.final_count = count;
  chain.aux = build_aux_instance(shape, count, s_h).assignment;
  return chain;
}

StepShape shape_of(const DetectionStatement& s, size_t n_t) {
  validate_statement(s);
  if (n_t == 0) throw Error(ErrorCode::kChunkSizeMismatch, "n_t must be positive");
  StepShape shape;
  shape.params = s;
  shape.params.tokens.clear();
  shape.params.claimed_count = 0;
  shape.params.count_matrix.clear();
  shape.n_t = n_t;
  return shape;
}

std::vector<StepInput> linear_inputs(const DetectionStatement& s, size_t n_t) {
  std::vector<StepInput> out(chunk_count(s.scored_tokens(), n_t));
  for (size_t c = 0; c < out.size(); ++c) fill_linear_chunk(s, n_t, c, out[c]);
  return out;
}

std::vector<StepInput> segment_inputs(const DetectionStatement& s, size_t n_t,
                                      const std::vector<uint32_t>& slots, uint32_t position,
                                      const SegmentOpenings& openings) {
  std::vector<StepInput> out(chunk_count(slots.size(), n_t));
  const SegmentOpening pad = placeholder_opening(s.vocab_size);
  for (size_t c = 0; c < out.size(); ++c) {
    StepInput& in = out[c];
    in.position = position;
    in.index.assign(n_t, 0);
    in.context.assign(n_t, 0);
    in.tokens.assign(n_t, 0);
    in.mask.assign(n_t, 0);
    in.openings.assign(n_t, pad);
    for (size_t k = 0; k < n_t && c * n_t + k < slots.size(); ++k) {
      const uint32_t i = slots[c * n_t + k];
      in.index[k] = i;
      in.context[k] = s.tokens[i - 1];
      in.tokens[k] = s.tokens[i];
      in.mask[k] = 1;
      in.openings[k] = openings.at(s.tokens[i - 1]);
    }
  }
  return out;
}

json assignment_json(const Assignment& a) { return to_json(a); }

}  // namespace

// ------------------------------------------------------------ algebra

std::vector<FieldElement> compute_cross_term(const ConstraintSystem& cs, const Assignment& z1,
                                             const FieldElement& mu1, const Assignment& z2,
                                             const FieldElement& mu2) {
  return cross_term(products(cs, z1, mu1), mu1, products(cs, z2, mu2), mu2);
}

RelaxedInstance fold_with_cross_term(const RelaxedInstance& i1, const RelaxedInstance& i2,
                                     std::span<const FieldElement> t, const FieldElement& r) {
  if (i1.z.pub.size() != i2.z.pub.size() || i1.z.wit.size() != i2.z.wit.size() ||
      i1.err.size() != i2.err.size() || t.size() != i1.err.size()) {
    throw Error(ErrorCode::kShapeMismatch, "instances to fold differ in shape");
  }
  RelaxedInstance out = i1;
  axpy(out.z.pub, r, i2.z.pub);
  axpy(out.z.wit, r, i2.z.wit);
  out.mu += r * i2.mu;
  const FieldElement r2 = r * r;
  for (size_t i = 0; i < out.err.size(); ++i) out.err[i] += r * t[i] + r2 * i2.err[i];
  return out;
}

RelaxedInstance fold(const ConstraintSystem& cs, const RelaxedInstance& i1,
                     const RelaxedInstance& i2, const FieldElement& r) {
  const auto t = compute_cross_term(cs, i1.z, i1.mu, i2.z, i2.mu);
  return fold_with_cross_term(i1, i2, t, r);
}

FieldElement instance_digest(const RelaxedInstance& inst) {
  DigestWriter w("pvmark/relaxed/v1");
  w.put(inst.mu);
  w.put(inst.z.pub);
  w.put(inst.z.wit);
  w.put(inst.err);
  return w.finish();
}

FieldElement plain_instance_digest(const Assignment& asg) {
  DigestWriter w("pvmark/plain/v1");
  w.put(asg.pub);
  w.put(asg.wit);
  return w.finish();
}

FieldElement vector_digest(std::span<const FieldElement> v) {
  DigestWriter w("pvmark/vector/v1");
  w.put(v);
  return w.finish();
}

FoldChallenge derive_challenge(const FieldElement& d1, const FieldElement& d2,
                               const FieldElement& dt) {
  return {hash3(HashKind::kPoseidon, d1, d2, dt)};
}

FieldElement accumulator_hash(HashKind kind, std::span<const uint64_t> counts,
                              const FieldElement& s_h) {
  FieldElement h = s_h;
  for (uint64_t c : counts) h = hash2(kind, FieldElement(c), h);
  return h;
}

// ------------------------------------------------------------ step circuits

size_t StepShape::counters() const {
  return params.scheme == Scheme::kSegment ? (size_t{1} << params.m_hat) : 1;
}

StepResult build_step_instance(const StepShape& shape, const StepInput& in, const SecretKey& key,
                               const FieldElement& s_h, bool record) {
  const DetectionStatement& s = shape.params;
  const size_t n = shape.n_t;
  const bool segment = s.scheme == Scheme::kSegment;
  require_size(in.mask.size(), n, "mask");
  require_size(in.count_in.size(), shape.counters(), "count_in");
  if (segment) {
    require_size(in.index.size(), n, "index");
    require_size(in.context.size(), n, "context");
    require_size(in.tokens.size(), n, "tokens");
    require_size(in.openings.size(), n, "openings");
  } else {
    require_size(in.tokens.size(), s.psi + n, "tokens");
  }

  Builder b(record);
  Var position{};
  std::vector<LC> ctx, toks, mask;
  if (segment) {
    b.section("position");
    position = b.input(FieldElement(in.position));
    b.section("index");
    for (uint32_t v : in.index) b.input(FieldElement(v));
    b.section("context");
    for (uint32_t v : in.context) ctx.emplace_back(b.input(FieldElement(v)));
  }
  b.section("tokens");
  for (uint32_t v : in.tokens) toks.emplace_back(b.input(FieldElement(v)));
  b.section("mask");
  for (uint8_t v : in.mask) mask.emplace_back(b.input(FieldElement(v)));
  Var root{};
  if (segment) {
    b.section("root");
    root = b.input(s.root);
  }
  b.section("upsilon");
  const Var upsilon = b.input(s.upsilon);
  b.section("h_in");
  const Var h_in = b.input(accumulator_hash(s.hash, in.count_in, s_h));
  b.section("h_out");
  const Var h_out = b.input(FieldElement());

  b.section("sk");
  const Var sk = b.witness(key.sk);
  b.section("s_h");
  const Var sh = b.witness(s_h);
  b.section("count_in");
  std::vector<LC> counts;
  for (uint64_t c : in.count_in) counts.emplace_back(b.witness(FieldElement(c)));
  circuit_parts::bind_commitment(b, sk, upsilon);
  b.section("accumulator");
  b.assert_equal(acc_gadget(b, s.hash, counts, sh), h_in);

  const RangeMode range = RangeMode::kBitwise;
  for (size_t k = 0; k < n; ++k) {
    std::vector<LC> flags;
    if (segment) {
      b.section("membership");
      merkle_gadget(b, s.hash, ctx[k], position, sk, in.openings[k].path, root, mask[k]);
      flags = circuit_parts::segment_flags(b, s, sk, ctx[k], toks[k], range);
    } else {
      const std::span<const LC> window(toks.data() + k, s.psi);
      const LC& tok = toks[k + s.psi];
      if (s.scheme == Scheme::kKgw) {
        flags.push_back(circuit_parts::kgw_flag(b, s, sk, window, tok, range));
      } else {
        flags = circuit_parts::synthid_flags(b, s, sk, window, tok, range);
      }
    }
    b.section("count");
    for (size_t j = 0; j < flags.size(); ++j) {
      counts[segment ? j : 0] += b.mul(mask[k], flags[j]);
    }
  }

  StepResult out;
  for (const LC& c : counts) out.count_out.push_back(small_count(b.eval(c)));
  b.set_value(h_out, accumulator_hash(s.hash, out.count_out, s_h));
  b.section("accumulator");
  b.assert_equal(acc_gadget(b, s.hash, counts, sh), h_out);

  if (record) out.bundle.cs = b.constraint_system();
  out.bundle.layout = b.layout();
  out.bundle.assignment = b.assignment();
  out.bundle.rows = b.num_rows();
  return out;
}

ConstraintSystem step_constraint_system(const StepShape& shape) {
  const auto& s = shape.params;
  StepInput in;
  in.mask.assign(shape.n_t, 0);
  in.count_in.assign(shape.counters(), 0);
  if (s.scheme == Scheme::kSegment) {
    in.index.assign(shape.n_t, 0);
    in.context.assign(shape.n_t, 0);
    in.tokens.assign(shape.n_t, 0);
    in.openings.assign(shape.n_t, placeholder_opening(s.vocab_size));
  } else {
    in.tokens.assign(s.psi + shape.n_t, 0);
  }
  return build_step_instance(shape, in, SecretKey{}, FieldElement(), true).bundle.cs;
}

CircuitBundle build_aux_instance(const StepShape& shape, std::span<const uint64_t> final_count,
                                 const FieldElement& s_h) {
  if (final_count.size() != shape.counters()) {
    throw Error(ErrorCode::kShapeMismatch, "final count has the wrong number of cells");
  }
  const HashKind kind = shape.params.hash;
  Builder b;
  b.section("final_count");
  std::vector<LC> counts;
  for (uint64_t c : final_count) counts.emplace_back(b.input(FieldElement(c)));
  const std::vector<uint64_t> zeros(final_count.size(), 0);
  b.section("h_init");
  const Var h_init = b.input(accumulator_hash(kind, zeros, s_h));
  b.section("h_final");
  const Var h_final = b.input(accumulator_hash(kind, final_count, s_h));
  b.section("s_h");
  const Var sh = b.witness(s_h);
  const std::vector<LC> zero_lcs(final_count.size());
  b.assert_equal(acc_gadget(b, kind, zero_lcs, sh), h_init);
  b.assert_equal(acc_gadget(b, kind, counts, sh), h_final);
  CircuitBundle out;
  out.cs = b.constraint_system();
  out.layout = b.layout();
  out.assignment = b.assignment();
  out.rows = b.num_rows();
  return out;
}

// ------------------------------------------------------------ prover

size_t IvcProof::n_f() const {
  size_t n = 0;
  for (const auto& c : chains) n += c.chunks.size();
  return n;
}

IvcProof ivc_prove(const DetectionStatement& stmt, const SecretKey& key, const FieldElement& s_h,
                   size_t n_t, const SegmentOpenings* openings, IvcTimings* timings) {
  const StepShape shape = shape_of(stmt, n_t);
  const ConstraintSystem cs = step_constraint_system(shape);
  IvcProof proof;
  proof.statement = stmt;
  proof.n_t = n_t;
  if (stmt.scheme != Scheme::kSegment) {
    proof.chains.push_back(prove_chain(cs, shape, linear_inputs(stmt, n_t), key, s_h, timings));
    return proof;
  }
  if (openings == nullptr) throw Error(ErrorCode::kMissingOpening, "Segment needs openings");
  const auto groups = group_slots(stmt, *openings);
  proof.chains.resize(stmt.n_hat);
  std::vector<IvcTimings> per(stmt.n_hat);
  parallel_for(stmt.n_hat, [&](size_t p) {
    proof.chains[p] = prove_chain(cs, shape,
                                  segment_inputs(stmt, n_t, groups[p], static_cast<uint32_t>(p), *openings),
                                  key, s_h, &per[p]);
  });
  if (timings != nullptr) {
    for (const auto& t : per) {
      timings->witness_s += t.witness_s;
      timings->fold_s += t.fold_s;
    }
  }
  return proof;
}

// ------------------------------------------------------------ verifier

namespace {

bool check_chain(const ConstraintSystem& cs, const ConstraintSystem& aux_cs,
                 const StepShape& shape, const IvcChain& chain,
                 std::span<const uint64_t> expected_count) {
  const size_t n_f = chain.chunks.size();
  if (n_f == 0) return false;
  if (chain.transcript.size() < n_f - 1) {
    throw Error(ErrorCode::kTranscriptTruncated,
                "transcript holds " + std::to_string(chain.transcript.size()) + " folds, expected " +
                    std::to_string(n_f - 1));
  }
  if (chain.transcript.size() != n_f - 1) return false;
  if (chain.acc_hashes.size() != n_f + 1) return false;
  const StepColumns col = step_columns(shape);
  for (size_t k = 0; k < n_f; ++k) {
    const auto& pub = chain.chunks[k].pub;
    if (pub.size() != cs.num_public() || chain.chunks[k].wit.size() != cs.num_witness()) return false;
    if (pub[col.h_in] != chain.acc_hashes[k] || pub[col.h_out] != chain.acc_hashes[k + 1]) {
      return false;
    }
  }
  const auto folded = run_folds(cs, chain.chunks, nullptr, &chain.transcript);
  if (!folded || !(*folded == chain.final_instance)) return false;
  if (!is_relaxed_satisfied(cs, *folded).ok) return false;

  if (!std::equal(chain.final_count.begin(), chain.final_count.end(), expected_count.begin(),
                  expected_count.end())) {
    return false;
  }
  std::vector<FieldElement> aux_pub;
  for (uint64_t c : chain.final_count) aux_pub.emplace_back(c);
  aux_pub.push_back(chain.acc_hashes.front());
  aux_pub.push_back(chain.acc_hashes.back());
  if (chain.aux.pub != aux_pub || chain.aux.wit.size() != aux_cs.num_witness()) return false;
  return is_satisfied(aux_cs, chain.aux).ok;
}

bool check_linear_publics(const StepShape& shape, const DetectionStatement& stmt,
                          const IvcChain& chain, size_t n_t) {
  const StepColumns col = step_columns(shape);
  if (chain.chunks.size() != chunk_count(stmt.scored_tokens(), n_t)) return false;
  for (size_t c = 0; c < chain.chunks.size(); ++c) {
    StepInput in;
    fill_linear_chunk(stmt, n_t, c, in);
    const auto& pub = chain.chunks[c].pub;
    for (size_t k = 0; k < in.tokens.size(); ++k) {
      if (pub[col.tokens + k] != FieldElement(in.tokens[k])) return false;
    }
    for (size_t k = 0; k < n_t; ++k) {
      if (pub[col.mask + k] != FieldElement(in.mask[k])) return false;
    }
    if (pub[col.upsilon] != stmt.upsilon) return false;
  }
  return true;
}

bool check_segment_publics(const StepShape& shape, const DetectionStatement& stmt,
                           const std::vector<IvcChain>& chains, size_t n_t) {
  const StepColumns col = step_columns(shape);
  std::vector<uint8_t> seen(stmt.tokens.size(), 0);
  for (size_t p = 0; p < chains.size(); ++p) {
    const auto& chain = chains[p];
    if (chain.position != p) return false;
    for (const auto& chunk : chain.chunks) {
      const auto& pub = chunk.pub;
      if (pub[col.position] != FieldElement(p) || pub[col.root] != stmt.root ||
          pub[col.upsilon] != stmt.upsilon) {
        return false;
      }
      for (size_t k = 0; k < n_t; ++k) {
        const FieldElement& m = pub[col.mask + k];
        const uint64_t idx = pub[col.index + k].to_u256().bit_length() > 32
                                 ? std::numeric_limits<uint64_t>::max()
                                 : pub[col.index + k].to_u256().extract(0, 32);
        if (m.is_zero()) {
          if (!pub[col.index + k].is_zero() || !pub[col.context + k].is_zero() ||
              !pub[col.tokens + k].is_zero()) {
            return false;
          }
          continue;
        }
        if (!m.is_one() || idx == 0 || idx >= stmt.tokens.size() || seen[idx]) return false;
        seen[idx] = 1;
        if (pub[col.context + k] != FieldElement(stmt.tokens[idx - 1]) ||
            pub[col.tokens + k] != FieldElement(stmt.tokens[idx])) {
          return false;
        }
      }
    }
  }
  for (size_t i = 1; i < stmt.tokens.size(); ++i) {
    if (!seen[i]) return false;
  }
  return true;
}

}  // namespace

bool ivc_verify(const IvcProof& proof, const DetectionStatement& stmt) {
  if (!(proof.statement == stmt)) return false;
  StepShape shape;
  try {
    shape = shape_of(stmt, proof.n_t);
  } catch (const Error&) {
    return false;
  }
  const ConstraintSystem cs = step_constraint_system(shape);
  const std::vector<uint64_t> zeros(shape.counters(), 0);
  const ConstraintSystem aux_cs = build_aux_instance(shape, zeros, FieldElement()).cs;

  // Shapes first, so the public checks can index freely.
  for (const auto& chain : proof.chains) {
    for (const auto& chunk : chain.chunks) {
      if (chunk.pub.size() != cs.num_public() || chunk.wit.size() != cs.num_witness()) return false;
    }
  }
  if (stmt.scheme == Scheme::kSegment) {
    if (proof.chains.size() != stmt.n_hat) return false;
    if (!check_segment_publics(shape, stmt, proof.chains, proof.n_t)) return false;
    std::vector<uint8_t> ok(stmt.n_hat, 0);
    parallel_for(stmt.n_hat, [&](size_t p) {
      ok[p] = check_chain(cs, aux_cs, shape, proof.chains[p], stmt.count_matrix[p]) ? 1 : 0;
    });
    return std::all_of(ok.begin(), ok.end(), [](uint8_t v) { return v != 0; });
  }
  if (proof.chains.size() != 1) return false;
  if (!check_linear_publics(shape, stmt, proof.chains[0], proof.n_t)) return false;
  const uint64_t claim = stmt.claimed_count;
  return check_chain(cs, aux_cs, shape, proof.chains[0], std::span<const uint64_t>(&claim, 1));
}

// ------------------------------------------------------------ serialization

json to_json(const IvcProof& p) {
  json chains = json::array();
  for (const auto& c : p.chains) {
    json chunks = json::array();
    for (const auto& a : c.chunks) chunks.push_back(assignment_json(a));
    json transcript = json::array();
    for (const auto& t : c.transcript) {
      transcript.push_back({{"r", fe_to_json(t.r)}, {"t_digest", fe_to_json(t.t_digest)}});
    }
    chains.push_back({{"position", c.position},
                      {"n_f", c.chunks.size()},
                      {"acc_hashes", fe_vector_to_json(c.acc_hashes)},
                      {"chunks", std::move(chunks)},
                      {"transcript", std::move(transcript)},
                      {"final_instance", to_json(c.final_instance)},
                      {"aux", assignment_json(c.aux)},
                      {"final_count", c.final_count}});
  }
  return {{"format", kFormatTag},
          {"kind", "ivc"},
          {"scheme", scheme_name(p.statement.scheme)},
          {"statement", to_json(p.statement)},
          {"n_t", p.n_t},
          {"n_f", p.n_f()},
          {"chains", std::move(chains)}};
}

IvcProof ivc_proof_from_json(const json& j) {
  require_format(j);
  if (require_string(j, "kind") != "ivc") throw Error(ErrorCode::kParseError, "not an IVC proof");
  IvcProof p;
  p.statement = statement_from_json(require(j, "statement"));
  if (parse_scheme(require_string(j, "scheme")) != p.statement.scheme) {
    throw Error(ErrorCode::kParseError, "scheme disagrees with the statement");
  }
  p.n_t = require_u64(j, "n_t");
  const json& chains = require(j, "chains");
  if (!chains.is_array()) throw Error(ErrorCode::kParseError, "chains must be an array");
  for (const json& cj : chains) {
    IvcChain c;
    c.position = static_cast<uint32_t>(require_u64(cj, "position"));
    c.acc_hashes = fe_vector_from_json(require(cj, "acc_hashes"));
    for (const json& a : require(cj, "chunks")) c.chunks.push_back(assignment_from_json(a));
    if (require_u64(cj, "n_f") != c.chunks.size()) {
      throw Error(ErrorCode::kParseError, "n_f disagrees with the chunk list");
    }
    for (const json& t : require(cj, "transcript")) {
      c.transcript.push_back({fe_from_json(require(t, "r")), fe_from_json(require(t, "t_digest"))});
    }
    c.final_instance = relaxed_instance_from_json(require(cj, "final_instance"));
    c.aux = assignment_from_json(require(cj, "aux"));
    c.final_count = require_u64_array(cj, "final_count");
    p.chains.push_back(std::move(c));
  }
  if (require_u64(j, "n_f") != p.n_f()) {
    throw Error(ErrorCode::kParseError, "n_f disagrees with the chains");
  }
  return p;
}

// ------------------------------------------------------------ sweep

std::vector<SweepRow> sweep_nt(const DetectionStatement& stmt, const SecretKey& key,
                               std::span<const size_t> candidates, unsigned repeats) {
  if (stmt.scheme == Scheme::kSegment) {
    throw Error(ErrorCode::kInvalidParams, "the sweep runs on single-chain schemes");
  }
  const size_t scored = stmt.scored_tokens();
  std::vector<SweepRow> rows;
  const FieldElement s_h = hash2(HashKind::kPoseidon, key.s_h, FieldElement(7));
  for (size_t n_t : candidates) {
    if (n_t == 0 || scored % n_t != 0) {
      throw Error(ErrorCode::kChunkSizeMismatch,
                  "n_t = " + std::to_string(n_t) + " does not divide " + std::to_string(scored));
    }
    SweepRow row;
    row.n_t = n_t;
    row.n_f = scored / n_t;
    row.setup_s = row.prove_s = row.verify_s = std::numeric_limits<double>::infinity();
    for (unsigned rep = 0; rep < std::max(1u, repeats); ++rep) {
      auto t0 = Clock::now();
      const auto cs = step_constraint_system(shape_of(stmt, n_t));
      row.setup_s = std::min(row.setup_s, seconds_since(t0));
      row.rows_step = cs.num_constraints();
      row.rows_folded = row.rows_step * (row.n_f - 1);

      IvcTimings t;
      const auto proof = ivc_prove(stmt, key, s_h, n_t, nullptr, &t);
      row.prove_s = std::min(row.prove_s, t.witness_s + t.fold_s);
      t0 = Clock::now();
      if (!ivc_verify(proof, stmt)) throw Error(ErrorCode::kInvalidParams, "sweep proof rejected");
      row.verify_s = std::min(row.verify_s, seconds_since(t0));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pvmark
