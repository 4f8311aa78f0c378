#include "pvmark/hash.hpp"

#include <atomic>
#include <string>

#include "hash_simd.hpp"
#include "pvmark/error.hpp"
#include "pvmark/sha256.hpp"

namespace pvmark {
namespace {

FieldElement pow7(const FieldElement& y) {
  const FieldElement y2 = y * y;
  const FieldElement y4 = y2 * y2;
  const FieldElement y6 = y4 * y2;
  return y6 * y;
}

FieldElement pow5(const FieldElement& y) {
  const FieldElement y2 = y * y;
  const FieldElement y4 = y2 * y2;
  return y4 * y;
}

using Matrix = std::vector<std::vector<FieldElement>>;

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  const size_t n = a.size();
  Matrix r(n, std::vector<FieldElement>(n));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      FieldElement acc;
      for (size_t k = 0; k < n; ++k) acc += a[i][k] * b[k][j];
      r[i][j] = acc;
    }
  }
  return r;
}

// Solves m x = rhs by Gauss-Jordan elimination.
std::vector<FieldElement> solve(Matrix m, std::vector<FieldElement> rhs) {
  const size_t n = m.size();
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    while (piv < n && m[piv][col].is_zero()) ++piv;
    if (piv == n) throw Error(ErrorCode::kInvalidParams, "singular matrix");
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    const FieldElement inv = m[col][col].inverse();
    for (size_t k = 0; k < n; ++k) m[col][k] *= inv;
    rhs[col] *= inv;
    for (size_t r = 0; r < n; ++r) {
      if (r == col || m[r][col].is_zero()) continue;
      const FieldElement f = m[r][col];
      for (size_t k = 0; k < n; ++k) m[r][k] -= f * m[col][k];
      rhs[r] -= f * rhs[col];
    }
  }
  return rhs;
}

void derive_optimized(PoseidonParams& p) {
  const unsigned t = p.t;
  const unsigned half = p.full_rounds / 2;
  // Derivation lane d lives in real lane perm[d]; the S-box lane comes first.
  std::vector<unsigned> perm(t);
  perm[0] = t - 1;
  for (unsigned d = 1; d < t; ++d) perm[d] = d - 1;

  Matrix mp(t, std::vector<FieldElement>(t));
  for (unsigned a = 0; a < t; ++a) {
    for (unsigned b = 0; b < t; ++b) mp[a][b] = p.mds[perm[a]][perm[b]];
  }

  auto& opt = p.optimized;
  opt = {};
  std::vector<FieldElement> carry(t);
  for (unsigned j = 0; j < p.partial_rounds; ++j) {
    std::vector<FieldElement> eff(t);
    for (unsigned d = 0; d < t; ++d) {
      eff[d] = p.rc(half + j, perm[d]) + carry[d];
    }
    opt.partial_constants.push_back(eff[0]);
    eff[0] = FieldElement();
    for (unsigned a = 0; a < t; ++a) {
      FieldElement acc;
      for (unsigned b = 0; b < t; ++b) acc += mp[a][b] * eff[b];
      carry[a] = acc;
    }
  }
  opt.second_half_first_constants.assign(t, FieldElement());
  for (unsigned d = 0; d < t; ++d) {
    opt.second_half_first_constants[perm[d]] =
        p.rc(half + p.partial_rounds, perm[d]) + carry[d];
  }

  Matrix cur = mp;
  Matrix block;
  for (unsigned j = 0; j < p.partial_rounds; ++j) {
    Matrix hat(t - 1, std::vector<FieldElement>(t - 1));
    std::vector<FieldElement> col(t - 1);
    for (unsigned a = 1; a < t; ++a) {
      col[a - 1] = cur[a][0];
      for (unsigned b = 1; b < t; ++b) hat[a - 1][b - 1] = cur[a][b];
    }
    opt.first_row.push_back(cur[0]);
    opt.first_col.push_back(solve(hat, col));
    block.assign(t, std::vector<FieldElement>(t));
    block[0][0] = FieldElement::one();
    for (unsigned a = 1; a < t; ++a) {
      for (unsigned b = 1; b < t; ++b) block[a][b] = hat[a - 1][b - 1];
    }
    if (j + 1 < p.partial_rounds) cur = mat_mul(mp, block);
  }
  opt.tail.assign(t - 1, std::vector<FieldElement>(t - 1));
  for (unsigned a = 1; a < t; ++a) {
    for (unsigned b = 1; b < t; ++b) opt.tail[a - 1][b - 1] = block[a][b];
  }
}

void full_round(std::span<FieldElement> s, const PoseidonParams& p,
                const FieldElement* constants) {
  const unsigned t = p.t;
  std::array<FieldElement, 8> tmp;
  for (unsigned i = 0; i < t; ++i) tmp[i] = pow5(s[i] + constants[i]);
  for (unsigned i = 0; i < t; ++i) {
    FieldElement acc;
    for (unsigned j = 0; j < t; ++j) acc += p.mds[i][j] * tmp[j];
    s[i] = acc;
  }
}

std::atomic<bool> g_simd_enabled{true};

}  // namespace

std::string_view hash_kind_name(HashKind kind) {
  return kind == HashKind::kMimc ? "mimc" : "poseidon";
}

HashKind parse_hash_kind(std::string_view name) {
  if (name == "mimc") return HashKind::kMimc;
  if (name == "poseidon") return HashKind::kPoseidon;
  throw Error(ErrorCode::kParseError,
              "unknown hash kind '" + std::string(name) + "'");
}

std::vector<FieldElement> derive_field_elements(std::string_view domain,
                                                size_t count) {
  std::vector<FieldElement> out;
  out.reserve(count);
  std::string buf(domain);
  buf.resize(domain.size() + 4);
  for (uint32_t counter = 0; out.size() < count; ++counter) {
    for (int i = 0; i < 4; ++i) {
      buf[domain.size() + i] = static_cast<char>(counter >> (24 - 8 * i));
    }
    Sha256Digest d = sha256(buf);
    d[0] &= 0x3f;
    U256 v;
    for (size_t i = 0; i < 32; ++i) {
      const size_t bit = (31 - i) * 8;
      v.limbs[bit / 64] |= static_cast<uint64_t>(d[i]) << (bit % 64);
    }
    if (v < FieldElement::modulus()) out.push_back(FieldElement::from_u256(v));
  }
  return out;
}

// ---------------------------------------------------------------- MiMC

MimcParams MimcParams::generate(unsigned rounds, unsigned exponent,
                                std::string_view domain) {
  if (rounds == 0) throw Error(ErrorCode::kInvalidParams, "zero MiMC rounds");
  if (exponent != 7) {
    throw Error(ErrorCode::kInvalidParams,
                "only the exponent-7 MiMC permutation is supported");
  }
  MimcParams p;
  p.rounds = rounds;
  p.exponent = exponent;
  p.round_constants.push_back(FieldElement());
  const auto rest = derive_field_elements(domain, rounds - 1);
  p.round_constants.insert(p.round_constants.end(), rest.begin(), rest.end());
  return p;
}

const MimcParams& MimcParams::standard() {
  static const MimcParams kParams =
      generate(91, 7, "pvmark/mimc/bn254/x7/r91/constants");
  return kParams;
}

FieldElement mimc_encrypt(const FieldElement& x, const FieldElement& key,
                          const MimcParams& params) {
  FieldElement y = x;
  for (const FieldElement& c : params.round_constants) y = pow7(y + key + c);
  return y + key;
}

FieldElement mimc_absorb(const FieldElement& h, const FieldElement& x,
                         const MimcParams& params) {
  return h + x + mimc_encrypt(x, h, params);
}

FieldElement mimc_hash(std::span<const FieldElement> inputs,
                       const MimcParams& params) {
  if (inputs.size() != 2 && inputs.size() != 3) {
    throw Error(ErrorCode::kArityUnsupported,
                "MiMC hash takes 2 or 3 inputs, got " +
                    std::to_string(inputs.size()));
  }
  FieldElement h;
  for (const FieldElement& x : inputs) h = mimc_absorb(h, x, params);
  return h;
}

// ---------------------------------------------------------------- Poseidon

PoseidonParams PoseidonParams::generate(unsigned t, unsigned full_rounds,
                                        unsigned partial_rounds,
                                        std::string_view domain) {
  if (t < 2 || t > 8 || full_rounds % 2 != 0 || partial_rounds == 0) {
    throw Error(ErrorCode::kInvalidParams, "bad Poseidon shape");
  }
  PoseidonParams p;
  p.t = t;
  p.full_rounds = full_rounds;
  p.partial_rounds = partial_rounds;
  p.alpha = 5;
  const std::string base(domain);
  p.round_constants =
      derive_field_elements(base + "/arc", (full_rounds + partial_rounds) * t);

  // Cauchy matrix 1 / (x_i + y_j): every square submatrix is again Cauchy,
  // hence invertible, as long as the x's and y's are distinct and no sum
  // vanishes.
  const auto xy = derive_field_elements(base + "/mds", 2 * t);
  for (unsigned i = 0; i < 2 * t; ++i) {
    for (unsigned j = i + 1; j < 2 * t; ++j) {
      if (xy[i] == xy[j]) {
        throw Error(ErrorCode::kInvalidParams, "repeated Cauchy point");
      }
    }
  }
  p.mds.assign(t, std::vector<FieldElement>(t));
  for (unsigned i = 0; i < t; ++i) {
    for (unsigned j = 0; j < t; ++j) {
      const FieldElement s = xy[i] + xy[t + j];
      if (s.is_zero()) throw Error(ErrorCode::kInvalidParams, "x_i + y_j = 0");
      p.mds[i][j] = s.inverse();
    }
  }
  derive_optimized(p);
  return p;
}

const PoseidonParams& PoseidonParams::standard(unsigned t) {
  static const PoseidonParams kT3 =
      generate(3, 8, 57, "pvmark/poseidon/bn254/t3/rf8/rp57");
  static const PoseidonParams kT4 =
      generate(4, 8, 56, "pvmark/poseidon/bn254/t4/rf8/rp56");
  if (t == 3) return kT3;
  if (t == 4) return kT4;
  throw Error(ErrorCode::kArityUnsupported,
              "Poseidon width must be 3 or 4, got " + std::to_string(t));
}

void poseidon_permute_reference(std::span<FieldElement> state,
                                const PoseidonParams& p) {
  if (state.size() != p.t) {
    throw Error(ErrorCode::kShapeMismatch, "Poseidon state width");
  }
  const unsigned half = p.full_rounds / 2;
  const unsigned total = p.full_rounds + p.partial_rounds;
  std::vector<FieldElement> tmp(p.t);
  for (unsigned r = 0; r < total; ++r) {
    for (unsigned i = 0; i < p.t; ++i) state[i] += p.rc(r, i);
    const bool full = r < half || r >= half + p.partial_rounds;
    if (full) {
      for (unsigned i = 0; i < p.t; ++i) state[i] = pow5(state[i]);
    } else {
      state[p.t - 1] = pow5(state[p.t - 1]);
    }
    for (unsigned i = 0; i < p.t; ++i) {
      FieldElement acc;
      for (unsigned j = 0; j < p.t; ++j) acc += p.mds[i][j] * state[j];
      tmp[i] = acc;
    }
    for (unsigned i = 0; i < p.t; ++i) state[i] = tmp[i];
  }
}

void poseidon_permute(std::span<FieldElement> state, const PoseidonParams& p) {
  if (state.size() != p.t) {
    throw Error(ErrorCode::kShapeMismatch, "Poseidon state width");
  }
  const unsigned t = p.t;
  const unsigned half = p.full_rounds / 2;
  const auto& opt = p.optimized;
  for (unsigned r = 0; r < half; ++r) full_round(state, p, &p.rc(r, 0));

  // Reorder so the S-box lane is first.
  std::array<FieldElement, 8> v;
  v[0] = state[t - 1];
  for (unsigned d = 1; d < t; ++d) v[d] = state[d - 1];
  for (unsigned j = 0; j < p.partial_rounds; ++j) {
    const FieldElement s0 = pow5(v[0] + opt.partial_constants[j]);
    const auto& row = opt.first_row[j];
    const auto& col = opt.first_col[j];
    FieldElement acc = row[0] * s0;
    for (unsigned d = 1; d < t; ++d) {
      acc += row[d] * v[d];
      v[d] += col[d - 1] * s0;
    }
    v[0] = acc;
  }
  std::array<FieldElement, 8> w;
  for (unsigned a = 0; a + 1 < t; ++a) {
    FieldElement acc;
    for (unsigned b = 0; b + 1 < t; ++b) acc += opt.tail[a][b] * v[b + 1];
    w[a] = acc;
  }
  state[t - 1] = v[0];
  for (unsigned d = 1; d < t; ++d) state[d - 1] = w[d - 1];

  full_round(state, p, opt.second_half_first_constants.data());
  for (unsigned r = half + p.partial_rounds + 1; r < p.full_rounds + p.partial_rounds;
       ++r) {
    full_round(state, p, &p.rc(r, 0));
  }
}

FieldElement poseidon_hash(std::span<const FieldElement> inputs) {
  if (inputs.size() != 2 && inputs.size() != 3) {
    throw Error(ErrorCode::kArityUnsupported,
                "Poseidon hash takes 2 or 3 inputs, got " +
                    std::to_string(inputs.size()));
  }
  const PoseidonParams& p = PoseidonParams::standard(
      static_cast<unsigned>(inputs.size() + 1));
  std::array<FieldElement, 4> state{};
  for (size_t i = 0; i < inputs.size(); ++i) state[i + 1] = inputs[i];
  poseidon_permute(std::span<FieldElement>(state.data(), p.t), p);
  return state[1];
}

FieldElement poseidon_sponge(std::span<const FieldElement> inputs) {
  const PoseidonParams& p = PoseidonParams::standard(4);
  std::array<FieldElement, 4> state{};
  state[0] = FieldElement(static_cast<uint64_t>(inputs.size()));
  size_t i = 0;
  do {
    for (size_t k = 0; k < 3 && i < inputs.size(); ++k, ++i) {
      state[k + 1] += inputs[i];
    }
    poseidon_permute(state, p);
  } while (i < inputs.size());
  return state[1];
}

FieldElement hash(HashKind kind, std::span<const FieldElement> inputs) {
  return kind == HashKind::kMimc ? mimc_hash(inputs) : poseidon_hash(inputs);
}

void set_simd_enabled(bool enabled) { g_simd_enabled.store(enabled); }

bool simd_available() { return detail::simd_supported(); }

void prf_batch(HashKind kind, std::span<const FieldElement> prefix,
               std::span<const FieldElement> last, std::span<FieldElement> out) {
  if (prefix.size() != 1 && prefix.size() != 2) {
    throw Error(ErrorCode::kArityUnsupported, "prf_batch prefix length");
  }
  if (out.size() != last.size()) {
    throw Error(ErrorCode::kShapeMismatch, "prf_batch output length");
  }
  const bool simd = g_simd_enabled.load() && detail::simd_supported();
  if (kind == HashKind::kMimc) {
    const MimcParams& params = MimcParams::standard();
    FieldElement h;
    for (const FieldElement& x : prefix) h = mimc_absorb(h, x, params);
    if (simd) {
      detail::simd_mimc_absorb_batch(h, last, out, params);
    } else {
      for (size_t i = 0; i < last.size(); ++i) {
        out[i] = mimc_absorb(h, last[i], params);
      }
    }
    return;
  }
  const unsigned t = static_cast<unsigned>(prefix.size() + 2);
  const PoseidonParams& params = PoseidonParams::standard(t);
  if (simd) {
    detail::simd_poseidon_batch(prefix, last, out, params);
    return;
  }
  std::array<FieldElement, 4> state{};
  for (size_t i = 0; i < last.size(); ++i) {
    state.fill(FieldElement());
    for (size_t k = 0; k < prefix.size(); ++k) state[k + 1] = prefix[k];
    state[t - 1] = last[i];
    poseidon_permute(std::span<FieldElement>(state.data(), t), params);
    out[i] = state[1];
  }
}

void hash_batch(HashKind kind, unsigned arity,
                std::span<const FieldElement> inputs, std::span<FieldElement> out) {
  if (arity != 2 && arity != 3) {
    throw Error(ErrorCode::kArityUnsupported, "hash_batch arity");
  }
  if (inputs.size() != out.size() * arity) {
    throw Error(ErrorCode::kShapeMismatch, "hash_batch input length");
  }
  const size_t n = out.size();
  const bool simd = g_simd_enabled.load() && detail::simd_supported();
  if (kind == HashKind::kMimc) {
    const MimcParams& params = MimcParams::standard();
    std::vector<FieldElement> h(n), x(n);
    for (unsigned col = 0; col < arity; ++col) {
      for (size_t i = 0; i < n; ++i) x[i] = inputs[i * arity + col];
      if (simd) {
        detail::simd_mimc_absorb_lanes(h, x, out, params);
      } else {
        for (size_t i = 0; i < n; ++i) out[i] = mimc_absorb(h[i], x[i], params);
      }
      std::copy(out.begin(), out.end(), h.begin());
    }
    return;
  }
  const PoseidonParams& params = PoseidonParams::standard(arity + 1);
  if (simd) {
    detail::simd_poseidon_lanes(inputs, out, params);
    return;
  }
  for (size_t i = 0; i < n; ++i) out[i] = poseidon_hash(inputs.subspan(i * arity, arity));
}

}  // namespace pvmark
