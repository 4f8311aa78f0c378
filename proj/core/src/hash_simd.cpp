// Eight-lane field arithmetic on AVX-512 IFMA: elements are held as five
// 52-bit limbs in Montgomery form with R = 2^260.  Every kernel here is a
// batched twin of a scalar routine in hash.cpp and is tested against it.

#include "hash_simd.hpp"

#include <array>
#include <vector>

#include "pvmark/error.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define PVMARK_HAVE_IFMA 1
#include <immintrin.h>
#else
#define PVMARK_HAVE_IFMA 0
#endif

namespace pvmark::detail {

#if PVMARK_HAVE_IFMA

namespace {

#define PVMARK_IFMA __attribute__((target("avx512f,avx512ifma,avx512vl")))
#define PVMARK_IFMA_INLINE PVMARK_IFMA inline __attribute__((always_inline))

constexpr uint64_t kMask52 = (uint64_t{1} << 52) - 1;
constexpr int kGroups = 4;  // vectors interleaved per step
constexpr size_t kBlock = 8 * kGroups;

using Limbs = std::array<uint64_t, 5>;

Limbs split52(const U256& v) {
  Limbs r{};
  for (unsigned i = 0; i < 5; ++i) r[i] = v.extract(52 * i, 52);
  return r;
}

U256 join52(const Limbs& l) {
  U256 r;
  for (unsigned i = 0; i < 5; ++i) {
    const unsigned pos = 52 * i;
    r.limbs[pos / 64] |= l[i] << (pos % 64);
    if (pos % 64 > 12 && pos / 64 + 1 < 4) {
      r.limbs[pos / 64 + 1] |= l[i] >> (64 - pos % 64);
    }
  }
  return r;
}

struct Consts {
  Limbs p;
  uint64_t inv;  // -p^{-1} mod 2^52
  Limbs r2;      // 2^520 mod p
  FieldElement r_mod_p;  // 2^260 mod p
};

const Consts& consts() {
  static const Consts kC = [] {
    Consts c;
    c.p = split52(FieldElement::modulus());
    // Newton iteration for p^{-1} mod 2^64, then negate and truncate.
    const uint64_t p0 = FieldElement::modulus().limbs[0];
    uint64_t x = 1;
    for (int i = 0; i < 7; ++i) x *= 2 - p0 * x;
    c.inv = (0 - x) & kMask52;
    c.r_mod_p = FieldElement(2).pow(260);
    c.r2 = split52((c.r_mod_p * c.r_mod_p).to_u256());
    return c;
  }();
  return kC;
}

// Scalar conversion into the 2^260 Montgomery domain.
Limbs to_mont52(const FieldElement& x) {
  return split52((x * consts().r_mod_p).to_u256());
}

struct alignas(64) V5 {
  __m512i l[5];
};

PVMARK_IFMA_INLINE V5 broadcast(const Limbs& c) {
  V5 r;
  for (int i = 0; i < 5; ++i) r.l[i] = _mm512_set1_epi64(static_cast<long long>(c[i]));
  return r;
}

struct VConsts {
  V5 p;
  V5 two_p;
  __m512i inv;
  __m512i mask;
};

PVMARK_IFMA_INLINE VConsts make_vconsts() {
  VConsts v;
  v.p = broadcast(consts().p);
  v.two_p = broadcast(split52(FieldElement::modulus().shl(1)));
  v.inv = _mm512_set1_epi64(static_cast<long long>(consts().inv));
  v.mask = _mm512_set1_epi64(static_cast<long long>(kMask52));
  return v;
}

// Values inside the kernels are kept "lazy": limbs are normalized to 52 bits
// but the value may exceed p.  vmul returns a value below 2p whenever the
// integer product of its inputs is below 2^260 * p, which holds for inputs
// below 9p.  Canonical form is restored only on output.

PVMARK_IFMA_INLINE V5 normalize(__m512i t0, __m512i t1, __m512i t2, __m512i t3,
                                __m512i t4, const VConsts& k) {
  __m512i c;
  c = _mm512_srli_epi64(t0, 52); t0 = _mm512_and_si512(t0, k.mask); t1 = _mm512_add_epi64(t1, c);
  c = _mm512_srli_epi64(t1, 52); t1 = _mm512_and_si512(t1, k.mask); t2 = _mm512_add_epi64(t2, c);
  c = _mm512_srli_epi64(t2, 52); t2 = _mm512_and_si512(t2, k.mask); t3 = _mm512_add_epi64(t3, c);
  c = _mm512_srli_epi64(t3, 52); t3 = _mm512_and_si512(t3, k.mask); t4 = _mm512_add_epi64(t4, c);
  V5 r;
  r.l[0] = t0; r.l[1] = t1; r.l[2] = t2; r.l[3] = t3; r.l[4] = t4;
  return r;
}

// Subtracts m (a broadcast multiple of p) when the value is at least m.
PVMARK_IFMA_INLINE V5 cond_sub(const V5& t, const V5& m, const VConsts& k) {
  __m512i s0 = _mm512_sub_epi64(t.l[0], m.l[0]);
  __m512i s1 = _mm512_sub_epi64(_mm512_sub_epi64(t.l[1], m.l[1]), _mm512_srli_epi64(s0, 63));
  s0 = _mm512_and_si512(s0, k.mask);
  __m512i s2 = _mm512_sub_epi64(_mm512_sub_epi64(t.l[2], m.l[2]), _mm512_srli_epi64(s1, 63));
  s1 = _mm512_and_si512(s1, k.mask);
  __m512i s3 = _mm512_sub_epi64(_mm512_sub_epi64(t.l[3], m.l[3]), _mm512_srli_epi64(s2, 63));
  s2 = _mm512_and_si512(s2, k.mask);
  __m512i s4 = _mm512_sub_epi64(_mm512_sub_epi64(t.l[4], m.l[4]), _mm512_srli_epi64(s3, 63));
  s3 = _mm512_and_si512(s3, k.mask);
  const __mmask8 neg = _mm512_cmplt_epi64_mask(s4, _mm512_setzero_si512());
  V5 r;
  r.l[0] = _mm512_mask_blend_epi64(neg, s0, t.l[0]);
  r.l[1] = _mm512_mask_blend_epi64(neg, s1, t.l[1]);
  r.l[2] = _mm512_mask_blend_epi64(neg, s2, t.l[2]);
  r.l[3] = _mm512_mask_blend_epi64(neg, s3, t.l[3]);
  r.l[4] = _mm512_mask_blend_epi64(neg, s4, t.l[4]);
  return r;
}

PVMARK_IFMA_INLINE V5 vadd(const V5& a, const V5& b, const VConsts& k) {
  return normalize(
      _mm512_add_epi64(a.l[0], b.l[0]), _mm512_add_epi64(a.l[1], b.l[1]),
      _mm512_add_epi64(a.l[2], b.l[2]), _mm512_add_epi64(a.l[3], b.l[3]),
      _mm512_add_epi64(a.l[4], b.l[4]), k);
}

PVMARK_IFMA_INLINE V5 vmul(const V5& a, const V5& b, const VConsts& k) {
  const __m512i zero = _mm512_setzero_si512();
  __m512i t0 = zero, t1 = zero, t2 = zero, t3 = zero, t4 = zero, t5 = zero;
  for (int i = 0; i < 5; ++i) {
    const __m512i bi = b.l[i];
    t0 = _mm512_madd52lo_epu64(t0, a.l[0], bi);
    t1 = _mm512_madd52lo_epu64(t1, a.l[1], bi);
    t2 = _mm512_madd52lo_epu64(t2, a.l[2], bi);
    t3 = _mm512_madd52lo_epu64(t3, a.l[3], bi);
    t4 = _mm512_madd52lo_epu64(t4, a.l[4], bi);
    t1 = _mm512_madd52hi_epu64(t1, a.l[0], bi);
    t2 = _mm512_madd52hi_epu64(t2, a.l[1], bi);
    t3 = _mm512_madd52hi_epu64(t3, a.l[2], bi);
    t4 = _mm512_madd52hi_epu64(t4, a.l[3], bi);
    t5 = _mm512_madd52hi_epu64(t5, a.l[4], bi);
    const __m512i m = _mm512_madd52lo_epu64(zero, t0, k.inv);
    t0 = _mm512_madd52lo_epu64(t0, m, k.p.l[0]);
    t1 = _mm512_madd52lo_epu64(t1, m, k.p.l[1]);
    t2 = _mm512_madd52lo_epu64(t2, m, k.p.l[2]);
    t3 = _mm512_madd52lo_epu64(t3, m, k.p.l[3]);
    t4 = _mm512_madd52lo_epu64(t4, m, k.p.l[4]);
    t1 = _mm512_madd52hi_epu64(t1, m, k.p.l[0]);
    t2 = _mm512_madd52hi_epu64(t2, m, k.p.l[1]);
    t3 = _mm512_madd52hi_epu64(t3, m, k.p.l[2]);
    t4 = _mm512_madd52hi_epu64(t4, m, k.p.l[3]);
    t5 = _mm512_madd52hi_epu64(t5, m, k.p.l[4]);
    t0 = _mm512_add_epi64(t1, _mm512_srli_epi64(t0, 52));
    t1 = t2;
    t2 = t3;
    t3 = t4;
    t4 = t5;
    t5 = zero;
  }
  return normalize(t0, t1, t2, t3, t4, k);
}

// sum_n a[n] * b[n] / 2^260 with a single reduction; below 2p when the
// integer sum is below 2^260 * p.
template <int N>
PVMARK_IFMA_INLINE V5 vsop(const V5* const (&a)[N], const V5* const (&b)[N],
                           const VConsts& k) {
  const __m512i zero = _mm512_setzero_si512();
  __m512i t[11];
  for (int i = 0; i < 11; ++i) t[i] = zero;
  for (int n = 0; n < N; ++n) {
    for (int i = 0; i < 5; ++i) {
      const __m512i bi = b[n]->l[i];
      for (int j = 0; j < 5; ++j) {
        t[i + j] = _mm512_madd52lo_epu64(t[i + j], a[n]->l[j], bi);
        t[i + j + 1] = _mm512_madd52hi_epu64(t[i + j + 1], a[n]->l[j], bi);
      }
    }
  }
  for (int i = 0; i < 5; ++i) {
    const __m512i m = _mm512_madd52lo_epu64(zero, t[i], k.inv);
    for (int j = 0; j < 5; ++j) {
      t[i + j] = _mm512_madd52lo_epu64(t[i + j], m, k.p.l[j]);
      t[i + j + 1] = _mm512_madd52hi_epu64(t[i + j + 1], m, k.p.l[j]);
    }
    t[i + 1] = _mm512_add_epi64(t[i + 1], _mm512_srli_epi64(t[i], 52));
  }
  return normalize(t[5], t[6], t[7], t[8], t[9], k);
}

PVMARK_IFMA_INLINE V5 vpow5(const V5& x, const VConsts& k) {
  const V5 x2 = vmul(x, x, k);
  const V5 x4 = vmul(x2, x2, k);
  return vmul(x4, x, k);
}

// Loads up to 8 canonical elements (missing lanes are zero) and converts
// them into the Montgomery domain.
PVMARK_IFMA V5 load_lanes(const FieldElement* src, size_t n, const VConsts& k,
                          const V5& r2, size_t stride = 1) {
  alignas(64) uint64_t buf[5][8] = {};
  for (size_t lane = 0; lane < n; ++lane) {
    const Limbs l = split52(src[lane * stride].to_u256());
    for (int i = 0; i < 5; ++i) buf[i][lane] = l[i];
  }
  V5 v;
  for (int i = 0; i < 5; ++i) v.l[i] = _mm512_load_si512(buf[i]);
  return vmul(v, r2, k);
}

PVMARK_IFMA void store_lanes(const V5& v, FieldElement* dst, size_t n,
                             const VConsts& k) {
  V5 one;
  one.l[0] = _mm512_set1_epi64(1);
  for (int i = 1; i < 5; ++i) one.l[i] = _mm512_setzero_si512();
  const V5 plain = cond_sub(vmul(v, one, k), k.p, k);
  alignas(64) uint64_t buf[5][8];
  for (int i = 0; i < 5; ++i) _mm512_store_si512(buf[i], plain.l[i]);
  for (size_t lane = 0; lane < n; ++lane) {
    Limbs l;
    for (int i = 0; i < 5; ++i) l[i] = buf[i][lane];
    dst[lane] = FieldElement::from_u256(join52(l));
  }
}

// out[i] = h_i + x_i + E_{h_i}(x_i).  hs == nullptr means every lane uses h.
PVMARK_IFMA void mimc_kernel(const FieldElement& h, const FieldElement* hs,
                             std::span<const FieldElement> xs,
                             std::span<FieldElement> out,
                             const MimcParams& params) {
  const VConsts k = make_vconsts();
  const V5 r2 = broadcast(consts().r2);
  std::vector<V5> kc(params.round_constants.size());
  for (size_t i = 0; i < kc.size(); ++i) {
    kc[i] = broadcast(to_mont52(hs ? params.round_constants[i]
                                   : h + params.round_constants[i]));
  }
  const V5 two_h = broadcast(to_mont52(h + h));

  for (size_t base = 0; base < xs.size(); base += kBlock) {
    V5 x[kGroups], y[kGroups], key[kGroups];
    size_t lanes[kGroups];
    for (int g = 0; g < kGroups; ++g) {
      const size_t start = base + 8 * g;
      lanes[g] = start < xs.size() ? std::min<size_t>(8, xs.size() - start) : 0;
      const size_t at = std::min(start, xs.size());
      x[g] = load_lanes(xs.data() + at, lanes[g], k, r2);
      y[g] = x[g];
      if (hs) key[g] = load_lanes(hs + at, lanes[g], k, r2);
    }
    // Bounds: y < 2p before each round, key < 2p, constants < p.
    for (const V5& c : kc) {
      if (hs) {
        for (int g = 0; g < kGroups; ++g) y[g] = vadd(vadd(y[g], key[g], k), c, k);
      } else {
        for (int g = 0; g < kGroups; ++g) y[g] = vadd(y[g], c, k);
      }
      V5 y2[kGroups], y4[kGroups];
      for (int g = 0; g < kGroups; ++g) y2[g] = vmul(y[g], y[g], k);
      for (int g = 0; g < kGroups; ++g) y4[g] = vmul(y2[g], y2[g], k);
      for (int g = 0; g < kGroups; ++g) y4[g] = vmul(y4[g], y2[g], k);
      for (int g = 0; g < kGroups; ++g) y[g] = vmul(y4[g], y[g], k);
    }
    for (int g = 0; g < kGroups; ++g) {
      if (lanes[g] == 0) continue;
      V5 r = vadd(y[g], x[g], k);
      if (hs) {
        r = vadd(r, vadd(key[g], key[g], k), k);
      } else {
        r = vadd(r, two_h, k);
      }
      store_lanes(r, out.data() + base + 8 * g, lanes[g], k);
    }
  }
}

struct PoseidonVConsts {
  std::vector<V5> rc;        // full rounds, round-major
  std::vector<V5> mds;       // t*t
  std::vector<V5> partial_c; // per partial round
  std::vector<V5> row;       // per partial round, t entries
  std::vector<V5> col;       // per partial round, t-1 entries
  std::vector<V5> tail;      // (t-1)^2
  std::vector<V5> mid_rc;    // t
};

PVMARK_IFMA void fill_poseidon_consts(const PoseidonParams& p,
                                      PoseidonVConsts& c) {
  const unsigned t = p.t;
  for (unsigned r = 0; r < p.full_rounds + p.partial_rounds; ++r) {
    for (unsigned i = 0; i < t; ++i) c.rc.push_back(broadcast(to_mont52(p.rc(r, i))));
  }
  for (unsigned i = 0; i < t; ++i) {
    for (unsigned j = 0; j < t; ++j) c.mds.push_back(broadcast(to_mont52(p.mds[i][j])));
  }
  const auto& o = p.optimized;
  for (unsigned j = 0; j < p.partial_rounds; ++j) {
    c.partial_c.push_back(broadcast(to_mont52(o.partial_constants[j])));
    for (unsigned d = 0; d < t; ++d) c.row.push_back(broadcast(to_mont52(o.first_row[j][d])));
    for (unsigned d = 0; d + 1 < t; ++d) c.col.push_back(broadcast(to_mont52(o.first_col[j][d])));
  }
  for (unsigned a = 0; a + 1 < t; ++a) {
    for (unsigned b = 0; b + 1 < t; ++b) c.tail.push_back(broadcast(to_mont52(o.tail[a][b])));
  }
  for (unsigned i = 0; i < t; ++i) {
    c.mid_rc.push_back(broadcast(to_mont52(o.second_half_first_constants[i])));
  }
}

// Round inputs are below 2p; the S-box inputs stay below 3p and the MDS sum of
// t products below 2p each is far under 2^260 * p.
template <unsigned T>
PVMARK_IFMA_INLINE void v_full_round(V5 (&s)[T][kGroups], const V5* rc,
                                     const PoseidonVConsts& c, const VConsts& k) {
  V5 x[T][kGroups];
  for (unsigned i = 0; i < T; ++i) {
    for (int g = 0; g < kGroups; ++g) x[i][g] = vpow5(vadd(s[i][g], rc[i], k), k);
  }
  for (unsigned i = 0; i < T; ++i) {
    for (int g = 0; g < kGroups; ++g) {
      const V5* a[T];
      const V5* b[T];
      for (unsigned j = 0; j < T; ++j) {
        a[j] = &x[j][g];
        b[j] = &c.mds[i * T + j];
      }
      s[i][g] = vsop<T>(a, b, k);
    }
  }
}

// Lane inputs: the first |prefix| rate elements are shared by all lanes, the
// rest come from rows (width elements per lane, n lanes in total).
template <unsigned T>
PVMARK_IFMA void poseidon_kernel(std::span<const FieldElement> prefix,
                                 const FieldElement* rows, size_t width, size_t n,
                                 std::span<FieldElement> out,
                                 const PoseidonParams& p,
                                 const PoseidonVConsts& c) {
  const VConsts k = make_vconsts();
  const V5 r2 = broadcast(consts().r2);
  const unsigned half = p.full_rounds / 2;
  V5 zero;
  for (int i = 0; i < 5; ++i) zero.l[i] = _mm512_setzero_si512();
  V5 pre[2];
  for (size_t i = 0; i < prefix.size(); ++i) pre[i] = broadcast(to_mont52(prefix[i]));

  for (size_t base = 0; base < n; base += kBlock) {
    V5 s[T][kGroups];
    size_t lanes[kGroups];
    for (int g = 0; g < kGroups; ++g) {
      const size_t start = base + 8 * g;
      lanes[g] = start < n ? std::min<size_t>(8, n - start) : 0;
      const size_t at = std::min(start, n) * width;
      s[0][g] = zero;
      for (unsigned i = 0; i + 1 < T; ++i) {
        s[i + 1][g] = i < prefix.size()
                          ? pre[i]
                          : load_lanes(rows + at + (i - prefix.size()), lanes[g], k,
                                       r2, width);
      }
    }
    for (unsigned r = 0; r < half; ++r) v_full_round<T>(s, &c.rc[r * T], c, k);

    // Partial rounds in S-box-first lane order: v[0] = s[T-1], v[d] = s[d-1].
    V5 v[T][kGroups];
    for (int g = 0; g < kGroups; ++g) {
      v[0][g] = s[T - 1][g];
      for (unsigned d = 1; d < T; ++d) v[d][g] = s[d - 1][g];
    }
    // Every v[d] stays below 2p.
    for (unsigned j = 0; j < p.partial_rounds; ++j) {
      const V5* row = &c.row[j * T];
      const V5* col = &c.col[j * (T - 1)];
      V5 s0[kGroups];
      for (int g = 0; g < kGroups; ++g) s0[g] = vpow5(vadd(v[0][g], c.partial_c[j], k), k);
      for (int g = 0; g < kGroups; ++g) {
        const V5* a[T];
        const V5* b[T];
        a[0] = &s0[g];
        b[0] = &row[0];
        for (unsigned d = 1; d < T; ++d) {
          a[d] = &v[d][g];
          b[d] = &row[d];
        }
        const V5 acc = vsop<T>(a, b, k);
        for (unsigned d = 1; d < T; ++d) {
          v[d][g] = cond_sub(vadd(v[d][g], vmul(col[d - 1], s0[g], k), k), k.two_p, k);
        }
        v[0][g] = acc;
      }
    }
    for (int g = 0; g < kGroups; ++g) {
      s[T - 1][g] = v[0][g];
      for (unsigned a = 0; a + 1 < T; ++a) {
        const V5* x[T - 1];
        const V5* y[T - 1];
        for (unsigned b = 0; b + 1 < T; ++b) {
          x[b] = &v[b + 1][g];
          y[b] = &c.tail[a * (T - 1) + b];
        }
        s[a][g] = vsop<T - 1>(x, y, k);
      }
    }
    v_full_round<T>(s, c.mid_rc.data(), c, k);
    for (unsigned r = half + p.partial_rounds + 1; r < p.full_rounds + p.partial_rounds; ++r) {
      v_full_round<T>(s, &c.rc[r * T], c, k);
    }
    for (int g = 0; g < kGroups; ++g) {
      if (lanes[g] == 0) continue;
      store_lanes(s[1][g], out.data() + base + 8 * g, lanes[g], k);
    }
  }
}

}  // namespace

bool simd_supported() {
  static const bool kSupported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx512f") &&
           __builtin_cpu_supports("avx512ifma") &&
           __builtin_cpu_supports("avx512vl");
  }();
  return kSupported;
}

void simd_mimc_absorb_batch(const FieldElement& h,
                            std::span<const FieldElement> xs,
                            std::span<FieldElement> out,
                            const MimcParams& params) {
  mimc_kernel(h, nullptr, xs, out, params);
}

void simd_mimc_absorb_lanes(std::span<const FieldElement> hs,
                            std::span<const FieldElement> xs,
                            std::span<FieldElement> out,
                            const MimcParams& params) {
  mimc_kernel(FieldElement(), hs.data(), xs, out, params);
}

namespace {

const PoseidonVConsts* standard_vconsts(const PoseidonParams& params) {
  static const PoseidonVConsts kT3 = [] {
    PoseidonVConsts c;
    fill_poseidon_consts(PoseidonParams::standard(3), c);
    return c;
  }();
  static const PoseidonVConsts kT4 = [] {
    PoseidonVConsts c;
    fill_poseidon_consts(PoseidonParams::standard(4), c);
    return c;
  }();
  if (&params == &PoseidonParams::standard(3)) return &kT3;
  if (&params == &PoseidonParams::standard(4)) return &kT4;
  return nullptr;
}

void run_poseidon(std::span<const FieldElement> prefix, const FieldElement* rows,
                  size_t width, size_t n, std::span<FieldElement> out,
                  const PoseidonParams& params) {
  PoseidonVConsts local;
  const PoseidonVConsts* c = standard_vconsts(params);
  if (c == nullptr) {
    fill_poseidon_consts(params, local);
    c = &local;
  }
  if (params.t == 3) {
    poseidon_kernel<3>(prefix, rows, width, n, out, params, *c);
  } else if (params.t == 4) {
    poseidon_kernel<4>(prefix, rows, width, n, out, params, *c);
  } else {
    throw Error(ErrorCode::kArityUnsupported, "vector Poseidon width");
  }
}

}  // namespace

void simd_poseidon_batch(std::span<const FieldElement> prefix,
                         std::span<const FieldElement> last,
                         std::span<FieldElement> out,
                         const PoseidonParams& params) {
  run_poseidon(prefix, last.data(), 1, last.size(), out, params);
}

void simd_poseidon_lanes(std::span<const FieldElement> rows,
                         std::span<FieldElement> out,
                         const PoseidonParams& params) {
  run_poseidon({}, rows.data(), params.t - 1, out.size(), out, params);
}

#else

bool simd_supported() { return false; }

void simd_mimc_absorb_batch(const FieldElement&, std::span<const FieldElement>,
                            std::span<FieldElement>, const MimcParams&) {
  throw Error(ErrorCode::kInvalidParams, "vector kernels unavailable");
}

void simd_poseidon_batch(std::span<const FieldElement>,
                         std::span<const FieldElement>, std::span<FieldElement>,
                         const PoseidonParams&) {
  throw Error(ErrorCode::kInvalidParams, "vector kernels unavailable");
}

void simd_mimc_absorb_lanes(std::span<const FieldElement>,
                            std::span<const FieldElement>, std::span<FieldElement>,
                            const MimcParams&) {
  throw Error(ErrorCode::kInvalidParams, "vector kernels unavailable");
}

void simd_poseidon_lanes(std::span<const FieldElement>, std::span<FieldElement>,
                         const PoseidonParams&) {
  throw Error(ErrorCode::kInvalidParams, "vector kernels unavailable");
}

#endif

}  // namespace pvmark::detail
