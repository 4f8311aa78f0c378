#include "pvmark/gadgets.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "pvmark/error.hpp"

namespace pvmark {
namespace {

constexpr size_t kMaxLaneTerms = 16;

const std::vector<FieldElement>& powers_of_two() {
  static const std::vector<FieldElement> kPow = [] {
    std::vector<FieldElement> v(254);
    FieldElement x = FieldElement::one();
    for (auto& e : v) {
      e = x;
      x += x;
    }
    return v;
  }();
  return kPow;
}

struct RangePieces {
  std::vector<Var> limbs;
  std::vector<Var> bits;  // bits[0] is bit `low`
};

// x = sum_{k < low/8} limb_k 256^k + sum_{low <= i < n} bit_i 2^i.
RangePieces range_split(Builder& b, const LC& x, unsigned n, unsigned low,
                             RangeMode mode) {
  if (n > kMaxRangeBits) {
    throw Error(ErrorCode::kRangeTooWide,
                std::to_string(n) + "-bit range exceeds " + std::to_string(kMaxRangeBits));
  }
  const auto& pow2 = powers_of_two();
  const U256 v = b.eval(x).to_u256();
  LC recomposed;
  RangePieces out;
  for (unsigned k = 0; k < low / 8; ++k) {
    const Var limb = b.witness(FieldElement(v.extract(8 * k, 8)));
    out.limbs.push_back(limb);
    if (mode == RangeMode::kByteLookup) {
      b.assert_in_byte_table(limb);
    } else {
      Var acc = limb;
      for (uint64_t c = 1; c < 255; ++c) acc = b.mul(acc, LC(limb) - LC(FieldElement(c)));
      b.enforce(acc, LC(limb) - LC(FieldElement(255)), LC());
    }
    recomposed.add(limb, pow2[8 * k]);
  }
  out.bits.reserve(n - low);
  for (unsigned i = low; i < n; ++i) {
    const Var bit = b.witness(FieldElement(v.bit(i) ? 1 : 0));
    b.assert_boolean(bit);
    recomposed.add(bit, pow2[i]);
    out.bits.push_back(bit);
  }
  b.assert_equal(recomposed, x);
  return out;
}

Var pow5_gadget(Builder& b, LC x) {
  x.normalize();
  const Var x2 = b.mul(x, x);
  const Var x4 = b.mul(x2, x2);
  return b.mul(x4, x);
}

LC mimc_gadget(Builder& b, std::span<const LC> inputs) {
  const auto& consts = MimcParams::standard().round_constants;
  LC h;
  for (const LC& x : inputs) {
    const LC key = h;
    LC y = x;
    for (const FieldElement& c : consts) {
      LC u = y + key + LC(c);
      u.normalize();
      const Var u2 = b.mul(u, u);
      const Var u3 = b.mul(u2, u);
      const Var u6 = b.mul(u3, u3);
      y = b.mul(u6, u);
    }
    h = key + x + y + key;
    h.normalize();
  }
  return h;
}

LC poseidon_gadget(Builder& b, std::span<const LC> inputs) {
  const unsigned t = static_cast<unsigned>(inputs.size()) + 1;
  const auto& p = PoseidonParams::standard(t);
  const unsigned half = p.full_rounds / 2;
  const unsigned total = p.full_rounds + p.partial_rounds;
  std::vector<LC> s(t);
  for (unsigned i = 1; i < t; ++i) s[i] = inputs[i - 1];
  std::vector<LC> next(t);
  for (unsigned r = 0; r < total; ++r) {
    for (unsigned i = 0; i < t; ++i) s[i] += LC(p.rc(r, i));
    const bool full = r < half || r >= half + p.partial_rounds;
    if (full) {
      for (unsigned i = 0; i < t; ++i) s[i] = pow5_gadget(b, s[i]);
    } else {
      s[t - 1] = pow5_gadget(b, s[t - 1]);
    }
    for (unsigned i = 0; i < t; ++i) {
      LC acc;
      for (unsigned j = 0; j < t; ++j) acc += s[j] * p.mds[i][j];
      acc.normalize();
      if (!full && acc.size() > kMaxLaneTerms) acc = b.materialize(acc);
      next[i] = std::move(acc);
    }
    s.swap(next);
  }
  return s[1];
}

}  // namespace

// ------------------------------------------------------------ LinearCombination

LinearCombination::LinearCombination(Var v) : entries_{{v.id, FieldElement::one()}} {}

LinearCombination::LinearCombination(const FieldElement& c) {
  if (!c.is_zero()) entries_.push_back({Builder::one().id, c});
}

LinearCombination& LinearCombination::add(Var v, const FieldElement& coeff) {
  entries_.push_back({v.id, coeff});
  return *this;
}

LinearCombination& LinearCombination::operator+=(const LinearCombination& o) {
  entries_.insert(entries_.end(), o.entries_.begin(), o.entries_.end());
  return *this;
}

LinearCombination& LinearCombination::operator-=(const LinearCombination& o) {
  entries_.reserve(entries_.size() + o.entries_.size());
  for (const Entry& e : o.entries_) entries_.push_back({e.id, -e.coeff});
  return *this;
}

LinearCombination& LinearCombination::operator*=(const FieldElement& k) {
  if (k.is_zero()) {
    entries_.clear();
    return *this;
  }
  for (Entry& e : entries_) e.coeff *= k;
  return *this;
}

void LinearCombination::normalize() {
  if (entries_.size() > 1) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.id < b.id; });
    size_t out = 0;
    for (size_t i = 0; i < entries_.size();) {
      Entry merged = entries_[i];
      size_t j = i + 1;
      for (; j < entries_.size() && entries_[j].id == merged.id; ++j) {
        merged.coeff += entries_[j].coeff;
      }
      if (!merged.coeff.is_zero()) entries_[out++] = merged;
      i = j;
    }
    entries_.resize(out);
  } else if (entries_.size() == 1 && entries_[0].coeff.is_zero()) {
    entries_.clear();
  }
}

// ------------------------------------------------------------ Layout / Builder

const LayoutEntry& Layout::public_range(std::string_view name) const {
  for (const auto& e : pub) {
    if (e.name == name) return e;
  }
  throw Error(ErrorCode::kIndexOutOfRange, "no public range named " + std::string(name));
}

Builder::Builder(bool record) : record_(record) {}

void Builder::note_alloc(bool is_public) {
  auto& list = is_public ? layout_.pub : layout_.wit;
  const size_t index = is_public ? pub_.size() - 1 : wit_.size() - 1;
  if (!list.empty() && list.back().name == section_ &&
      list.back().begin + list.back().count == index) {
    ++list.back().count;
  } else {
    list.push_back({section_, index, 1});
  }
}

Var Builder::input(const FieldElement& value) {
  pub_.push_back(value);
  note_alloc(true);
  return {kPublicBit | static_cast<uint32_t>(pub_.size() - 1)};
}

Var Builder::witness(const FieldElement& value) {
  wit_.push_back(value);
  note_alloc(false);
  return {static_cast<uint32_t>(wit_.size() - 1)};
}

FieldElement Builder::value(Var v) const {
  if (v.id == kOneId) return FieldElement::one();
  if (v.id & kPublicBit) return pub_[v.id & ~kPublicBit];
  return wit_[v.id];
}

void Builder::set_value(Var v, const FieldElement& x) {
  if (v.id == kOneId) throw Error(ErrorCode::kInvalidParams, "the constant column is fixed");
  if (v.id & kPublicBit) {
    pub_.at(v.id & ~kPublicBit) = x;
  } else {
    wit_.at(v.id) = x;
  }
}

FieldElement Builder::eval(const LC& lc) const {
  FieldElement acc;
  for (const auto& e : lc.entries()) acc += e.coeff * value({e.id});
  return acc;
}

void Builder::enforce(LC a, LC b, LC c) {
  ++rows_;
  if (!record_) return;
  auto store = [](StoredMatrix& m, LC& lc) {
    lc.normalize();
    m.entries.insert(m.entries.end(), lc.entries().begin(), lc.entries().end());
    m.start.push_back(m.entries.size());
  };
  store(a_, a);
  store(b_, b);
  store(c_, c);
}

Var Builder::mul(const LC& a, const LC& b) {
  const Var w = witness(eval(a) * eval(b));
  enforce(a, b, w);
  return w;
}

Var Builder::materialize(const LC& lc) {
  LC n = lc;
  n.normalize();
  if (n.size() == 1 && n.entries()[0].id != kOneId && n.entries()[0].coeff.is_one()) {
    return {n.entries()[0].id};
  }
  const Var w = witness(eval(n));
  enforce(n, one(), w);
  return w;
}

void Builder::assert_equal(const LC& a, const LC& b) { enforce(a - b, one(), LC()); }

void Builder::assert_boolean(const LC& x) { enforce(x, LC(one()) - x, LC()); }

void Builder::assert_in_byte_table(Var v) {
  if (record_) byte_lookups_.push_back(v.id);
}

void Builder::section(std::string_view name) { section_ = std::string(name); }

bool Builder::decide_flag(bool honest) {
  const size_t index = flags_seen_++;
  return flag_hook ? flag_hook(index, honest) : honest;
}

ConstraintSystem Builder::constraint_system() const {
  if (!record_) throw Error(ErrorCode::kInvalidParams, "builder did not record rows");
  const size_t np = pub_.size();
  const size_t nw = wit_.size();
  ConstraintSystem cs(np, nw);
  auto column = [&](uint32_t id) -> uint32_t {
    if (id == kOneId) return static_cast<uint32_t>(np + nw);
    if (id & kPublicBit) return id & ~kPublicBit;
    return static_cast<uint32_t>(np + id);
  };
  cs.reserve(rows_, a_.entries.size() + b_.entries.size() + c_.entries.size());
  std::array<std::vector<Term>, 3> row;
  const std::array<const StoredMatrix*, 3> mats{&a_, &b_, &c_};
  for (size_t i = 0; i < rows_; ++i) {
    for (int m = 0; m < 3; ++m) {
      row[m].clear();
      for (size_t k = mats[m]->start[i]; k < mats[m]->start[i + 1]; ++k) {
        const auto& e = mats[m]->entries[k];
        row[m].push_back({column(e.id), e.coeff});
      }
      std::sort(row[m].begin(), row[m].end(),
                [](const Term& x, const Term& y) { return x.column < y.column; });
    }
    cs.enforce(row[0], row[1], row[2]);
  }
  if (!byte_lookups_.empty()) {
    const uint32_t table = cs.add_table(LookupTable::bytes());
    for (uint32_t id : byte_lookups_) cs.assert_lookup(column(id), table);
  }
  return cs;
}

// ------------------------------------------------------------ gadgets

std::string_view range_mode_name(RangeMode m) {
  switch (m) {
    case RangeMode::kBitwise: return "bitwise";
    case RangeMode::kByteLookup: return "byte_lookup";
    case RangeMode::kByteVanishing: return "byte_vanishing";
  }
  return "unknown";
}

RangeMode parse_range_mode(std::string_view name) {
  if (name == "bitwise") return RangeMode::kBitwise;
  if (name == "byte_lookup") return RangeMode::kByteLookup;
  if (name == "byte_vanishing") return RangeMode::kByteVanishing;
  throw Error(ErrorCode::kParseError, "unknown range mode '" + std::string(name) + "'");
}

std::vector<Var> bit_decompose(Builder& b, const LC& x, unsigned n_bits, RangeMode mode) {
  if (n_bits > kMaxRangeBits) {
    throw Error(ErrorCode::kRangeTooWide,
                std::to_string(n_bits) + "-bit decomposition exceeds " +
                    std::to_string(kMaxRangeBits));
  }
  if (mode == RangeMode::kBitwise) return range_split(b, x, n_bits, 0, mode).bits;
  if (n_bits % 8 != 0) {
    throw Error(ErrorCode::kInvalidParams, "byte range checks need a multiple of 8 bits");
  }
  return range_split(b, x, n_bits, n_bits, mode).limbs;
}

void assert_less_than(Builder& b, const LC& x1, const LC& x2, unsigned n, RangeMode mode) {
  if (n < 2 || n - 1 > kMaxRangeBits) {
    throw Error(ErrorCode::kRangeTooWide, "comparison width out of range");
  }
  bit_decompose(b, x1 - x2 + LC(powers_of_two()[n - 1]), n - 1, mode);
}

LC threshold_flag(Builder& b, const LC& r, const FieldElement& threshold, RangeMode mode) {
  if (threshold.is_zero()) throw Error(ErrorCode::kInvalidParams, "threshold must be positive");
  const U256 p = FieldElement::modulus();
  const U256 t = threshold.to_u256();
  U256 rest;
  sub_with_borrow(p, t, rest);
  const unsigned k_lo = t.bit_length() - 1;
  const unsigned k_hi = std::min(kMaxRangeBits, rest.bit_length() - 1);
  const unsigned k = std::max(k_lo, k_hi);
  const auto& pow2 = powers_of_two();
  const std::array<FieldElement, 4> start{
      FieldElement(), threshold - pow2[k_lo], threshold, -pow2[k_hi]};

  const U256 rv = b.eval(r).to_u256();
  const bool honest = rv < t;
  const bool flag = b.decide_flag(honest);
  unsigned sel;
  if (flag) {
    sel = (honest && rv < U256::pow2(k_lo)) ? 0 : 1;
  } else {
    U256 d;
    sub_with_borrow(rv, t, d);
    sel = (!honest && d < U256::pow2(k_hi)) ? 2 : 3;
  }

  std::array<Var, 4> s;
  LC total;
  for (unsigned j = 0; j < 4; ++j) {
    s[j] = b.witness(FieldElement(j == sel ? 1 : 0));
    b.assert_boolean(s[j]);
    total += s[j];
  }
  b.assert_equal(total, LC(FieldElement::one()));
  LC y = r;
  for (unsigned j = 1; j < 4; ++j) y.add(s[j], -start[j]);

  const unsigned low =
      mode == RangeMode::kBitwise ? 0 : 8 * (std::min(k_lo, k_hi) / 8);
  const auto bits = range_split(b, y, k, low, mode).bits;
  const LC below = LC(s[0]) + LC(s[1]);
  const LC above = LC(s[2]) + LC(s[3]);
  for (unsigned i = std::min(k_lo, k_hi); i < k; ++i) {
    b.enforce(bits[i - low], k_lo < k_hi ? below : above, LC());
  }
  return below;
}

Var sum_gadget(Builder& b, std::span<const LC> terms) {
  LC total;
  for (const LC& t : terms) total += t;
  total.normalize();
  const Var out = b.witness(b.eval(total));
  b.enforce(total, Builder::one(), out);
  return out;
}

LC hash_gadget(Builder& b, HashKind kind, std::span<const LC> inputs) {
  if (inputs.size() != 2 && inputs.size() != 3) {
    throw Error(ErrorCode::kArityUnsupported,
                "hash gadget takes 2 or 3 inputs, got " + std::to_string(inputs.size()));
  }
  return kind == HashKind::kMimc ? mimc_gadget(b, inputs) : poseidon_gadget(b, inputs);
}

LC hash2_gadget(Builder& b, HashKind kind, const LC& x, const LC& y) {
  const std::array<LC, 2> in{x, y};
  return hash_gadget(b, kind, in);
}

LC hash3_gadget(Builder& b, HashKind kind, const LC& x, const LC& y, const LC& z) {
  const std::array<LC, 3> in{x, y, z};
  return hash_gadget(b, kind, in);
}

void merkle_gadget(Builder& b, HashKind kind, const LC& y, const LC& pos, const LC& sk,
                   const MerklePath& path, const LC& root, const LC& gate) {
  if (path.siblings.size() != path.path_bits.size()) {
    throw Error(ErrorCode::kShapeMismatch, "siblings and path bits differ in length");
  }
  LC h = hash3_gadget(b, kind, y, pos, sk);
  for (size_t i = 0; i < path.siblings.size(); ++i) {
    const Var bit = b.witness(FieldElement(path.path_bits[i]));
    const Var sib = b.witness(path.siblings[i]);
    b.assert_boolean(bit);
    const Var m = b.mul(bit, h - LC(sib));
    const LC left = LC(sib) + LC(m);
    const LC right = h - LC(m);
    h = hash2_gadget(b, kind, left, right);
  }
  b.enforce(h - root, gate, LC());
}

}  // namespace pvmark
