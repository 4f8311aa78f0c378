#pragma once

// Circuit builder with paired witness generation, and the gadget catalog:
// hashes, range checks, comparisons, threshold flags, sums and Merkle
// membership.  Every gadget emits the same rows regardless of the values it
// is fed, so a verifier can rebuild a system from public data alone.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pvmark/field.hpp"
#include "pvmark/hash.hpp"
#include "pvmark/merkle.hpp"
#include "pvmark/r1cs.hpp"

namespace pvmark {

struct Var {
  uint32_t id = 0;
};

class LinearCombination {
 public:
  struct Entry {
    uint32_t id;
    FieldElement coeff;
  };

  LinearCombination() = default;
  LinearCombination(Var v);                  // NOLINT(google-explicit-constructor)
  LinearCombination(const FieldElement& c);  // NOLINT(google-explicit-constructor)

  LinearCombination& add(Var v, const FieldElement& coeff);
  LinearCombination& operator+=(const LinearCombination& o);
  LinearCombination& operator-=(const LinearCombination& o);
  LinearCombination& operator*=(const FieldElement& k);

  friend LinearCombination operator+(LinearCombination a, const LinearCombination& b) {
    return a += b;
  }
  friend LinearCombination operator-(LinearCombination a, const LinearCombination& b) {
    return a -= b;
  }
  friend LinearCombination operator*(LinearCombination a, const FieldElement& k) {
    return a *= k;
  }
  friend LinearCombination operator*(const FieldElement& k, LinearCombination a) {
    return a *= k;
  }

  // Sorts by id, merges duplicates and drops zero coefficients.
  void normalize();
  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
};

using LC = LinearCombination;

struct LayoutEntry {
  std::string name;
  size_t begin = 0;
  size_t count = 0;

  bool operator==(const LayoutEntry&) const = default;
};

struct Layout {
  std::vector<LayoutEntry> pub;
  std::vector<LayoutEntry> wit;

  bool operator==(const Layout&) const = default;
  // First public range with this name; throws IndexOutOfRange if absent.
  const LayoutEntry& public_range(std::string_view name) const;
};

class Builder {
 public:
  // record = false generates the witness only (no rows are stored).
  explicit Builder(bool record = true);

  static Var one() { return {kOneId}; }

  Var input(const FieldElement& value);
  Var witness(const FieldElement& value);

  FieldElement value(Var v) const;
  // Overwrites an allocated value, for publics known only after later rows.
  void set_value(Var v, const FieldElement& x);
  FieldElement eval(const LC& lc) const;

  void enforce(LC a, LC b, LC c);
  Var mul(const LC& a, const LC& b);
  // Returns a variable equal to lc, adding a row only when lc is not already
  // a bare variable.
  Var materialize(const LC& lc);
  void assert_equal(const LC& a, const LC& b);
  void assert_boolean(const LC& x);
  void assert_in_byte_table(Var v);

  // Names subsequent allocations in the layout.
  void section(std::string_view name);

  // Witness-repair probes may overwrite the flags the gadgets would pick.
  // Called once per threshold flag in emission order.
  std::function<bool(size_t index, bool honest)> flag_hook;
  bool decide_flag(bool honest);

  size_t num_rows() const { return rows_; }
  size_t num_public() const { return pub_.size(); }
  size_t num_witness() const { return wit_.size(); }
  bool recording() const { return record_; }

  ConstraintSystem constraint_system() const;
  Assignment assignment() const { return {pub_, wit_}; }
  const Layout& layout() const { return layout_; }

 private:
  static constexpr uint32_t kOneId = 0xffffffffu;
  static constexpr uint32_t kPublicBit = 0x80000000u;

  struct StoredMatrix {
    std::vector<size_t> start{0};
    std::vector<LC::Entry> entries;
  };

  void note_alloc(bool is_public);

  bool record_;
  size_t rows_ = 0;
  std::vector<FieldElement> pub_, wit_;
  StoredMatrix a_, b_, c_;
  std::vector<uint32_t> byte_lookups_;  // witness ids
  Layout layout_;
  std::string section_ = "misc";
  size_t flags_seen_ = 0;
};

enum class RangeMode {
  kBitwise,        // b(1 - b) = 0 per bit
  kByteLookup,     // one table-membership assertion per 8-bit limb
  kByteVanishing,  // prod_{v < 256} (limb - v) = 0 as a 255-row product chain
};

std::string_view range_mode_name(RangeMode m);
RangeMode parse_range_mode(std::string_view name);

inline constexpr unsigned kMaxRangeBits = 253;

// x = sum pieces; bit variables in bitwise mode, byte limbs otherwise (n_bits
// must then be a multiple of 8).  Unsatisfiable when x >= 2^n_bits.
std::vector<Var> bit_decompose(Builder& b, const LC& x, unsigned n_bits,
                               RangeMode mode = RangeMode::kBitwise);

// Asserts x1 < x2 for operands known to lie below 2^(n-1):
// x1 - x2 + 2^(n-1) must fit in n - 1 bits.
void assert_less_than(Builder& b, const LC& x1, const LC& x2, unsigned n,
                      RangeMode mode = RangeMode::kBitwise);

// flg = [r < threshold] for an arbitrary field element r and a constant
// 0 < threshold < p.  The prover selects one of four windows of power-of-two
// width, two tiling [0, t) and two tiling [t, p), and range-checks r minus
// the window start.  Returns flg as a linear combination of the selectors.
LC threshold_flag(Builder& b, const LC& r, const FieldElement& threshold,
                  RangeMode mode = RangeMode::kBitwise);

// out = sum terms, one row.
Var sum_gadget(Builder& b, std::span<const LC> terms);

// Digest of 2 or 3 inputs; matches hash().
LC hash_gadget(Builder& b, HashKind kind, std::span<const LC> inputs);
LC hash2_gadget(Builder& b, HashKind kind, const LC& x, const LC& y);
LC hash3_gadget(Builder& b, HashKind kind, const LC& x, const LC& y, const LC& z);

// Leaf H(y, pos, sk) and the path from `path` (siblings and bits become
// witnesses) recompute to `root`.  When gate is given the final equality is
// multiplied by it, so gate = 0 switches the check off.
void merkle_gadget(Builder& b, HashKind kind, const LC& y, const LC& pos, const LC& sk,
                   const MerklePath& path, const LC& root, const LC& gate = LC(Builder::one()));

}  // namespace pvmark
