#pragma once

// Rank-1 constraint systems over the BN254 scalar field.
//
// Column layout is Z = [public, witness, 1].  A relaxed instance replaces the
// constant column by its scalar mu, so folding Z = Z1 + r Z2 and
// mu = mu1 + r mu2 stay consistent:
//   (A Z) o (B Z) = mu (C Z) + err.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "pvmark/field.hpp"
#include "pvmark/sha256.hpp"

namespace pvmark {

struct Term {
  uint32_t column;
  FieldElement coeff;

  bool operator==(const Term&) const = default;
};

// Compressed sparse rows.
class SparseMatrix {
 public:
  size_t rows() const { return row_start_.size() - 1; }
  size_t nonzeros() const { return terms_.size(); }
  std::span<const Term> row(size_t i) const {
    return {terms_.data() + row_start_[i], row_start_[i + 1] - row_start_[i]};
  }
  void push_row(std::span<const Term> terms);
  void reserve(size_t rows, size_t nonzeros);

  // out[i] = <row i, z>
  std::vector<FieldElement> multiply(std::span<const FieldElement> z) const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::vector<size_t> row_start_{0};
  std::vector<Term> terms_;
};

struct RowSpec {
  std::vector<Term> a, b, c;
};

struct LookupTable {
  std::string name;
  std::vector<FieldElement> values;  // sorted by canonical value

  bool contains(const FieldElement& v) const;
  static LookupTable bytes();  // [0, 255]
  bool operator==(const LookupTable&) const = default;
};

struct LookupAssertion {
  uint32_t column;
  uint32_t table;

  bool operator==(const LookupAssertion&) const = default;
};

class ConstraintSystem {
 public:
  ConstraintSystem() = default;
  ConstraintSystem(size_t num_public, size_t num_witness);

  size_t num_public() const { return num_public_; }
  size_t num_witness() const { return num_witness_; }
  size_t num_columns() const { return num_public_ + num_witness_ + 1; }
  uint32_t one_column() const { return static_cast<uint32_t>(num_public_ + num_witness_); }
  size_t num_constraints() const { return a_.rows(); }
  size_t nonzeros() const { return a_.nonzeros() + b_.nonzeros() + c_.nonzeros(); }

  // Appends one row; throws IndexOutOfRange for a bad column.
  size_t enforce(const RowSpec& row);
  size_t enforce(std::span<const Term> a, std::span<const Term> b,
                 std::span<const Term> c);

  uint32_t add_table(LookupTable table);
  void assert_lookup(uint32_t column, uint32_t table);

  const SparseMatrix& a() const { return a_; }
  const SparseMatrix& b() const { return b_; }
  const SparseMatrix& c() const { return c_; }
  const std::vector<LookupTable>& tables() const { return tables_; }
  const std::vector<LookupAssertion>& lookups() const { return lookups_; }
  bool has_lookups() const { return !lookups_.empty(); }

  void reserve(size_t rows, size_t nonzeros);

  // SHA-256 over a canonical encoding of shape, rows and lookups.
  Sha256Digest digest() const;

  bool operator==(const ConstraintSystem&) const = default;

 private:
  void check_columns(std::span<const Term> terms) const;

  size_t num_public_ = 0;
  size_t num_witness_ = 0;
  SparseMatrix a_, b_, c_;
  std::vector<LookupTable> tables_;
  std::vector<LookupAssertion> lookups_;
};

struct Assignment {
  std::vector<FieldElement> pub;
  std::vector<FieldElement> wit;

  bool operator==(const Assignment&) const = default;
};

// [pub, wit, constant]
std::vector<FieldElement> full_vector(const ConstraintSystem& cs, const Assignment& asg,
                                      const FieldElement& constant = FieldElement::one());

struct RelaxedInstance {
  Assignment z;
  FieldElement mu;
  std::vector<FieldElement> err;

  // (z, 1, 0)
  static RelaxedInstance embed(const ConstraintSystem& cs, Assignment z);
  bool operator==(const RelaxedInstance&) const = default;
};

struct SatReport {
  bool ok = true;
  std::optional<size_t> failing_row;
  std::optional<size_t> failing_lookup;

  explicit operator bool() const { return ok; }
};

// ShapeMismatch on wrong vector lengths.
SatReport is_satisfied(const ConstraintSystem& cs, const Assignment& asg);
// LookupNotFoldable if the system carries lookup assertions.
SatReport is_relaxed_satisfied(const ConstraintSystem& cs, const RelaxedInstance& inst);

void check_shape(const ConstraintSystem& cs, const Assignment& asg);

nlohmann::json to_json(const ConstraintSystem& cs);
ConstraintSystem constraint_system_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Assignment& asg);
Assignment assignment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RelaxedInstance& inst);
RelaxedInstance relaxed_instance_from_json(const nlohmann::json& j);

}  // namespace pvmark
