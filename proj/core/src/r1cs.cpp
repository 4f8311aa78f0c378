#include "pvmark/r1cs.hpp"

#include <algorithm>
#include <string>

#include "pvmark/error.hpp"
#include "pvmark/json_io.hpp"

namespace pvmark {

using nlohmann::json;

namespace {

FieldElement dot(std::span<const Term> row, std::span<const FieldElement> z) {
  FieldElement acc;
  for (const Term& t : row) acc += t.coeff * z[t.column];
  return acc;
}

json row_to_json(std::span<const Term> row) {
  json a = json::array();
  for (const Term& t : row) a.push_back(json::array({t.column, t.coeff.to_hex()}));
  return a;
}

std::vector<Term> row_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kParseError, "row must be an array");
  std::vector<Term> out;
  for (const json& t : j) {
    if (!t.is_array() || t.size() != 2 || !t[0].is_number_unsigned()) {
      throw Error(ErrorCode::kParseError, "term must be [column, coeff]");
    }
    out.push_back({t[0].get<uint32_t>(), fe_from_json(t[1])});
  }
  return out;
}

void hash_matrix(Sha256Stream& s, const SparseMatrix& m) {
  s.update_u64(m.rows());
  for (size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    s.update_u64(row.size());
    for (const Term& t : row) {
      s.update_u64(t.column);
      s.update(t.coeff.to_bytes());
    }
  }
}

}  // namespace

void SparseMatrix::push_row(std::span<const Term> terms) {
  terms_.insert(terms_.end(), terms.begin(), terms.end());
  row_start_.push_back(terms_.size());
}

void SparseMatrix::reserve(size_t rows, size_t nonzeros) {
  row_start_.reserve(rows + 1);
  terms_.reserve(nonzeros);
}

std::vector<FieldElement> SparseMatrix::multiply(std::span<const FieldElement> z) const {
  std::vector<FieldElement> out(rows());
  for (size_t i = 0; i < rows(); ++i) out[i] = dot(row(i), z);
  return out;
}

bool LookupTable::contains(const FieldElement& v) const {
  return std::binary_search(values.begin(), values.end(), v);
}

LookupTable LookupTable::bytes() {
  LookupTable t;
  t.name = "byte";
  for (uint64_t v = 0; v < 256; ++v) t.values.emplace_back(v);
  return t;
}

ConstraintSystem::ConstraintSystem(size_t num_public, size_t num_witness)
    : num_public_(num_public), num_witness_(num_witness) {}

void ConstraintSystem::check_columns(std::span<const Term> terms) const {
  for (const Term& t : terms) {
    if (t.column >= num_columns()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "column " + std::to_string(t.column) + " of " + std::to_string(num_columns()));
    }
  }
}

size_t ConstraintSystem::enforce(std::span<const Term> a, std::span<const Term> b,
                                 std::span<const Term> c) {
  check_columns(a);
  check_columns(b);
  check_columns(c);
  a_.push_row(a);
  b_.push_row(b);
  c_.push_row(c);
  return a_.rows() - 1;
}

size_t ConstraintSystem::enforce(const RowSpec& row) { return enforce(row.a, row.b, row.c); }

uint32_t ConstraintSystem::add_table(LookupTable table) {
  std::sort(table.values.begin(), table.values.end());
  table.values.erase(std::unique(table.values.begin(), table.values.end()), table.values.end());
  tables_.push_back(std::move(table));
  return static_cast<uint32_t>(tables_.size() - 1);
}

void ConstraintSystem::assert_lookup(uint32_t column, uint32_t table) {
  if (column >= num_columns() || table >= tables_.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "lookup column or table");
  }
  lookups_.push_back({column, table});
}

void ConstraintSystem::reserve(size_t rows, size_t nonzeros) {
  a_.reserve(rows, nonzeros / 3);
  b_.reserve(rows, nonzeros / 3);
  c_.reserve(rows, nonzeros / 3);
}

Sha256Digest ConstraintSystem::digest() const {
  Sha256Stream s;
  s.update("pvmark/r1cs/v1");
  s.update_u64(num_public_);
  s.update_u64(num_witness_);
  hash_matrix(s, a_);
  hash_matrix(s, b_);
  hash_matrix(s, c_);
  s.update_u64(tables_.size());
  for (const auto& t : tables_) {
    s.update_u64(t.name.size());
    s.update(t.name);
    s.update_u64(t.values.size());
    for (const auto& v : t.values) s.update(v.to_bytes());
  }
  s.update_u64(lookups_.size());
  for (const auto& l : lookups_) {
    s.update_u64(l.column);
    s.update_u64(l.table);
  }
  return s.finish();
}

void check_shape(const ConstraintSystem& cs, const Assignment& asg) {
  if (asg.pub.size() != cs.num_public() || asg.wit.size() != cs.num_witness()) {
    throw Error(ErrorCode::kShapeMismatch,
                "assignment has " + std::to_string(asg.pub.size()) + "+" +
                    std::to_string(asg.wit.size()) + " values, system expects " +
                    std::to_string(cs.num_public()) + "+" + std::to_string(cs.num_witness()));
  }
}

std::vector<FieldElement> full_vector(const ConstraintSystem& cs, const Assignment& asg,
                                      const FieldElement& constant) {
  check_shape(cs, asg);
  std::vector<FieldElement> z;
  z.reserve(cs.num_columns());
  z.insert(z.end(), asg.pub.begin(), asg.pub.end());
  z.insert(z.end(), asg.wit.begin(), asg.wit.end());
  z.push_back(constant);
  return z;
}

RelaxedInstance RelaxedInstance::embed(const ConstraintSystem& cs, Assignment z) {
  check_shape(cs, z);
  return {std::move(z), FieldElement::one(),
          std::vector<FieldElement>(cs.num_constraints())};
}

SatReport is_satisfied(const ConstraintSystem& cs, const Assignment& asg) {
  const auto z = full_vector(cs, asg);
  SatReport rep;
  for (size_t i = 0; i < cs.num_constraints(); ++i) {
    if (dot(cs.a().row(i), z) * dot(cs.b().row(i), z) != dot(cs.c().row(i), z)) {
      rep.ok = false;
      rep.failing_row = i;
      return rep;
    }
  }
  for (size_t k = 0; k < cs.lookups().size(); ++k) {
    const auto& l = cs.lookups()[k];
    if (!cs.tables()[l.table].contains(z[l.column])) {
      rep.ok = false;
      rep.failing_lookup = k;
      return rep;
    }
  }
  return rep;
}

SatReport is_relaxed_satisfied(const ConstraintSystem& cs, const RelaxedInstance& inst) {
  if (cs.has_lookups()) {
    throw Error(ErrorCode::kLookupNotFoldable,
                "lookup assertions have no relaxed form; use a bitwise range mode");
  }
  if (inst.err.size() != cs.num_constraints()) {
    throw Error(ErrorCode::kShapeMismatch, "error vector length");
  }
  const auto z = full_vector(cs, inst.z, inst.mu);
  SatReport rep;
  for (size_t i = 0; i < cs.num_constraints(); ++i) {
    if (dot(cs.a().row(i), z) * dot(cs.b().row(i), z) !=
        inst.mu * dot(cs.c().row(i), z) + inst.err[i]) {
      rep.ok = false;
      rep.failing_row = i;
      return rep;
    }
  }
  return rep;
}

json to_json(const ConstraintSystem& cs) {
  json rows = json::array();
  for (size_t i = 0; i < cs.num_constraints(); ++i) {
    rows.push_back({{"a", row_to_json(cs.a().row(i))},
                    {"b", row_to_json(cs.b().row(i))},
                    {"c", row_to_json(cs.c().row(i))}});
  }
  json tables = json::array();
  for (const auto& t : cs.tables()) {
    tables.push_back({{"name", t.name}, {"values", fe_vector_to_json(t.values)}});
  }
  json lookups = json::array();
  for (const auto& l : cs.lookups()) lookups.push_back(json::array({l.column, l.table}));
  return {{"format", kFormatTag},
          {"num_public", cs.num_public()},
          {"num_witness", cs.num_witness()},
          {"rows", std::move(rows)},
          {"tables", std::move(tables)},
          {"lookups", std::move(lookups)}};
}

ConstraintSystem constraint_system_from_json(const json& j) {
  require_format(j);
  ConstraintSystem cs(require_u64(j, "num_public"), require_u64(j, "num_witness"));
  const json& rows = require(j, "rows");
  if (!rows.is_array()) throw Error(ErrorCode::kParseError, "rows must be an array");
  for (const json& r : rows) {
    cs.enforce(row_from_json(require(r, "a")), row_from_json(require(r, "b")),
               row_from_json(require(r, "c")));
  }
  if (j.contains("tables")) {
    for (const json& t : j["tables"]) {
      cs.add_table({require_string(t, "name"), fe_vector_from_json(require(t, "values"))});
    }
  }
  if (j.contains("lookups")) {
    for (const json& l : j["lookups"]) {
      if (!l.is_array() || l.size() != 2) throw Error(ErrorCode::kParseError, "lookup entry");
      cs.assert_lookup(l[0].get<uint32_t>(), l[1].get<uint32_t>());
    }
  }
  return cs;
}

json to_json(const Assignment& asg) {
  return {{"public", fe_vector_to_json(asg.pub)}, {"witness", fe_vector_to_json(asg.wit)}};
}

Assignment assignment_from_json(const json& j) {
  return {fe_vector_from_json(require(j, "public")), fe_vector_from_json(require(j, "witness"))};
}

json to_json(const RelaxedInstance& inst) {
  return {{"z", to_json(inst.z)}, {"mu", fe_to_json(inst.mu)}, {"err", fe_vector_to_json(inst.err)}};
}

RelaxedInstance relaxed_instance_from_json(const json& j) {
  return {assignment_from_json(require(j, "z")), fe_from_json(require(j, "mu")),
          fe_vector_from_json(require(j, "err"))};
}

}  // namespace pvmark
