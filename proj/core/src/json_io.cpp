#include "pvmark/json_io.hpp"

#include <fstream>

#include "pvmark/error.hpp"

namespace pvmark {

using nlohmann::json;

json fe_to_json(const FieldElement& v) { return v.to_hex(); }

FieldElement fe_from_json(const json& j) {
  if (!j.is_string()) throw Error(ErrorCode::kParseError, "field element must be a hex string");
  return FieldElement::from_hex(j.get<std::string>());
}

json fe_vector_to_json(std::span<const FieldElement> v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x.to_hex());
  return a;
}

std::vector<FieldElement> fe_vector_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kParseError, "expected an array of field elements");
  std::vector<FieldElement> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(fe_from_json(x));
  return out;
}

const json& require(const json& j, std::string_view key) {
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::kParseError, "missing field '" + std::string(key) + "'");
  }
  return *it;
}

uint64_t require_u64(const json& j, std::string_view key) {
  const json& v = require(j, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0)) {
    throw Error(ErrorCode::kParseError, "field '" + std::string(key) + "' must be a non-negative integer");
  }
  return v.get<uint64_t>();
}

std::string require_string(const json& j, std::string_view key) {
  const json& v = require(j, key);
  if (!v.is_string()) {
    throw Error(ErrorCode::kParseError, "field '" + std::string(key) + "' must be a string");
  }
  return v.get<std::string>();
}

void require_format(const json& j) {
  if (require_string(j, "format") != kFormatTag) {
    throw Error(ErrorCode::kParseError, "unsupported format tag");
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

bool require_bool(const json& j, std::string_view key) {
  const json& v = require(j, key);
  if (!v.is_boolean()) throw Error(ErrorCode::kParseError, "field '" + std::string(key) + "' must be a boolean");
  return v.get<bool>();
}

std::vector<uint64_t> require_u64_array(const json& j, std::string_view key) {
  const json& v = require(j, key);
  if (!v.is_array()) throw Error(ErrorCode::kParseError, "field '" + std::string(key) + "' must be an array");
  std::vector<uint64_t> out;
  out.reserve(v.size());
  for (const json& x : v) {
    if (!x.is_number_unsigned()) {
      throw Error(ErrorCode::kParseError, "field '" + std::string(key) + "' holds a non-integer");
    }
    out.push_back(x.get<uint64_t>());
  }
  return out;
}

json digest_to_json(const Sha256Digest& d) { return to_hex_string(d); }

Sha256Digest digest_from_json(const json& j) {
  if (!j.is_string() || j.get<std::string>().size() != 64) {
    throw Error(ErrorCode::kParseError, "digest must be 64 hex digits");
  }
  const std::string s = j.get<std::string>();
  Sha256Digest d{};
  for (size_t i = 0; i < 32; ++i) {
    unsigned v = 0;
    for (size_t k = 0; k < 2; ++k) {
      const char c = s[2 * i + k];
      unsigned nib;
      if (c >= '0' && c <= '9') nib = c - '0';
      else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
      else throw Error(ErrorCode::kParseError, "digest must be lowercase hex");
      v = v * 16 + nib;
    }
    d[i] = static_cast<uint8_t>(v);
  }
  return d;
}

}  // namespace pvmark
