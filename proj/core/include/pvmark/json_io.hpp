#pragma once

// JSON helpers shared by every serialized artifact.  Field elements are
// 0x-prefixed hex strings; documents carry "format": "pvmark/1".

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pvmark/field.hpp"
#include "pvmark/sha256.hpp"

namespace pvmark {

inline constexpr std::string_view kFormatTag = "pvmark/1";

nlohmann::json fe_to_json(const FieldElement& v);
FieldElement fe_from_json(const nlohmann::json& j);
nlohmann::json fe_vector_to_json(std::span<const FieldElement> v);
std::vector<FieldElement> fe_vector_from_json(const nlohmann::json& j);

// Member access that throws ParseError instead of nlohmann exceptions.
const nlohmann::json& require(const nlohmann::json& j, std::string_view key);
uint64_t require_u64(const nlohmann::json& j, std::string_view key);
std::string require_string(const nlohmann::json& j, std::string_view key);
void require_format(const nlohmann::json& j);
bool require_bool(const nlohmann::json& j, std::string_view key);
std::vector<uint64_t> require_u64_array(const nlohmann::json& j, std::string_view key);

nlohmann::json digest_to_json(const Sha256Digest& d);
Sha256Digest digest_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace pvmark
