#pragma once

#include "qcert/mub.hpp"
#include "qcert/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <utility>

namespace qcert {
namespace io {

inline constexpr const char* kSchema = "qcert/1";
inline constexpr const char* kToolVersion = "qcert 0.1.0";

// Thrown for malformed or wrong-schema files; maps to CLI exit code 1.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// FNV-1a 64-bit content digest, hex-encoded; provenance metadata in
// certificates (tampering is caught by re-checking claims, not by the digest).
std::string digest(const std::string& bytes);

nlohmann::json ket_to_json(const Ket& k);
Ket ket_from_json(const nlohmann::json& j);
nlohmann::json operator_to_json(const BipartiteOperator& op);
BipartiteOperator operator_from_json(const nlohmann::json& j);

void save_ket(const std::string& path, const Ket& k);
Ket load_ket(const std::string& path);
void save_operator(const std::string& path, const BipartiteOperator& op);
BipartiteOperator load_operator(const std::string& path);

mub::MubFamily load_mub_family(const std::string& path);
void save_mub_family(const std::string& path, const mub::MubFamily& family);

std::pair<int, Vector> load_sic_fiducial(const std::string& path);

// Parses with schema validation; ParseError carries path and byte offset.
nlohmann::json parse_document(const std::string& path, const std::string& expected_kind = "");

}  // namespace io
}  // namespace qcert
