#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sweepsim/params.h"

namespace sweepsim {

/// Version tag written as the top-level "schema" field of every report.
inline constexpr const char* kSchemaVersion = "1";

/// Parameter sets serialize with keys named exactly like the ModelParams
/// fields. Every key is required; unknown keys are rejected.
nlohmann::json params_to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

SimplexState simplex_from_json(const nlohmann::json& j);
nlohmann::json simplex_to_json(const SimplexState& s);

/// Hex SHA-1 of "blob <size>\0<content>", the way git hashes a file.
std::string git_blob_hash(std::string_view content);

/// Canonical (sorted-key, compact) dump used for hashing configs.
std::string canonical_dump(const nlohmann::json& j);

/// Thrown for schema violations; the message carries a path to the field.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sweepsim
