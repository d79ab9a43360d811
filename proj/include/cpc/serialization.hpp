#pragma once

#include "json.hpp"

#include "cpc/codec.hpp"

namespace cpc {

/// {"variant": 1|2, "n": n, "subcodes": [{"parts": [...], "levels": [...]}, ...]}
nlohmann::json to_json(const ConcentricCode& code);

/// Accepts the document above; any extra keys (e.g. "design") are ignored.
/// Throws std::invalid_argument on schema or invariant violations.
ConcentricCode code_from_json(const nlohmann::json& doc);

}  // namespace cpc
