#pragma once

#include <json.hpp>

#include "rsolve/core.hpp"
#include "rsolve/problems.hpp"

namespace rsolve {

using Json = nlohmann::json;

// Canonical instance schema, one JSON object per instance. Variable, node and
// literal indices are 1-based on the wire.
Json to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const Json& j);

Json to_json(const GeneratorParams& params);
/// Missing fields keep their defaults; unknown fields are rejected.
GeneratorParams generator_params_from_json(const Json& j);

Json key_to_json(SubInstanceKey key, int n);

/// {"phi", "psi", "holds", "violations": [{"k", "xi", "lhs", "rhs"}]}
Json to_json(const BoundReport& report, int n);

/// Stable identifier derived from the canonical serialization (FNV-1a, hex).
std::string instance_id(const ProblemInstance& instance);

}  // namespace rsolve
