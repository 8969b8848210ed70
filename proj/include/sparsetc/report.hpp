#pragma once

#include "json.hpp"
#include "sparsetc/pipeline.hpp"

namespace sparsetc {

nlohmann::json to_json(const TensorFormat& f);
nlohmann::json to_json(const OpCounter& c);
nlohmann::json to_json(const Schedule& s);

/// Per output index: the node-by-node level derivation.
nlohmann::json format_derivation_json(const TensorExpr& e);

/// {expression, path, inferred_format, output_format, schedule, counters,
/// wall_time_ns}.
nlohmann::json run_report(const TensorExpr& e, const RunResult& r);

}  // namespace sparsetc
