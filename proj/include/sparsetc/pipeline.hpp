#pragma once

#include <cstdint>
#include <optional>

#include "sparsetc/engine.hpp"
#include "sparsetc/tiler.hpp"

namespace sparsetc {

struct RunOptions {
  bool tiling = true;
  Index tile_size = kDefaultTileSize;
  CostModel cost_model;
  /// Replaces the inferred output format when set.
  std::optional<TensorFormat> output_format;
};

struct RunResult {
  Tensor tensor;
  /// True when every input was dense and the oracle evaluated the expression.
  bool dense_dispatch = false;
  TensorFormat inferred_format;
  std::optional<Schedule> schedule;
  OpCounter counters;
  std::int64_t wall_time_ns = 0;
};

/// infer_format, schedule and (optionally) tile.
Schedule plan(const TensorExpr& e, const RunOptions& options = {});

/// All-dense inputs go to eval_dense; everything else is planned and
/// executed.
RunResult run(const TensorExpr& e, const Bindings& bindings = {},
              const RunOptions& options = {});

}  // namespace sparsetc
