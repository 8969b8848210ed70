#pragma once

#include <cstdint>

#include "sparsetc/schedule.hpp"

namespace sparsetc {

struct OpCounter {
  std::uint64_t scalar_mults = 0;
  std::uint64_t scalar_adds = 0;
  std::uint64_t iterator_advances = 0;

  friend bool operator==(const OpCounter&, const OpCounter&) = default;
};

struct ExecutionResult {
  Tensor tensor;
  OpCounter counters;
};

/// Runs the loop nest described by `s` over the tensors of `e`.
///
/// Tensors named in `bindings` replace the ones captured in the expression.
/// Multiplications co-iterate by ordered intersection, additions by ordered
/// union and dense operands are located directly. Throws ShapeError on
/// inconsistent extents, ParseError for unbound tensors and Error when the
/// schedule does not fit the expression.
ExecutionResult execute(const TensorExpr& e, const Schedule& s, const Bindings& bindings = {});

}  // namespace sparsetc
