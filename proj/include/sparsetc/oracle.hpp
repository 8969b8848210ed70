#pragma once

#include "sparsetc/expr.hpp"

namespace sparsetc {

/// Brute-force evaluation over the full iteration space. Every operand is
/// densified first; reductions sum in ascending index order. Cost is the
/// product of the index extents, so keep inputs small.
DenseArray eval_dense(const TensorExpr& e, const Bindings& bindings = {});

}  // namespace sparsetc
