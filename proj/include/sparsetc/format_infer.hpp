#pragma once

#include <string>
#include <vector>

#include "sparsetc/expr.hpp"

namespace sparsetc {

enum class LevelClass { Dense, Sparse, Absent };

std::string_view to_string(LevelClass c);

/// Storage class of index `var` for the value of `node`. Multiplication by a
/// sparse level yields sparse, addition of a dense level yields dense, and
/// operands that do not use `var` are neutral.
LevelClass infer_level(const Expr& node, const IndexVar& var);

/// Output format: one level per output index in written order; sparse
/// levels become compressed.
TensorFormat infer_format(const TensorExpr& e);

/// Node-by-node record of infer_level, for --explain-format.
struct LevelDerivation {
  std::string node;  // "A(i,k)", "*", "+", "sum k"
  LevelClass result;
  std::vector<LevelDerivation> children;
};

LevelDerivation derive_level(const Expr& node, const IndexVar& var);

}  // namespace sparsetc
