#include "sparsetc/format_infer.hpp"

#include <algorithm>

namespace sparsetc {

std::string_view to_string(LevelClass c) {
  switch (c) {
    case LevelClass::Dense: return "dense";
    case LevelClass::Sparse: return "sparse";
    case LevelClass::Absent: return "absent";
  }
  return "?";
}

namespace {

LevelClass combine(NodeKind kind, LevelClass a, LevelClass b) {
  using enum LevelClass;
  if (kind == NodeKind::Mul) {
    if (a == Sparse || b == Sparse) return Sparse;
    if (a == Dense || b == Dense) return Dense;
    return Absent;
  }
  if (a == Dense || b == Dense) return Dense;
  if (a == Sparse || b == Sparse) return Sparse;
  return Absent;
}

LevelClass access_level(const Access& a, const IndexVar& var) {
  auto it = std::find(a.indices.begin(), a.indices.end(), var);
  if (it == a.indices.end()) return LevelClass::Absent;
  const int dim = static_cast<int>(it - a.indices.begin());
  return level_is_sparse(a.tensor.format(), dim) ? LevelClass::Sparse : LevelClass::Dense;
}

}  // namespace

LevelClass infer_level(const Expr& node, const IndexVar& var) {
  switch (node->kind) {
    case NodeKind::Access: return access_level(node->access, var);
    case NodeKind::Reduce: return infer_level(node->lhs, var);
    case NodeKind::Mul:
    case NodeKind::Add:
      return combine(node->kind, infer_level(node->lhs, var), infer_level(node->rhs, var));
  }
  return LevelClass::Absent;
}

LevelDerivation derive_level(const Expr& node, const IndexVar& var) {
  switch (node->kind) {
    case NodeKind::Access:
      return {render(node), access_level(node->access, var), {}};
    case NodeKind::Reduce: {
      LevelDerivation child = derive_level(node->lhs, var);
      LevelClass r = child.result;
      return {"sum " + node->var.name, r, {std::move(child)}};
    }
    case NodeKind::Mul:
    case NodeKind::Add: {
      LevelDerivation a = derive_level(node->lhs, var);
      LevelDerivation b = derive_level(node->rhs, var);
      LevelClass r = combine(node->kind, a.result, b.result);
      return {node->kind == NodeKind::Mul ? "*" : "+", r, {std::move(a), std::move(b)}};
    }
  }
  return {"?", LevelClass::Absent, {}};
}

TensorFormat infer_format(const TensorExpr& e) {
  std::vector<LevelKind> levels;
  for (const IndexVar& v : e.output.indices)
    levels.push_back(infer_level(e.rhs, v) == LevelClass::Sparse ? LevelKind::Compressed
                                                                  : LevelKind::Dense);
  return TensorFormat(output_shape(e), std::move(levels));
}

}  // namespace sparsetc
