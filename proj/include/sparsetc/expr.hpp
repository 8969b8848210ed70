#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sparsetc/tensor.hpp"

namespace sparsetc {

struct IndexVar {
  std::string name;

  friend auto operator<=>(const IndexVar&, const IndexVar&) = default;
};

using IndexVars = std::vector<IndexVar>;

/// `tensor(indices...)`. Output accesses carry no tensor.
struct Access {
  std::string name;
  IndexVars indices;
  Tensor tensor;
};

enum class NodeKind { Access, Mul, Add, Reduce };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

/// Immutable expression tree node. Reduce sums its operand over `var`.
struct ExprNode {
  NodeKind kind;
  Access access;   // NodeKind::Access
  IndexVar var;    // NodeKind::Reduce
  Expr lhs;        // Mul, Add, Reduce (operand)
  Expr rhs;        // Mul, Add
};

Expr make_access(Tensor tensor, IndexVars indices);
Expr make_access(std::string name, Tensor tensor, IndexVars indices);
Expr make_mul(Expr a, Expr b);
Expr make_add(Expr a, Expr b);
Expr make_reduce(IndexVar var, Expr operand);

/// `output = rhs` with every reduction variable bound by a Reduce node
/// placed around the smallest subtree that contains all of its uses.
struct TensorExpr {
  Access output;
  Expr rhs;
};

using Bindings = std::map<std::string, Tensor>;

/// Validates the assignment and inserts Reduce nodes.
///
/// Throws ParseError when an access repeats an index, an output index does
/// not occur on the right-hand side, or the operands of an addition have
/// different free indices (no broadcasting).
TensorExpr make_assignment(Access output, Expr rhs);

/// Index variables in first-appearance order, output first.
IndexVars get_index_variables(const TensorExpr& e);
/// Right-hand-side variables absent from the output, first-appearance order.
IndexVars get_reduction_variables(const TensorExpr& e);
/// Variables used anywhere below `node`, first-appearance order.
IndexVars variables_of(const Expr& node);
/// Free (unreduced) variables of `node`.
IndexVars free_variables(const Expr& node);

/// Right-hand-side accesses, left to right.
std::vector<const Access*> accesses(const TensorExpr& e);

/// Extent of each index variable; throws ShapeError on disagreement.
std::map<IndexVar, Index> index_extents(const TensorExpr& e);
Shape output_shape(const TensorExpr& e);

bool all_inputs_dense(const TensorExpr& e);

/// Rebinds every access to the tensor of the same name in `bindings`.
TensorExpr rebind(const TensorExpr& e, const Bindings& bindings);

/// Canonical text form accepted by parse().
std::string render(const TensorExpr& e);
std::string render(const Expr& node);

/// Structural equality; tensors are compared by name and format.
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const TensorExpr& a, const TensorExpr& b);

}  // namespace sparsetc
