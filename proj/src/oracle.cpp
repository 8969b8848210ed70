#include "sparsetc/oracle.hpp"

#include <map>

#include "sparsetc/error.hpp"

namespace sparsetc {
namespace {

struct Evaluator {
  std::map<const ExprNode*, DenseArray> operands;
  std::map<IndexVar, Index> extents;
  std::map<IndexVar, Index> env;
  std::vector<Index> scratch;

  double eval(const ExprNode& n) {
    switch (n.kind) {
      case NodeKind::Access: {
        const DenseArray& a = operands.at(&n);
        scratch.resize(n.access.indices.size());
        for (std::size_t d = 0; d < scratch.size(); ++d) scratch[d] = env.at(n.access.indices[d]);
        return a(scratch);
      }
      case NodeKind::Mul:
        return eval(*n.lhs) * eval(*n.rhs);
      case NodeKind::Add:
        return eval(*n.lhs) + eval(*n.rhs);
      case NodeKind::Reduce: {
        double sum = 0.0;
        const Index n_ext = extents.at(n.var);
        for (Index c = 0; c < n_ext; ++c) {
          env[n.var] = c;
          sum += eval(*n.lhs);
        }
        env.erase(n.var);
        return sum;
      }
    }
    return 0.0;
  }

  void collect(const Expr& n) {
    if (n->kind == NodeKind::Access) {
      if (!n->access.tensor.valid()) throw ParseError("tensor " + n->access.name + " is not bound");
      operands.emplace(n.get(), to_dense(n->access.tensor));
      return;
    }
    collect(n->lhs);
    if (n->rhs) collect(n->rhs);
  }
};

}  // namespace

DenseArray eval_dense(const TensorExpr& e, const Bindings& bindings) {
  const TensorExpr bound = rebind(e, bindings);
  Evaluator ev;
  ev.collect(bound.rhs);
  ev.extents = index_extents(bound);
  DenseArray out(output_shape(bound));
  const IndexVars& idx = bound.output.indices;
  std::vector<Index> coords(idx.size(), 0);
  for (Index k = 0; k < out.size(); ++k) {
    for (std::size_t d = 0; d < idx.size(); ++d) ev.env[idx[d]] = coords[d];
    out.data()[k] = ev.eval(*bound.rhs);
    for (int d = static_cast<int>(idx.size()) - 1; d >= 0; --d) {
      if (++coords[d] < out.shape()[d]) break;
      coords[d] = 0;
    }
  }
  return out;
}

}  // namespace sparsetc
