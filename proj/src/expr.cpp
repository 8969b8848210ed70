#include "sparsetc/expr.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "sparsetc/error.hpp"

namespace sparsetc {

namespace {

void add_unique(IndexVars& out, const IndexVar& v) {
  if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

void collect_vars(const Expr& n, IndexVars& out) {
  switch (n->kind) {
    case NodeKind::Access:
      for (const IndexVar& v : n->access.indices) add_unique(out, v);
      break;
    case NodeKind::Reduce:
      collect_vars(n->lhs, out);
      break;
    case NodeKind::Mul:
    case NodeKind::Add:
      collect_vars(n->lhs, out);
      collect_vars(n->rhs, out);
      break;
  }
}

bool uses(const Expr& n, const IndexVar& v) {
  IndexVars vars = variables_of(n);
  return std::find(vars.begin(), vars.end(), v) != vars.end();
}

Expr place_reduction(const Expr& n, const IndexVar& v) {
  switch (n->kind) {
    case NodeKind::Access:
      return make_reduce(v, n);
    case NodeKind::Reduce:
      return make_reduce(n->var, place_reduction(n->lhs, v));
    case NodeKind::Mul:
    case NodeKind::Add: {
      const bool in_lhs = uses(n->lhs, v);
      const bool in_rhs = uses(n->rhs, v);
      if (in_lhs && in_rhs) return make_reduce(v, n);
      auto rebuild = n->kind == NodeKind::Mul ? make_mul : make_add;
      if (in_lhs) return rebuild(place_reduction(n->lhs, v), n->rhs);
      return rebuild(n->lhs, place_reduction(n->rhs, v));
    }
  }
  return n;
}

std::set<IndexVar> free_set(const Expr& n) {
  switch (n->kind) {
    case NodeKind::Access:
      return {n->access.indices.begin(), n->access.indices.end()};
    case NodeKind::Reduce: {
      auto s = free_set(n->lhs);
      s.erase(n->var);
      return s;
    }
    case NodeKind::Mul: {
      auto s = free_set(n->lhs);
      s.merge(free_set(n->rhs));
      return s;
    }
    case NodeKind::Add: {
      auto a = free_set(n->lhs);
      auto b = free_set(n->rhs);
      if (a != b)
        throw ParseError("operands of '+' must have the same free indices: '" +
                         render(n->lhs) + "' vs '" + render(n->rhs) + "'");
      return a;
    }
  }
  return {};
}

void collect_accesses(const Expr& n, std::vector<const Access*>& out) {
  if (n->kind == NodeKind::Access) {
    out.push_back(&n->access);
    return;
  }
  collect_accesses(n->lhs, out);
  if (n->rhs) collect_accesses(n->rhs, out);
}

int precedence(const Expr& n) {
  switch (n->kind) {
    case NodeKind::Add: return 1;
    case NodeKind::Mul: return 2;
    case NodeKind::Access: return 3;
    case NodeKind::Reduce: return precedence(n->lhs);
  }
  return 3;
}

void render_access(std::ostream& os, const Access& a) {
  os << a.name << '(';
  for (std::size_t k = 0; k < a.indices.size(); ++k) os << (k ? "," : "") << a.indices[k].name;
  os << ')';
}

void render_node(std::ostream& os, const Expr& n) {
  switch (n->kind) {
    case NodeKind::Access:
      render_access(os, n->access);
      return;
    case NodeKind::Reduce:
      render_node(os, n->lhs);
      return;
    case NodeKind::Mul:
    case NodeKind::Add: {
      const int p = precedence(n);
      const bool lp = precedence(n->lhs) < p;
      const bool rp = precedence(n->rhs) <= p;
      if (lp) os << '(';
      render_node(os, n->lhs);
      if (lp) os << ')';
      os << (n->kind == NodeKind::Mul ? " * " : " + ");
      if (rp) os << '(';
      render_node(os, n->rhs);
      if (rp) os << ')';
      return;
    }
  }
}

Expr rebind_node(const Expr& n, const Bindings& bindings) {
  switch (n->kind) {
    case NodeKind::Access: {
      auto it = bindings.find(n->access.name);
      if (it == bindings.end()) return n;
      return make_access(n->access.name, it->second, n->access.indices);
    }
    case NodeKind::Reduce:
      return make_reduce(n->var, rebind_node(n->lhs, bindings));
    case NodeKind::Mul:
      return make_mul(rebind_node(n->lhs, bindings), rebind_node(n->rhs, bindings));
    case NodeKind::Add:
      return make_add(rebind_node(n->lhs, bindings), rebind_node(n->rhs, bindings));
  }
  return n;
}

}  // namespace

Expr make_access(Tensor tensor, IndexVars indices) {
  std::string name = tensor.name();
  return make_access(std::move(name), std::move(tensor), std::move(indices));
}

Expr make_access(std::string name, Tensor tensor, IndexVars indices) {
  if (tensor.valid() && static_cast<int>(indices.size()) != tensor.order())
    throw ParseError("access " + name + " uses " + std::to_string(indices.size()) +
                     " indices but the tensor has order " + std::to_string(tensor.order()));
  std::set<IndexVar> seen(indices.begin(), indices.end());
  if (seen.size() != indices.size())
    throw ParseError("access " + name + " repeats an index variable");
  return std::make_shared<const ExprNode>(
      ExprNode{NodeKind::Access, Access{std::move(name), std::move(indices), std::move(tensor)},
               {}, nullptr, nullptr});
}

Expr make_mul(Expr a, Expr b) {
  return std::make_shared<const ExprNode>(ExprNode{NodeKind::Mul, {}, {}, std::move(a), std::move(b)});
}

Expr make_add(Expr a, Expr b) {
  return std::make_shared<const ExprNode>(ExprNode{NodeKind::Add, {}, {}, std::move(a), std::move(b)});
}

Expr make_reduce(IndexVar var, Expr operand) {
  return std::make_shared<const ExprNode>(
      ExprNode{NodeKind::Reduce, {}, std::move(var), std::move(operand), nullptr});
}

TensorExpr make_assignment(Access output, Expr rhs) {
  std::set<IndexVar> out_set(output.indices.begin(), output.indices.end());
  if (out_set.size() != output.indices.size())
    throw ParseError("output " + output.name + " repeats an index variable");
  const IndexVars rhs_vars = variables_of(rhs);
  for (const IndexVar& v : output.indices)
    if (std::find(rhs_vars.begin(), rhs_vars.end(), v) == rhs_vars.end())
      throw ParseError("output index '" + v.name + "' does not appear on the right-hand side");
  for (const IndexVar& v : rhs_vars)
    if (!out_set.contains(v)) rhs = place_reduction(rhs, v);
  free_set(rhs);
  output.tensor = Tensor();
  return TensorExpr{std::move(output), std::move(rhs)};
}

IndexVars variables_of(const Expr& node) {
  IndexVars out;
  collect_vars(node, out);
  return out;
}

IndexVars free_variables(const Expr& node) {
  const auto s = free_set(node);
  IndexVars out;
  for (const IndexVar& v : variables_of(node))
    if (s.contains(v)) out.push_back(v);
  return out;
}

IndexVars get_index_variables(const TensorExpr& e) {
  IndexVars out = e.output.indices;
  for (const IndexVar& v : variables_of(e.rhs)) add_unique(out, v);
  return out;
}

IndexVars get_reduction_variables(const TensorExpr& e) {
  IndexVars out;
  for (const IndexVar& v : variables_of(e.rhs))
    if (std::find(e.output.indices.begin(), e.output.indices.end(), v) == e.output.indices.end())
      out.push_back(v);
  return out;
}

std::vector<const Access*> accesses(const TensorExpr& e) {
  std::vector<const Access*> out;
  collect_accesses(e.rhs, out);
  return out;
}

std::map<IndexVar, Index> index_extents(const TensorExpr& e) {
  std::map<IndexVar, Index> extents;
  for (const Access* a : accesses(e)) {
    if (!a->tensor.valid()) throw ParseError("tensor '" + a->name + "' is not bound");
    for (std::size_t d = 0; d < a->indices.size(); ++d) {
      const Index n = a->tensor.shape()[d];
      auto [it, inserted] = extents.emplace(a->indices[d], n);
      if (!inserted && it->second != n)
        throw ShapeError("index '" + a->indices[d].name + "' has extent " +
                         std::to_string(it->second) + " but " + a->name + " expects " +
                         std::to_string(n));
    }
  }
  return extents;
}

Shape output_shape(const TensorExpr& e) {
  const auto extents = index_extents(e);
  Shape shape;
  for (const IndexVar& v : e.output.indices) shape.push_back(extents.at(v));
  return shape;
}

bool all_inputs_dense(const TensorExpr& e) {
  for (const Access* a : accesses(e))
    if (a->tensor.format().has_sparse_levels()) return false;
  return true;
}

TensorExpr rebind(const TensorExpr& e, const Bindings& bindings) {
  return TensorExpr{e.output, rebind_node(e.rhs, bindings)};
}

std::string render(const Expr& node) {
  std::ostringstream os;
  render_node(os, node);
  return os.str();
}

std::string render(const TensorExpr& e) {
  std::ostringstream os;
  render_access(os, e.output);
  os << " = ";
  render_node(os, e.rhs);
  return os.str();
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Access: {
      const Access& x = a->access;
      const Access& y = b->access;
      if (x.name != y.name || x.indices != y.indices) return false;
      if (x.tensor.valid() != y.tensor.valid()) return false;
      return !x.tensor.valid() || x.tensor.format() == y.tensor.format();
    }
    case NodeKind::Reduce:
      return a->var == b->var && structurally_equal(a->lhs, b->lhs);
    case NodeKind::Mul:
    case NodeKind::Add:
      return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
  }
  return false;
}

bool structurally_equal(const TensorExpr& a, const TensorExpr& b) {
  return a.output.name == b.output.name && a.output.indices == b.output.indices &&
         structurally_equal(a.rhs, b.rhs);
}

}  // namespace sparsetc
