#include "sparsetc/schedule.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "sparsetc/format_infer.hpp"

namespace sparsetc {

std::string_view to_string(LoopKind kind) {
  switch (kind) {
    case LoopKind::DenseCount: return "dense-count";
    case LoopKind::SparseIterate: return "sparse-iterate";
    case LoopKind::SparseIntersect: return "sparse-intersect";
  }
  return "?";
}

namespace {

int position(const IndexVars& order, const IndexVar& v) {
  return static_cast<int>(std::find(order.begin(), order.end(), v) - order.begin());
}

bool contains(const IndexVars& vars, const IndexVar& v) {
  return std::find(vars.begin(), vars.end(), v) != vars.end();
}

void collect(const Expr& n, std::vector<const Access*>& out) {
  if (n->kind == NodeKind::Access) {
    out.push_back(&n->access);
    return;
  }
  collect(n->lhs, out);
  if (n->rhs) collect(n->rhs, out);
}

using KindOf = std::function<LevelKind(std::size_t access, int dim)>;

// Index of each access node, left to right.
std::size_t access_index(const std::vector<const Access*>& all, const Access* a) {
  return static_cast<std::size_t>(std::find(all.begin(), all.end(), a) - all.begin());
}

LevelClass level_class(const Expr& n, const IndexVar& v, const std::vector<const Access*>& all,
                       const KindOf& kind_of) {
  switch (n->kind) {
    case NodeKind::Access: {
      auto it = std::find(n->access.indices.begin(), n->access.indices.end(), v);
      if (it == n->access.indices.end()) return LevelClass::Absent;
      const int dim = static_cast<int>(it - n->access.indices.begin());
      return is_sparse(kind_of(access_index(all, &n->access), dim)) ? LevelClass::Sparse
                                                                   : LevelClass::Dense;
    }
    case NodeKind::Reduce:
      return level_class(n->lhs, v, all, kind_of);
    case NodeKind::Mul:
    case NodeKind::Add: {
      const LevelClass a = level_class(n->lhs, v, all, kind_of);
      const LevelClass b = level_class(n->rhs, v, all, kind_of);
      using enum LevelClass;
      if (n->kind == NodeKind::Mul) {
        if (a == Sparse || b == Sparse) return Sparse;
        if (a == Dense || b == Dense) return Dense;
        return Absent;
      }
      if (a == Dense || b == Dense) return Dense;
      if (a == Sparse || b == Sparse) return Sparse;
      return Absent;
    }
  }
  return LevelClass::Absent;
}

struct Filter {
  IndexVar var;
  std::vector<std::size_t> accesses;
};

// A filter is a multiplication whose operands both use `var` and at least one
// of them is sparse there.
void collect_filters(const Expr& n, const std::vector<const Access*>& all, const KindOf& kind_of,
                     std::vector<Filter>& out) {
  if (n->kind == NodeKind::Access) return;
  collect_filters(n->lhs, all, kind_of, out);
  if (n->rhs) collect_filters(n->rhs, all, kind_of, out);
  if (n->kind != NodeKind::Mul) return;
  for (const IndexVar& v : variables_of(n)) {
    const LevelClass a = level_class(n->lhs, v, all, kind_of);
    const LevelClass b = level_class(n->rhs, v, all, kind_of);
    if (a == LevelClass::Absent || b == LevelClass::Absent) continue;
    if (a != LevelClass::Sparse && b != LevelClass::Sparse) continue;
    Filter f{v, {}};
    std::vector<const Access*> under;
    collect(n, under);
    for (const Access* acc : under)
      if (contains(acc->indices, v)) f.accesses.push_back(access_index(all, acc));
    out.push_back(std::move(f));
  }
}

struct SetClass {
  enum { Absent, Full, Sparse } kind = Absent;
  bool intersect = false;
};

SetClass classify(const Expr& n, const IndexVar& v, const std::vector<const Access*>& all,
                  const KindOf& kind_of) {
  switch (n->kind) {
    case NodeKind::Access: {
      auto it = std::find(n->access.indices.begin(), n->access.indices.end(), v);
      if (it == n->access.indices.end()) return {};
      const int dim = static_cast<int>(it - n->access.indices.begin());
      if (is_sparse(kind_of(access_index(all, &n->access), dim))) return {SetClass::Sparse, false};
      return {SetClass::Full, false};
    }
    case NodeKind::Reduce:
      return classify(n->lhs, v, all, kind_of);
    case NodeKind::Mul:
    case NodeKind::Add: {
      const SetClass a = classify(n->lhs, v, all, kind_of);
      const SetClass b = classify(n->rhs, v, all, kind_of);
      if (a.kind == SetClass::Absent) return b;
      if (b.kind == SetClass::Absent) return a;
      if (n->kind == NodeKind::Mul) {
        if (a.kind == SetClass::Full) return b;
        if (b.kind == SetClass::Full) return a;
        return {SetClass::Sparse, true};
      }
      if (a.kind == SetClass::Full || b.kind == SetClass::Full) return {SetClass::Full, false};
      return {SetClass::Sparse, a.intersect || b.intersect};
    }
  }
  return {};
}

KindOf original_kinds(const std::vector<const Access*>& inputs) {
  return [&inputs](std::size_t a, int dim) { return inputs[a]->tensor.format().kind_of_dim(dim); };
}

}  // namespace

IndexVars move_to_position(IndexVars order, const IndexVar& var, int pos) {
  const int from = position(order, var);
  order.erase(order.begin() + from);
  order.insert(order.begin() + pos, var);
  return order;
}

SchedulingContext::SchedulingContext(const TensorExpr& e, const TensorFormat& out_fmt)
    : expr(e), out_format(out_fmt), inputs(accesses(e)), vars(get_index_variables(e)) {
  for (std::size_t a = 0; a < inputs.size(); ++a) {
    const TensorFormat& f = inputs[a]->tensor.format();
    auto& target = f.all_dense() ? soft_edges : edges;
    for (int l = 0; l + 1 < f.order(); ++l) {
      target.push_back({inputs[a]->indices[f.mode_ordering()[l]],
                        inputs[a]->indices[f.mode_ordering()[l + 1]], a});
    }
  }
  auto& target = out_fmt.has_sparse_levels() ? edges : soft_edges;
  for (int l = 0; l + 1 < out_fmt.order(); ++l)
    target.push_back({e.output.indices[out_fmt.mode_ordering()[l]],
                      e.output.indices[out_fmt.mode_ordering()[l + 1]], inputs.size()});
}

int SchedulingContext::filter_count(const IndexVar& var) const {
  std::vector<Filter> filters;
  collect_filters(expr.rhs, inputs, original_kinds(inputs), filters);
  return static_cast<int>(std::count_if(filters.begin(), filters.end(),
                                        [&](const Filter& f) { return f.var == var; }));
}

std::vector<std::size_t> SchedulingContext::filter_accesses(const IndexVar& var) const {
  std::vector<Filter> filters;
  collect_filters(expr.rhs, inputs, original_kinds(inputs), filters);
  std::set<std::size_t> out;
  for (const Filter& f : filters)
    if (f.var == var) out.insert(f.accesses.begin(), f.accesses.end());
  return {out.begin(), out.end()};
}

int SchedulingContext::transposes_required(const IndexVars& order) const {
  std::set<std::size_t> owners;
  for (const auto* list : {&edges, &soft_edges})
    for (const Edge& e : *list)
      if (position(order, e.from) > position(order, e.to)) owners.insert(e.owner);
  return static_cast<int>(owners.size());
}

int SchedulingContext::workspace_dims(const IndexVars& order) const {
  if (!out_format.has_sparse_levels()) return 0;
  const IndexVars& out = expr.output.indices;
  for (std::size_t d = 0; d < order.size(); ++d) {
    if (contains(out, order[d])) continue;
    const int below = static_cast<int>(std::count_if(
        order.begin() + d + 1, order.end(), [&](const IndexVar& v) { return contains(out, v); }));
    if (below > 0) return below;
  }
  return 0;
}

int SchedulingContext::dense_iteration_loops(const IndexVars& order) const {
  int count = 0;
  for (std::size_t d = 1; d < order.size(); ++d) {
    const IndexVar& v = order[d];
    bool sparse_somewhere = false;
    bool connected = false;
    for (const Access* a : inputs) {
      auto it = std::find(a->indices.begin(), a->indices.end(), v);
      if (it == a->indices.end()) continue;
      if (level_is_sparse(a->tensor.format(), static_cast<int>(it - a->indices.begin())))
        sparse_somewhere = true;
      for (std::size_t u = 0; u < d; ++u)
        if (contains(a->indices, order[u])) connected = true;
    }
    if (sparse_somewhere && !connected) ++count;
  }
  return count;
}

CostBreakdown SchedulingContext::cost(const IndexVars& order, const IndexVar& var, int pos,
                                      const CostModel& model) const {
  const int from = position(order, var);
  const IndexVars moved = move_to_position(order, var, pos);
  CostBreakdown c;
  if (pos > from) {
    const IndexVars jumped(order.begin() + from + 1, order.begin() + pos + 1);
    int lost = 0;
    for (std::size_t a : filter_accesses(var)) {
      const IndexVars& idx = inputs[a]->indices;
      if (std::any_of(jumped.begin(), jumped.end(), [&](const IndexVar& u) { return contains(idx, u); }))
        ++lost;
    }
    c.filter_loss = model.w_filter_loss * lost;
  }
  c.workspace = model.w_ws_dim * (workspace_dims(moved) - workspace_dims(order));
  c.transpose = model.w_transpose * (transposes_required(moved) - transposes_required(order));
  c.dense_iteration =
      model.w_dense_iteration * (dense_iteration_loops(moved) - dense_iteration_loops(order));
  return c;
}

IndexVars sort_by_sparsity(const TensorExpr& e, const TensorFormat& out_fmt) {
  const SchedulingContext ctx(e, out_fmt);
  std::map<int, IndexVars, std::greater<>> groups;
  for (const IndexVar& v : ctx.vars) groups[ctx.filter_count(v)].push_back(v);

  IndexVars order;
  for (auto it = groups.begin(); it != groups.end(); ++it) {
    IndexVars group = it->second;
    IndexVars rest;
    for (auto jt = std::next(it); jt != groups.end(); ++jt)
      rest.insert(rest.end(), jt->second.begin(), jt->second.end());

    if (group.size() > 1 && group.size() <= 7) {
      std::vector<int> perm(group.size());
      std::iota(perm.begin(), perm.end(), 0);
      std::vector<int> best = perm;
      int best_cost = std::numeric_limits<int>::max();
      do {
        IndexVars candidate = order;
        for (int k : perm) candidate.push_back(group[k]);
        candidate.insert(candidate.end(), rest.begin(), rest.end());
        const int c = ctx.transposes_required(candidate);
        if (c < best_cost) {
          best_cost = c;
          best = perm;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      for (int k : best) order.push_back(group[k]);
    } else {
      order.insert(order.end(), group.begin(), group.end());
    }
  }
  return order;
}

Schedule schedule(const TensorExpr& e, const TensorFormat& out_fmt, const CostModel& model) {
  const SchedulingContext ctx(e, out_fmt);
  const auto& inputs = ctx.inputs;
  Schedule s;
  s.output_format = out_fmt;
  s.sparsity_order = sort_by_sparsity(e, out_fmt);

  // Greedy pass: push each variable down while the net cost is negative.
  IndexVars order = s.sparsity_order;
  const int n = static_cast<int>(order.size());
  for (const IndexVar& v : s.sparsity_order) {
    for (int pos = position(order, v) + 1; pos < n; ++pos) {
      MoveRecord rec{v, position(order, v), pos, order, ctx.cost(order, v, pos, model), false};
      if (rec.cost.total() < 0) {
        order = move_to_position(order, v, pos);
        rec.accepted = true;
      }
      s.moves.push_back(std::move(rec));
    }
  }

  // Mode-ordering graph: break cycles by transposing the cheapest tensors.
  const std::size_t output_owner = inputs.size();
  std::set<std::size_t> transposed;
  auto owner_name = [&](std::size_t o) {
    return o == output_owner ? e.output.name : inputs[o]->name;
  };
  auto owner_cost = [&](std::size_t o) -> Index {
    return o == output_owner ? std::numeric_limits<Index>::max() / 4 : nnz(inputs[o]->tensor);
  };
  auto live_edges = [&] {
    std::vector<SchedulingContext::Edge> live;
    for (const auto& edge : ctx.edges)
      if (!transposed.contains(edge.owner)) live.push_back(edge);
    return live;
  };

  for (;;) {
    const auto live = live_edges();
    // Depth-first search for a cycle, visiting variables in a fixed order.
    std::map<IndexVar, int> state;
    std::vector<IndexVar> stack;
    std::vector<IndexVar> cycle;
    std::function<bool(const IndexVar&)> dfs = [&](const IndexVar& u) {
      state[u] = 1;
      stack.push_back(u);
      for (const IndexVar& w : ctx.vars) {
        const bool adj = std::any_of(live.begin(), live.end(), [&](const auto& ed) {
          return ed.from == u && ed.to == w;
        });
        if (!adj) continue;
        if (state[w] == 1) {
          cycle.assign(std::find(stack.begin(), stack.end(), w), stack.end());
          return true;
        }
        if (state[w] == 0 && dfs(w)) return true;
      }
      stack.pop_back();
      state[u] = 2;
      return false;
    };
    bool found = false;
    for (const IndexVar& v : ctx.vars)
      if (state[v] == 0 && dfs(v)) {
        found = true;
        break;
      }
    if (!found) break;

    struct Candidate {
      IndexVar from, to;
      std::vector<std::size_t> owners;
      Index cost = 0;
      std::string name;
    };
    std::optional<Candidate> best;
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      Candidate c{cycle[k], cycle[(k + 1) % cycle.size()], {}, 0, {}};
      for (const auto& ed : live)
        if (ed.from == c.from && ed.to == c.to &&
            std::find(c.owners.begin(), c.owners.end(), ed.owner) == c.owners.end())
          c.owners.push_back(ed.owner);
      for (std::size_t o : c.owners) {
        c.cost += owner_cost(o);
        const std::string nm = owner_name(o);
        if (c.name.empty() || nm < c.name) c.name = nm;
      }
      if (!best || c.cost < best->cost || (c.cost == best->cost && c.name < best->name))
        best = std::move(c);
    }
    RemovedEdge removed{best->from, best->to, {}};
    for (std::size_t o : best->owners) {
      transposed.insert(o);
      removed.transposed.push_back(owner_name(o));
    }
    s.removed_edges.push_back(std::move(removed));
  }

  // Topological order of the residual graph, closest to the greedy order.
  {
    const auto live = live_edges();
    IndexVars result;
    std::set<IndexVar> placed;
    while (result.size() < order.size()) {
      for (const IndexVar& v : order) {
        if (placed.contains(v)) continue;
        const bool ready = std::none_of(live.begin(), live.end(), [&](const auto& ed) {
          return ed.to == v && !placed.contains(ed.from);
        });
        if (ready) {
          result.push_back(v);
          placed.insert(v);
          break;
        }
      }
    }
    order = std::move(result);
  }
  s.order = order;

  // Storage orders for the transposed tensors follow the loop order.
  auto sorted_dims = [&](const IndexVars& indices) {
    std::vector<int> dims(indices.size());
    std::iota(dims.begin(), dims.end(), 0);
    std::stable_sort(dims.begin(), dims.end(), [&](int a, int b) {
      return position(order, indices[a]) < position(order, indices[b]);
    });
    return dims;
  };
  std::vector<TensorFormat> effective;
  for (const Access* a : inputs) effective.push_back(a->tensor.format());
  s.produced_format = out_fmt;
  for (std::size_t o : transposed) {
    if (o == output_owner) {
      auto dims = sorted_dims(e.output.indices);
      if (dims != out_fmt.mode_ordering()) {
        s.produced_format = out_fmt.with_mode_ordering(dims);
        s.transposes.push_back({TransposePlan::npos, e.output.name, dims});
      }
      continue;
    }
    auto dims = sorted_dims(inputs[o]->indices);
    if (dims != inputs[o]->tensor.format().mode_ordering()) {
      effective[o] = inputs[o]->tensor.format().with_mode_ordering(dims);
      s.transposes.push_back({o, inputs[o]->name, dims});
    }
  }

  // Iteration kind of every loop under the storage actually used.
  const KindOf effective_kinds = [&effective](std::size_t a, int dim) {
    return effective[a].kind_of_dim(dim);
  };
  std::vector<Filter> filters;
  collect_filters(e.rhs, inputs, effective_kinds, filters);
  for (const IndexVar& v : order) {
    Loop loop{v, LoopKind::DenseCount, {}};
    const SetClass c = classify(e.rhs, v, inputs, effective_kinds);
    if (c.kind == SetClass::Sparse)
      loop.kind = c.intersect ? LoopKind::SparseIntersect : LoopKind::SparseIterate;
    std::set<std::size_t> members;
    for (const Filter& f : filters)
      if (f.var == v) members.insert(f.accesses.begin(), f.accesses.end());
    for (std::size_t a : members) loop.filters.push_back(inputs[a]->name);
    s.loops.push_back(std::move(loop));
  }

  // Workspace when a sparse output would be scattered into out of order.
  if (s.produced_format.has_sparse_levels()) {
    const IndexVars& out = e.output.indices;
    for (std::size_t d = 0; d < order.size(); ++d) {
      if (contains(out, order[d])) continue;
      IndexVars below;
      for (int l = 0; l < s.produced_format.order(); ++l) {
        const IndexVar& v = out[s.produced_format.mode_ordering()[l]];
        if (position(order, v) > static_cast<int>(d)) below.push_back(v);
      }
      if (below.empty()) continue;
      s.workspace = WorkspacePlan{order[d], below, IndexVars(order.begin() + d, order.end()), below};
      break;
    }
  }
  return s;
}

}  // namespace sparsetc
