#include "sparsetc/engine.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include "sparsetc/error.hpp"
#include "sparsetc/tiler.hpp"
#include "sparsetc/workspace.hpp"

namespace sparsetc {
namespace {

constexpr Index kEnd = std::numeric_limits<Index>::max();
constexpr Index kAbsent = -1;
constexpr int kMaxNodes = 64;

using Mask = std::uint64_t;
Mask bit(int i) { return Mask{1} << i; }

// Markers pushed on the tile path next to coordinates (which are >= 0).
constexpr Index kSplitLhs = -2;
constexpr Index kSplitRhs = -3;
constexpr Index kHoist = -4;
constexpr Index kLoopBase = -1000;

struct Range {
  Index lo = 0;
  Index hi = 1;
};

struct Cursor {
  enum class Mode { Full, Stored } mode = Mode::Full;
  const Index* crd = nullptr;
  Index q = 0;
  Index end = 0;
  Index base = 0;
  Index extent = 0;
  Index coord = 0;
  bool coordinate_level = false;
};

struct Node {
  NodeKind kind = NodeKind::Access;
  int lhs = -1;
  int rhs = -1;
  int access = -1;
  Mask vars = 0;
};

struct AccessInfo {
  Tensor tensor;
  bool random = false;            // all dense: located from coordinates
  std::vector<int> level_var;     // variable bound at each level
  std::vector<int> var_level;     // level of each variable, -1 if unused
  std::vector<Index> var_stride;  // random access only
  int coord_start = 0;
};

/// Pruned view of the expression: `zero` nodes are known to be zero,
/// `unit` nodes were hoisted out and evaluate to one.
struct Stmt {
  Mask zero = 0;
  Mask unit = 0;
};

struct Value {
  double value = 0;
  bool complete = true;
};

class Executor {
 public:
  Executor(const TensorExpr& e, const Schedule& s, const Bindings& bindings);
  ExecutionResult run();

 private:
  int add_node(const Expr& n, const std::map<IndexVar, int>& ids);
  void check_schedule() const;

  bool alive(int n, const Stmt& st) const;
  bool is_unit(int n, const Stmt& st) const;
  Mask live_vars(int n, const Stmt& st) const;
  int find_split(int n, const Stmt& st, Mask v) const;
  void collect_leaves(int n, const Stmt& st, Mask v, std::vector<int>& out) const;
  void collect_factors(int n, const Stmt& st, std::vector<int>& out) const;

  Index advance(Cursor& cur, Index c);
  Index seek(int n, const Stmt& st, Index c, int d, Mask v);
  double eval(int n, const Stmt& st, int d);

  template <typename Body>
  void coiterate(const Stmt& st, int d, Body&& body);
  std::pair<Stmt, Stmt> split(const Stmt& st, int add) const;

  void passes(std::size_t k);
  void outer(const Stmt& st, int d);
  Value tail(const Stmt& st, int d);

  void emit(double value);
  void append(std::span<const Index> level_coords, double value);
  void drain(Workspace& ws, std::span<const Index> prefix);
  void push_path(Index x) {
    if (tracking_) path_.push_back(x);
  }
  void pop_path() {
    if (tracking_) path_.pop_back();
  }

  TensorExpr expr_;
  Schedule sched_;
  OpCounter ops_;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::vector<AccessInfo> acc_;
  std::vector<int> access_node_;

  IndexVars vars_;
  std::vector<Index> extent_;
  std::vector<int> order_;
  std::vector<int> depth_of_;
  std::vector<Mask> suffix_;  // variables at depth >= d
  int t_ = 0;                 // depth of the first loop below every output loop

  std::vector<std::vector<Range>> ctx_;
  std::vector<std::vector<Cursor>> cursors_;
  std::vector<Index> coord_;
  std::vector<Range> range_;

  // Output.
  bool dense_out_ = false;
  DenseArray dense_;
  std::vector<Index> out_stride_;  // per output dimension
  std::vector<int> out_dim_var_;
  std::vector<int> out_level_var_;
  std::vector<Index> level_coords_;
  std::vector<double> values_;
  std::vector<Index> scratch_;

  // Workspace between producer and consumer loops.
  int ws_depth_ = -1;
  std::vector<int> ws_vars_;
  bool producing_ = false;
  Workspace ws_;

  // Tiling.
  std::vector<int> active_;
  Index tile_size_ = 0;
  std::vector<Index> block_;
  std::vector<bool> complete_;
  bool tracking_ = false;
  bool global_ = false;
  Workspace global_ws_;
  std::vector<Index> path_;
  std::map<std::vector<Index>, double> store_;
};

Executor::Executor(const TensorExpr& e, const Schedule& s, const Bindings& bindings)
    : expr_(rebind(e, bindings)), sched_(s) {
  vars_ = get_index_variables(expr_);
  if (vars_.size() > 64) throw Error("too many index variables");
  std::map<IndexVar, int> ids;
  for (std::size_t i = 0; i < vars_.size(); ++i) ids[vars_[i]] = static_cast<int>(i);

  const auto inputs = accesses(expr_);
  for (const Access* a : inputs)
    if (!a->tensor.valid()) throw ParseError("tensor " + a->name + " is not bound");
  const auto extents = index_extents(expr_);
  extent_.resize(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i) extent_[i] = extents.at(vars_[i]);
  if (s.output_format.shape() != output_shape(expr_))
    throw ShapeError("output format shape does not match the expression");

  if (s.order.size() != vars_.size()) throw Error("schedule does not match the expression");
  depth_of_.assign(vars_.size(), -1);
  for (const IndexVar& v : s.order) {
    auto it = ids.find(v);
    if (it == ids.end() || depth_of_[it->second] >= 0)
      throw Error("schedule does not match the expression");
    depth_of_[it->second] = static_cast<int>(order_.size());
    order_.push_back(it->second);
  }
  const int n = static_cast<int>(order_.size());
  suffix_.assign(n + 1, 0);
  for (int d = n - 1; d >= 0; --d) suffix_[d] = suffix_[d + 1] | bit(order_[d]);
  for (const IndexVar& v : expr_.output.indices) t_ = std::max(t_, depth_of_[ids.at(v)] + 1);

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    AccessInfo info;
    const TensorFormat f = effective_format(s, k, *inputs[k]);
    info.tensor = convert(inputs[k]->tensor, f);
    info.random = f.all_dense();
    info.coord_start = f.coordinate_start();
    info.var_level.assign(vars_.size(), -1);
    info.var_stride.assign(vars_.size(), 0);
    for (int l = 0; l < f.order(); ++l) {
      const int v = ids.at(inputs[k]->indices[f.mode_ordering()[l]]);
      info.level_var.push_back(v);
      info.var_level[v] = l;
    }
    Index stride = 1;
    for (int l = f.order() - 1; l >= 0; --l) {
      info.var_stride[info.level_var[l]] = stride;
      stride *= f.level_extent(l);
    }
    acc_.push_back(std::move(info));
  }
  access_node_.assign(acc_.size(), -1);
  root_ = add_node(expr_.rhs, ids);

  ctx_.assign(n + 1, std::vector<Range>(acc_.size()));
  cursors_.assign(n + 1, std::vector<Cursor>(acc_.size()));
  coord_.assign(vars_.size(), 0);
  range_.resize(vars_.size());
  for (std::size_t v = 0; v < vars_.size(); ++v) range_[v] = {0, extent_[v]};

  const TensorFormat& pf = s.produced_format;
  dense_out_ = pf.all_dense();
  for (const IndexVar& v : expr_.output.indices) out_dim_var_.push_back(ids.at(v));
  for (int l = 0; l < pf.order(); ++l) out_level_var_.push_back(out_dim_var_[pf.mode_ordering()[l]]);
  if (dense_out_) {
    dense_ = DenseArray(pf.shape());
    out_stride_.assign(pf.order(), 1);
    for (int d = pf.order() - 2; d >= 0; --d) out_stride_[d] = out_stride_[d + 1] * pf.shape()[d + 1];
  }

  tile_size_ = s.tile_size;
  block_.assign(vars_.size(), 0);
  // Block passes over a second scatter reduction would reorder its sums, so
  // only the first one is run blockwise.
  bool scatter_tiled = false;
  for (const IndexVar& v : s.tiles) {
    const int id = ids.at(v);
    if (tile_size_ < 1 || block_count(extent_[id], tile_size_) < 2) continue;
    const bool scatter = depth_of_[id] < t_ &&
                         std::find(expr_.output.indices.begin(), expr_.output.indices.end(), v) ==
                             expr_.output.indices.end();
    if (scatter && scatter_tiled) continue;
    scatter_tiled = scatter_tiled || scatter;
    active_.push_back(id);
  }
  for (int v : active_) tracking_ = tracking_ || depth_of_[v] >= t_;
  global_ = !active_.empty() && !dense_out_;

  check_schedule();

  if (s.workspace && !dense_out_ && !global_) {
    ws_depth_ = depth_of_[ids.at(s.workspace->split_var)];
    for (const IndexVar& v : s.workspace->ws_indices) ws_vars_.push_back(ids.at(v));
  }
}

int Executor::add_node(const Expr& n, const std::map<IndexVar, int>& ids) {
  const int id = static_cast<int>(nodes_.size());
  if (id >= kMaxNodes) throw Error("expression too large");
  nodes_.push_back(Node{n->kind});
  Node node{n->kind};
  switch (n->kind) {
    case NodeKind::Access: {
      // Accesses are numbered left to right, matching accesses().
      int a = 0;
      while (access_node_[a] >= 0) ++a;
      access_node_[a] = id;
      node.access = a;
      for (const IndexVar& v : n->access.indices) node.vars |= bit(ids.at(v));
      break;
    }
    case NodeKind::Reduce:
      node.lhs = add_node(n->lhs, ids);
      node.vars = nodes_[node.lhs].vars;
      break;
    case NodeKind::Mul:
    case NodeKind::Add:
      node.lhs = add_node(n->lhs, ids);
      node.rhs = add_node(n->rhs, ids);
      node.vars = nodes_[node.lhs].vars | nodes_[node.rhs].vars;
      break;
  }
  nodes_[id] = node;
  return id;
}

void Executor::check_schedule() const {
  for (std::size_t a = 0; a < acc_.size(); ++a) {
    const AccessInfo& info = acc_[a];
    if (info.random) continue;
    for (std::size_t l = 1; l < info.level_var.size(); ++l)
      if (depth_of_[info.level_var[l - 1]] > depth_of_[info.level_var[l]])
        throw Error("loop order conflicts with the storage order of " + info.tensor.name());
  }
  if (!sched_.produced_format.all_dense()) {
    for (std::size_t l = 1; l < out_level_var_.size(); ++l)
      if (depth_of_[out_level_var_[l - 1]] > depth_of_[out_level_var_[l]])
        throw Error("loop order conflicts with the output format");
  }
}

bool Executor::alive(int n, const Stmt& st) const {
  if (st.zero & bit(n)) return false;
  if (st.unit & bit(n)) return true;
  const Node& node = nodes_[n];
  switch (node.kind) {
    case NodeKind::Access:
      return true;
    case NodeKind::Reduce:
      return alive(node.lhs, st);
    case NodeKind::Mul:
      return alive(node.lhs, st) && alive(node.rhs, st);
    case NodeKind::Add:
      return alive(node.lhs, st) || alive(node.rhs, st);
  }
  return false;
}

bool Executor::is_unit(int n, const Stmt& st) const {
  if (st.unit & bit(n)) return true;
  const Node& node = nodes_[n];
  switch (node.kind) {
    case NodeKind::Reduce:
      return is_unit(node.lhs, st);
    case NodeKind::Mul:
      return is_unit(node.lhs, st) && is_unit(node.rhs, st);
    default:
      return false;
  }
}

Mask Executor::live_vars(int n, const Stmt& st) const {
  if (st.unit & bit(n)) return 0;
  const Node& node = nodes_[n];
  switch (node.kind) {
    case NodeKind::Access:
      return node.vars;
    case NodeKind::Reduce:
      return live_vars(node.lhs, st);
    case NodeKind::Mul:
      return live_vars(node.lhs, st) | live_vars(node.rhs, st);
    case NodeKind::Add: {
      Mask m = 0;
      if (alive(node.lhs, st)) m |= live_vars(node.lhs, st);
      if (alive(node.rhs, st)) m |= live_vars(node.rhs, st);
      return m;
    }
  }
  return 0;
}

int Executor::find_split(int n, const Stmt& st, Mask v) const {
  if ((st.unit & bit(n)) || !(nodes_[n].vars & v)) return -1;
  const Node& node = nodes_[n];
  switch (node.kind) {
    case NodeKind::Access:
      return -1;
    case NodeKind::Reduce:
      return find_split(node.lhs, st, v);
    case NodeKind::Mul: {
      const int l = find_split(node.lhs, st, v);
      return l >= 0 ? l : find_split(node.rhs, st, v);
    }
    case NodeKind::Add: {
      const bool la = alive(node.lhs, st);
      const bool ra = alive(node.rhs, st);
      if (la && ra) {
        const bool inl = live_vars(node.lhs, st) & v;
        const bool inr = live_vars(node.rhs, st) & v;
        if (inl != inr) return n;
      }
      if (la) {
        const int l = find_split(node.lhs, st, v);
        if (l >= 0) return l;
      }
      return ra ? find_split(node.rhs, st, v) : -1;
    }
  }
  return -1;
}

void Executor::collect_leaves(int n, const Stmt& st, Mask v, std::vector<int>& out) const {
  if ((st.unit & bit(n)) || (st.zero & bit(n)) || !(nodes_[n].vars & v)) return;
  const Node& node = nodes_[n];
  if (node.kind == NodeKind::Access) {
    out.push_back(node.access);
    return;
  }
  collect_leaves(node.lhs, st, v, out);
  if (node.rhs >= 0) collect_leaves(node.rhs, st, v, out);
}

void Executor::collect_factors(int n, const Stmt& st, std::vector<int>& out) const {
  if (st.unit & bit(n)) return;
  const Node& node = nodes_[n];
  if (node.kind == NodeKind::Reduce) {
    collect_factors(node.lhs, st, out);
  } else if (node.kind == NodeKind::Mul) {
    collect_factors(node.lhs, st, out);
    collect_factors(node.rhs, st, out);
  } else {
    out.push_back(n);
  }
}

Index Executor::advance(Cursor& cur, Index c) {
  if (cur.mode == Cursor::Mode::Full) {
    cur.coord = c < cur.extent ? c : kEnd;
    return cur.coord;
  }
  if (cur.coord >= c) return cur.coord;
  // Galloping search for the first stored coordinate >= c.
  Index lo = cur.q;
  Index step = 1;
  while (lo + step < cur.end && cur.crd[lo + step] < c) {
    lo += step;
    step <<= 1;
  }
  const Index hi = std::min(lo + step, cur.end);
  const Index q = std::lower_bound(cur.crd + lo + 1, cur.crd + hi, c) - cur.crd;
  ops_.iterator_advances += static_cast<std::uint64_t>(q - cur.q);
  cur.q = q;
  cur.coord = q < cur.end ? cur.crd[q] : kEnd;
  return cur.coord;
}

Index Executor::seek(int n, const Stmt& st, Index c, int d, Mask v) {
  if ((st.unit & bit(n)) || !(nodes_[n].vars & v)) return kAbsent;
  const Node& node = nodes_[n];
  switch (node.kind) {
    case NodeKind::Access:
      return advance(cursors_[d][node.access], c);
    case NodeKind::Reduce:
      return seek(node.lhs, st, c, d, v);
    case NodeKind::Mul: {
      // Leapfrog intersection.
      Index x = c;
      for (;;) {
        const Index a = seek(node.lhs, st, x, d, v);
        if (a == kAbsent) return seek(node.rhs, st, x, d, v);
        if (a == kEnd) return kEnd;
        const Index b = seek(node.rhs, st, a, d, v);
        if (b == kAbsent || b == a) return a;
        if (b == kEnd) return kEnd;
        x = b;
      }
    }
    case NodeKind::Add: {
      const bool la = alive(node.lhs, st);
      const bool ra = alive(node.rhs, st);
      if (!la) return seek(node.rhs, st, c, d, v);
      if (!ra) return seek(node.lhs, st, c, d, v);
      const Index a = seek(node.lhs, st, c, d, v);
      const Index b = seek(node.rhs, st, c, d, v);
      if (a == kAbsent) return b;
      if (b == kAbsent) return a;
      return std::min(a, b);
    }
  }
  return kAbsent;
}

double Executor::eval(int n, const Stmt& st, int d) {
  if (st.unit & bit(n)) return 1.0;
  const Node& node = nodes_[n];
  switch (node.kind) {
    case NodeKind::Access: {
      const AccessInfo& info = acc_[node.access];
      const auto values = info.tensor.storage().values();
      if (!info.random) return values[ctx_[d][node.access].lo];
      Index off = 0;
      for (int v : info.level_var) off += coord_[v] * info.var_stride[v];
      return values[off];
    }
    case NodeKind::Reduce:
      return eval(node.lhs, st, d);
    case NodeKind::Mul: {
      if (is_unit(node.lhs, st)) return eval(node.rhs, st, d);
      if (is_unit(node.rhs, st)) return eval(node.lhs, st, d);
      const double a = eval(node.lhs, st, d);
      const double b = eval(node.rhs, st, d);
      ++ops_.scalar_mults;
      return a * b;
    }
    case NodeKind::Add: {
      const bool la = alive(node.lhs, st);
      const bool ra = alive(node.rhs, st);
      if (!la) return eval(node.rhs, st, d);
      if (!ra) return eval(node.lhs, st, d);
      const double a = eval(node.lhs, st, d);
      const double b = eval(node.rhs, st, d);
      ++ops_.scalar_adds;
      return a + b;
    }
  }
  return 0;
}

template <typename Body>
void Executor::coiterate(const Stmt& st, int d, Body&& body) {
  const int v = order_[d];
  const Mask vm = bit(v);
  std::vector<int> leaves;
  collect_leaves(root_, st, vm, leaves);

  for (int a : leaves) {
    const AccessInfo& info = acc_[a];
    Cursor& cur = cursors_[d][a];
    cur = Cursor{};
    if (info.random) {
      cur.extent = extent_[v];
      continue;
    }
    const int l = info.var_level[v];
    const Range r = ctx_[d][a];
    const TensorFormat& f = info.tensor.format();
    const LevelStorage& ls = info.tensor.storage().level(l);
    switch (f.levels()[l]) {
      case LevelKind::Dense:
        cur.extent = f.level_extent(l);
        cur.base = r.lo * cur.extent;
        break;
      case LevelKind::Compressed:
      case LevelKind::Coordinate:
        cur.mode = Cursor::Mode::Stored;
        cur.coordinate_level = f.levels()[l] == LevelKind::Coordinate;
        cur.crd = ls.crd.data();
        if (cur.coordinate_level && l != info.coord_start) {
          cur.q = r.lo;
          cur.end = r.hi;
        } else {
          cur.q = ls.pos[r.lo];
          cur.end = ls.pos[r.lo + 1];
        }
        cur.coord = cur.q < cur.end ? cur.crd[cur.q] : kEnd;
        break;
    }
  }

  std::vector<Range>& next = ctx_[d + 1];
  next = ctx_[d];
  const Range rg = range_[v];
  Index c = rg.lo;
  while (c < rg.hi) {
    const Index x = seek(root_, st, c, d, vm);
    if (x == kAbsent || x >= rg.hi) break;
    Stmt child = st;
    for (int a : leaves) {
      Cursor& cur = cursors_[d][a];
      if (cur.mode == Cursor::Mode::Full) {
        ++ops_.iterator_advances;
        if (!acc_[a].random) next[a] = {cur.base + x, cur.base + x + 1};
      } else if (cur.coord == x) {
        Index e = cur.q + 1;
        if (cur.coordinate_level)
          while (e < cur.end && cur.crd[e] == x) ++e;
        next[a] = {cur.q, e};
      } else {
        child.zero |= bit(access_node_[a]);
      }
    }
    coord_[v] = x;
    if (alive(root_, child)) {
      push_path(x);
      body(child);
      pop_path();
    }
    c = x + 1;
  }
}

std::pair<Stmt, Stmt> Executor::split(const Stmt& st, int add) const {
  Stmt l = st;
  Stmt r = st;
  l.zero |= bit(nodes_[add].rhs);
  r.zero |= bit(nodes_[add].lhs);
  return {l, r};
}

void Executor::outer(const Stmt& st, int d) {
  if (d == ws_depth_ && !producing_) {
    producing_ = true;
    ws_.clear();
    outer(st, d);
    producing_ = false;
    scratch_.clear();
    for (int l = 0; l < static_cast<int>(out_level_var_.size()); ++l)
      if (depth_of_[out_level_var_[l]] < d) scratch_.push_back(coord_[out_level_var_[l]]);
    const std::vector<Index> prefix = scratch_;
    drain(ws_, prefix);
    return;
  }
  if (d == t_) {
    const Value r = tail(st, d);
    if (r.complete) emit(r.value);
    return;
  }
  const int v = order_[d];
  if (!(live_vars(root_, st) & bit(v))) {
    if (depth_of_[v] < t_ &&
        std::find(out_dim_var_.begin(), out_dim_var_.end(), v) != out_dim_var_.end())
      throw std::logic_error("output loop missing from statement");
    ctx_[d + 1] = ctx_[d];
    outer(st, d + 1);
    return;
  }
  const int add = find_split(root_, st, bit(v));
  if (add >= 0) {
    const auto [l, r] = split(st, add);
    push_path(kSplitLhs);
    outer(l, d);
    pop_path();
    push_path(kSplitRhs);
    outer(r, d);
    pop_path();
    return;
  }
  coiterate(st, d, [&](const Stmt& child) { outer(child, d + 1); });
}

Value Executor::tail(const Stmt& st, int d) {
  const bool done = complete_[d];
  const int n = static_cast<int>(order_.size());
  const Mask live = live_vars(root_, st);
  if (d == n || !(live & suffix_[d])) {
    if (!done) return {0, false};
    return {eval(root_, st, d), true};
  }

  // Hoist factors that do not depend on the remaining loops.
  std::vector<int> factors;
  collect_factors(root_, st, factors);
  std::vector<int> invariant;
  for (int f : factors)
    if (!(live_vars(f, st) & suffix_[d])) invariant.push_back(f);
  if (!invariant.empty() && invariant.size() < factors.size()) {
    Stmt rest = st;
    for (int f : invariant) rest.unit |= bit(f);
    push_path(kHoist);
    const Value r = tail(rest, d);
    pop_path();
    if (!done) return {0, false};
    double p = eval(invariant[0], st, d);
    for (std::size_t k = 1; k < invariant.size(); ++k) {
      p *= eval(invariant[k], st, d);
      ++ops_.scalar_mults;
    }
    ++ops_.scalar_mults;
    return {p * r.value, true};
  }

  const int v = order_[d];
  if (!(live & bit(v))) {
    ctx_[d + 1] = ctx_[d];
    const Value r = tail(st, d + 1);
    if (!done) return {0, false};
    return r;
  }
  const int add = find_split(root_, st, bit(v));
  if (add >= 0) {
    const auto [l, r] = split(st, add);
    push_path(kSplitLhs);
    const Value a = tail(l, d);
    pop_path();
    push_path(kSplitRhs);
    const Value b = tail(r, d);
    pop_path();
    if (!done) return {0, false};
    ++ops_.scalar_adds;
    return {a.value + b.value, true};
  }

  const bool tiled = std::find(active_.begin(), active_.end(), v) != active_.end();
  if (tiled) {
    // Partial sums persist across block passes so the summation order
    // matches the untiled loop.
    std::vector<Index> key = path_;
    key.push_back(kLoopBase - d);
    double sum = store_[key];
    const bool inner_done = complete_[d + 1];
    coiterate(st, d, [&](const Stmt& child) {
      const Value r = tail(child, d + 1);
      if (inner_done) {
        sum += r.value;
        ++ops_.scalar_adds;
      }
    });
    if (!done) {
      store_[key] = sum;
      return {0, false};
    }
    store_.erase(key);
    return {sum, true};
  }
  double sum = 0;
  coiterate(st, d, [&](const Stmt& child) {
    const Value r = tail(child, d + 1);
    if (done) {
      sum += r.value;
      ++ops_.scalar_adds;
    }
  });
  if (!done) return {0, false};
  return {sum, true};
}

void Executor::emit(double value) {
  if (dense_out_) {
    Index off = 0;
    for (std::size_t k = 0; k < out_dim_var_.size(); ++k) off += coord_[out_dim_var_[k]] * out_stride_[k];
    dense_.data()[off] += value;
    ++ops_.scalar_adds;
    return;
  }
  scratch_.clear();
  if (producing_) {
    for (int v : ws_vars_) scratch_.push_back(coord_[v]);
    if (ws_.accumulate(scratch_, value)) ++ops_.scalar_adds;
    return;
  }
  for (int v : out_level_var_) scratch_.push_back(coord_[v]);
  if (global_) {
    if (global_ws_.accumulate(scratch_, value)) ++ops_.scalar_adds;
    return;
  }
  append(scratch_, value);
}

void Executor::append(std::span<const Index> level_coords, double value) {
  const std::size_t order = out_level_var_.size();
  if (!values_.empty() &&
      std::equal(level_coords.begin(), level_coords.end(), level_coords_.end() - order)) {
    values_.back() += value;
    ++ops_.scalar_adds;
    return;
  }
  level_coords_.insert(level_coords_.end(), level_coords.begin(), level_coords.end());
  values_.push_back(value);
}

void Executor::drain(Workspace& ws, std::span<const Index> prefix) {
  std::vector<Index> coords(prefix.begin(), prefix.end());
  for (const auto& [key, value] : ws) {
    coords.resize(prefix.size());
    coords.insert(coords.end(), key.begin(), key.end());
    append(coords, value);
  }
  ws.clear();
}

void Executor::passes(std::size_t k) {
  if (k == active_.size()) {
    const int n = static_cast<int>(order_.size());
    complete_.assign(n + 1, true);
    for (int d = 0; d <= n; ++d)
      for (int v : active_)
        if (depth_of_[v] >= std::max(d, t_) && block_[v] + 1 < block_count(extent_[v], tile_size_))
          complete_[d] = false;
    ctx_[0].assign(acc_.size(), Range{0, 1});
    outer(Stmt{}, 0);
    return;
  }
  const int v = active_[k];
  const Index blocks = block_count(extent_[v], tile_size_);
  for (Index b = 0; b < blocks; ++b) {
    const Block r = block_range(extent_[v], tile_size_, b);
    range_[v] = {r.begin, r.end};
    block_[v] = b;
    passes(k + 1);
  }
  range_[v] = {0, extent_[v]};
  block_[v] = 0;
}

ExecutionResult Executor::run() {
  passes(0);
  const std::string& name = expr_.output.name;
  Tensor produced;
  if (dense_out_) {
    produced = from_dense(name, dense_, TensorFormat(sched_.produced_format.shape(),
                                                     std::vector<LevelKind>(dense_.order(), LevelKind::Dense)));
  } else {
    if (global_) {
      drain(global_ws_, {});
    }
    produced = build_from_sorted(name, sched_.produced_format, level_coords_, values_);
  }
  return {convert(produced, sched_.output_format), ops_};
}

}  // namespace

ExecutionResult execute(const TensorExpr& e, const Schedule& s, const Bindings& bindings) {
  Executor ex(e, s, bindings);
  return ex.run();
}

}  // namespace sparsetc
