#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparsetc/expr.hpp"

namespace sparsetc {

enum class LoopKind { DenseCount, SparseIterate, SparseIntersect };

std::string_view to_string(LoopKind kind);

struct Loop {
  IndexVar var;
  LoopKind kind = LoopKind::DenseCount;
  /// Accesses whose levels are intersected at this loop.
  std::vector<std::string> filters;
};

/// An input access (or the output, `access == npos`) that must be stored
/// in a different mode ordering for the chosen loop order.
struct TransposePlan {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t access = npos;
  std::string tensor;
  std::vector<int> mode_ordering;
};

/// Producer/consumer split around an ordered scatter accumulator.
struct WorkspacePlan {
  IndexVar split_var;
  IndexVars ws_indices;
  IndexVars producer_loops;
  IndexVars consumer_loops;
};

/// Weights of the loop-move cost function.
struct CostModel {
  double w_filter_loss = 4;
  double w_ws_dim = 2;
  double w_transpose = 3;
  double w_dense_iteration = 1000;
};

struct CostBreakdown {
  double filter_loss = 0;
  double workspace = 0;
  double transpose = 0;
  double dense_iteration = 0;

  double total() const { return filter_loss + workspace + transpose + dense_iteration; }
};

struct MoveRecord {
  IndexVar var;
  int from = 0;
  int to = 0;
  IndexVars order_before;
  CostBreakdown cost;
  bool accepted = false;
};

struct RemovedEdge {
  IndexVar from;
  IndexVar to;
  std::vector<std::string> transposed;
};

struct Schedule {
  IndexVars order;
  std::vector<Loop> loops;
  std::vector<TransposePlan> transposes;
  std::optional<WorkspacePlan> workspace;
  /// Loops split by the tiler, in loop order.
  IndexVars tiles;
  Index tile_size = 0;

  /// Requested output format and the format the loop nest produces; they
  /// differ only in mode ordering when the output is transposed.
  TensorFormat output_format;
  TensorFormat produced_format;

  IndexVars sparsity_order;
  std::vector<MoveRecord> moves;
  std::vector<RemovedEdge> removed_edges;
};

/// Loop-order constraints and the cost terms, exposed for tests and tools.
struct SchedulingContext {
  SchedulingContext(const TensorExpr& e, const TensorFormat& out_fmt);

  /// Number of multiplications at which `var` intersects a sparse level.
  int filter_count(const IndexVar& var) const;
  /// Accesses taking part in some filter on `var`.
  std::vector<std::size_t> filter_accesses(const IndexVar& var) const;

  int transposes_required(const IndexVars& order) const;
  int workspace_dims(const IndexVars& order) const;
  int dense_iteration_loops(const IndexVars& order) const;

  CostBreakdown cost(const IndexVars& order, const IndexVar& var, int pos,
                     const CostModel& model) const;

  struct Edge {
    IndexVar from;
    IndexVar to;
    std::size_t owner;  // access index; accesses.size() is the output
  };

  const TensorExpr& expr;
  TensorFormat out_format;
  std::vector<const Access*> inputs;
  IndexVars vars;
  /// Storage orders of sparse tensors (and of a sparse output): hard
  /// constraints on the loop order.
  std::vector<Edge> edges;
  /// Storage orders of dense tensors, which are located directly. They only
  /// count as preferences in transposes_required.
  std::vector<Edge> soft_edges;
};

IndexVars sort_by_sparsity(const TensorExpr& e, const TensorFormat& out_fmt);

Schedule schedule(const TensorExpr& e, const TensorFormat& out_fmt,
                  const CostModel& model = {});

/// Moves `var` to position `pos`, shifting the loops in between.
IndexVars move_to_position(IndexVars order, const IndexVar& var, int pos);

}  // namespace sparsetc
