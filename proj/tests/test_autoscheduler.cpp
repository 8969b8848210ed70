#include <gtest/gtest.h>

#include <random>

#include "random_expr.hpp"
#include "sparsetc/format_infer.hpp"
#include "sparsetc/parser.hpp"
#include "sparsetc/report.hpp"
#include "sparsetc/schedule.hpp"
#include "sparsetc/tiler.hpp"

using namespace sparsetc;

namespace {

IndexVars vars(std::initializer_list<const char*> names) {
  IndexVars out;
  for (const char* n : names) out.push_back({n});
  return out;
}

Tensor diag(const std::string& name, const TensorFormat& f, Index count) {
  std::vector<Entry> e;
  for (Index k = 0; k < count; ++k) e.push_back({{k, k}, 1.0});
  return build_from_entries(name, f, e);
}

TensorExpr spgemm() {
  Bindings b;
  b["A"] = diag("A", TensorFormat::csr(4, 4), 4);
  b["B"] = diag("B", TensorFormat::csr(4, 4), 4);
  return parse("C(i,k) = A(i,j) * B(j,k)", b);
}

Schedule schedule_inferred(const TensorExpr& e) { return schedule(e, infer_format(e)); }

}  // namespace

TEST(SortBySparsity, Spgemm) {
  const auto e = spgemm();
  EXPECT_EQ(sort_by_sparsity(e, infer_format(e)), vars({"j", "i", "k"}));
}

TEST(SortBySparsity, Spmv) {
  Bindings b;
  b["A"] = diag("A", TensorFormat::csr(3, 3), 3);
  b["x"] = build_from_entries("x", TensorFormat::dense({3}), {});
  const auto e = parse("y(i) = A(i,j) * x(j)", b);
  EXPECT_EQ(sort_by_sparsity(e, infer_format(e)), vars({"j", "i"}));
}

TEST(SortBySparsity, DenseMatmulPrefersStorageOrder) {
  Bindings b;
  b["A"] = build_from_entries("A", TensorFormat::dense({3, 3}), {});
  b["B"] = build_from_entries("B", TensorFormat::dense({3, 3}), {});
  const auto e = parse("C(i,k) = A(i,j) * B(j,k)", b);
  EXPECT_EQ(get_index_variables(e), vars({"i", "k", "j"}));
  EXPECT_EQ(sort_by_sparsity(e, infer_format(e)), vars({"i", "j", "k"}));
}

TEST(Cost, SpgemmWalkthrough) {
  const auto e = spgemm();
  const SchedulingContext ctx(e, infer_format(e));
  const CostModel m;

  const CostBreakdown first = ctx.cost(vars({"j", "i", "k"}), {"j"}, 1, m);
  EXPECT_EQ(first.filter_loss, 4);
  EXPECT_EQ(first.workspace, -2);
  EXPECT_EQ(first.transpose, -3);
  EXPECT_EQ(first.dense_iteration, 0);
  EXPECT_EQ(first.total(), -1);

  const CostBreakdown second = ctx.cost(vars({"i", "j", "k"}), {"j"}, 2, m);
  EXPECT_EQ(second.filter_loss, 4);
  EXPECT_EQ(second.workspace, -2);
  EXPECT_EQ(second.transpose, 3);
  EXPECT_EQ(second.dense_iteration, 1000);
  EXPECT_GT(second.total(), 0);
}

TEST(Cost, Terms) {
  const auto e = spgemm();
  const SchedulingContext ctx(e, infer_format(e));
  EXPECT_EQ(ctx.filter_count({"j"}), 1);
  EXPECT_EQ(ctx.filter_count({"i"}), 0);
  EXPECT_EQ(ctx.workspace_dims(vars({"j", "i", "k"})), 2);
  EXPECT_EQ(ctx.workspace_dims(vars({"i", "j", "k"})), 1);
  EXPECT_EQ(ctx.workspace_dims(vars({"i", "k", "j"})), 0);
  EXPECT_EQ(ctx.transposes_required(vars({"j", "i", "k"})), 1);
  EXPECT_EQ(ctx.transposes_required(vars({"i", "j", "k"})), 0);
  EXPECT_EQ(ctx.dense_iteration_loops(vars({"i", "k", "j"})), 1);
  EXPECT_EQ(ctx.dense_iteration_loops(vars({"i", "j", "k"})), 0);
}

TEST(Schedule, Gustavson) {
  const auto e = spgemm();
  const Schedule s = schedule_inferred(e);
  EXPECT_EQ(s.order, vars({"i", "j", "k"}));
  EXPECT_TRUE(s.transposes.empty());
  ASSERT_TRUE(s.workspace.has_value());
  EXPECT_EQ(s.workspace->split_var.name, "j");
  EXPECT_EQ(s.workspace->ws_indices, vars({"k"}));
  EXPECT_EQ(s.workspace->producer_loops, vars({"j", "k"}));
  EXPECT_EQ(s.workspace->consumer_loops, vars({"k"}));
  ASSERT_EQ(s.loops.size(), 3u);
  EXPECT_EQ(s.loops[0].kind, LoopKind::DenseCount);
  EXPECT_EQ(s.loops[1].kind, LoopKind::SparseIterate);
  EXPECT_EQ(s.loops[1].filters, (std::vector<std::string>{"A", "B"}));
}

TEST(Schedule, InnerProductRejected) {
  const auto e = spgemm();
  const Schedule s = schedule_inferred(e);
  bool saw_innermost = false;
  for (const MoveRecord& m : s.moves) {
    if (m.var.name == "j" && m.to == 2) {
      saw_innermost = true;
      EXPECT_GT(m.cost.total(), 0);
      EXPECT_FALSE(m.accepted);
    }
  }
  EXPECT_TRUE(saw_innermost);
  EXPECT_NE(s.order, vars({"i", "k", "j"}));
  EXPECT_NE(s.order, vars({"k", "i", "j"}));
}

TEST(Schedule, Spmm) {
  Bindings b;
  b["A"] = diag("A", TensorFormat::csr(4, 4), 4);
  b["B"] = build_from_entries("B", TensorFormat::dense({4, 8}), {});
  const auto e = parse("C(i,k) = A(i,j) * B(j,k)", b);
  const Schedule s = schedule_inferred(e);
  EXPECT_EQ(s.order, vars({"i", "j", "k"}));
  EXPECT_FALSE(s.workspace.has_value());
  EXPECT_TRUE(s.transposes.empty());
}

TEST(Schedule, DenseMatmul) {
  Bindings b;
  b["A"] = build_from_entries("A", TensorFormat::dense({3, 3}), {});
  b["B"] = build_from_entries("B", TensorFormat::dense({3, 3}), {});
  const auto e = parse("C(i,k) = A(i,j) * B(j,k)", b);
  const Schedule s = schedule_inferred(e);
  EXPECT_EQ(s.order, vars({"i", "j", "k"}));
  EXPECT_FALSE(s.workspace.has_value());
  for (const MoveRecord& m : s.moves) EXPECT_FALSE(m.accepted);
}

TEST(Schedule, Sddmm) {
  Bindings b;
  b["A"] = diag("A", TensorFormat::csr(4, 4), 4);
  b["B"] = build_from_entries("B", TensorFormat::dense({4, 6}), {});
  b["C"] = build_from_entries("C", TensorFormat::dense({6, 4}), {});
  const auto e = parse("D(i,j) = A(i,j) * B(i,k) * C(k,j)", b);
  const Schedule s = schedule_inferred(e);
  EXPECT_EQ(s.order, vars({"i", "j", "k"}));
  EXPECT_FALSE(s.workspace.has_value());
}

TEST(Schedule, SumPlusSparse) {
  Bindings b;
  b["A"] = diag("A", TensorFormat::csr(4, 4), 4);
  b["B"] = diag("B", TensorFormat::csr(4, 4), 4);
  b["C"] = diag("C", TensorFormat::dcsr(4, 4), 4);
  const auto e = parse("D(i,j) = A(i,k) * B(k,j) + C(i,j)", b);
  const Schedule s = schedule_inferred(e);
  EXPECT_EQ(s.output_format, TensorFormat::csr(4, 4));
  EXPECT_EQ(s.order, vars({"i", "k", "j"}));
  ASSERT_TRUE(s.workspace.has_value());
  EXPECT_EQ(s.workspace->ws_indices, vars({"j"}));
}

TEST(Schedule, CycleTransposesSmallerTensor) {
  Bindings b;
  b["A"] = diag("A", TensorFormat::csr(4, 4), 4);
  b["B"] = diag("B", TensorFormat::csc(4, 4), 2);
  const auto e = parse("C(i,j) = A(i,j) * B(i,j)", b);
  const Schedule s = schedule(e, TensorFormat::dense({4, 4}));
  ASSERT_EQ(s.transposes.size(), 1u);
  EXPECT_EQ(s.transposes[0].tensor, "B");
  EXPECT_EQ(s.transposes[0].mode_ordering, (std::vector<int>{0, 1}));
  ASSERT_EQ(s.removed_edges.size(), 1u);
  EXPECT_EQ(s.removed_edges[0].transposed, (std::vector<std::string>{"B"}));
}

TEST(Schedule, CycleTieBrokenByName) {
  Bindings b;
  b["A"] = diag("A", TensorFormat::csr(4, 4), 3);
  b["B"] = diag("B", TensorFormat::csc(4, 4), 3);
  const auto e = parse("C(i,j) = A(i,j) * B(i,j)", b);
  const Schedule s = schedule(e, TensorFormat::dense({4, 4}));
  ASSERT_EQ(s.transposes.size(), 1u);
  EXPECT_EQ(s.transposes[0].tensor, "A");
  EXPECT_EQ(s.transposes[0].mode_ordering, (std::vector<int>{1, 0}));
}

TEST(Schedule, OutputIsNeverTheCheapestEdge) {
  Bindings b;
  b["A"] = diag("A", TensorFormat::csr(4, 4), 4);
  const auto e = parse("C(i,j) = A(j,i)", b);
  const Schedule s = schedule(e, TensorFormat::csr(4, 4));
  ASSERT_EQ(s.transposes.size(), 1u);
  EXPECT_EQ(s.transposes[0].tensor, "A");
  EXPECT_EQ(s.order, vars({"i", "j"}));
  EXPECT_EQ(s.produced_format, s.output_format);
}

TEST(Schedule, Deterministic) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rc = fuzz::random_case(rng);
    EXPECT_EQ(to_json(schedule_inferred(rc.expr)), to_json(schedule_inferred(rc.expr)));
  }
}

// Sparse inputs (after transposes) and a sparse output are walked in storage
// order, every loop is a permutation of the variables, and a workspace exists
// exactly when a reduction loop sits above an output loop of a sparse output.
TEST(ScheduleProperty, Invariants) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 400; ++trial) {
    const auto rc = fuzz::random_case(rng);
    const TensorFormat out = rc.output_format ? *rc.output_format : infer_format(rc.expr);
    const Schedule s = schedule(rc.expr, out);
    const IndexVars all = get_index_variables(rc.expr);
    EXPECT_EQ(std::set<IndexVar>(s.order.begin(), s.order.end()), std::set<IndexVar>(all.begin(), all.end()));
    EXPECT_EQ(s.order.size(), all.size());
    auto pos = [&](const IndexVar& v) { return std::find(s.order.begin(), s.order.end(), v) - s.order.begin(); };

    const auto inputs = accesses(rc.expr);
    for (std::size_t a = 0; a < inputs.size(); ++a) {
      const TensorFormat f = effective_format(s, a, *inputs[a]);
      if (f.all_dense()) continue;
      for (int l = 0; l + 1 < f.order(); ++l)
        EXPECT_LT(pos(inputs[a]->indices[f.mode_ordering()[l]]),
                  pos(inputs[a]->indices[f.mode_ordering()[l + 1]]))
            << render(rc.expr);
    }
    const TensorFormat& pf = s.produced_format;
    if (pf.has_sparse_levels())
      for (int l = 0; l + 1 < pf.order(); ++l)
        EXPECT_LT(pos(rc.expr.output.indices[pf.mode_ordering()[l]]),
                  pos(rc.expr.output.indices[pf.mode_ordering()[l + 1]]));

    bool scatter = false;
    const IndexVars& o = rc.expr.output.indices;
    for (std::size_t d = 0; d < s.order.size(); ++d) {
      if (std::find(o.begin(), o.end(), s.order[d]) != o.end()) continue;
      for (std::size_t u = d + 1; u < s.order.size(); ++u)
        if (std::find(o.begin(), o.end(), s.order[u]) != o.end()) scatter = true;
    }
    EXPECT_EQ(s.workspace.has_value(), scatter && pf.has_sparse_levels()) << render(rc.expr);

    const std::size_t n = all.size();
    EXPECT_LE(s.moves.size(), n * n);
  }
}
