// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Each criterion also has a wall-clock budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "random_expr.hpp"
#include "sparsetc/bench.hpp"
#include "sparsetc/format_infer.hpp"
#include "sparsetc/matrix_market.hpp"
#include "sparsetc/oracle.hpp"
#include "sparsetc/parser.hpp"
#include "sparsetc/pipeline.hpp"

using namespace sparsetc;

namespace {

struct Check {
  std::string detail;
  bool ok = true;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

IndexVars vars(std::initializer_list<const char*> names) {
  IndexVars out;
  for (const char* n : names) out.push_back({n});
  return out;
}

std::set<std::string> names(const IndexVars& v) {
  std::set<std::string> out;
  for (const IndexVar& x : v) out.insert(x.name);
  return out;
}

double max_abs_diff(const DenseArray& a, const DenseArray& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double m = 0;
  for (Index k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

TensorExpr spgemm_csr() {
  Bindings b;
  b["A"] = generate_matrix("A", 24, 24, 0.1, 11);
  b["B"] = generate_matrix("B", 24, 24, 0.1, 12);
  return parse("C(i,k) = A(i,j) * B(j,k)", b);
}

Check gustavson() {
  Check c;
  const auto e = spgemm_csr();
  const Schedule s = schedule(e, TensorFormat::csr(24, 24));
  c.require(s.order == vars({"i", "j", "k"}), "loop order");
  c.require(s.workspace.has_value(), "no workspace");
  if (s.workspace) c.require(s.workspace->ws_indices == vars({"k"}), "workspace is not 1-D over k");
  c.require(s.transposes.empty(), "transposes");
  c.detail = c.ok ? "order [i,j,k], workspace [k], 0 transposes" : c.detail;
  return c;
}

Check inner_product_rejected() {
  Check c;
  const auto e = spgemm_csr();
  const Schedule s = schedule(e, TensorFormat::csr(24, 24));
  const int last = static_cast<int>(s.order.size()) - 1;
  int seen = 0;
  for (const MoveRecord& m : s.moves)
    if (m.var.name == "j" && m.to == last) {
      ++seen;
      c.require(m.cost.total() > 0, "innermost move cost not positive");
      c.require(!m.accepted, "innermost move accepted");
    }
  c.require(seen > 0, "innermost move of j never evaluated");
  c.require(s.order != vars({"i", "k", "j"}) && s.order != vars({"k", "i", "j"}), "inner-product order emitted");
  if (c.ok) {
    for (const MoveRecord& m : s.moves)
      if (m.var.name == "j" && m.to == last) {
        std::ostringstream os;
        os << "j->innermost cost " << m.cost.total() << ", rejected";
        c.detail = os.str();
      }
  }
  return c;
}

Check sum_of_product_inference() {
  Check c;
  Bindings b;
  b["A"] = build_from_entries("A", TensorFormat::csr(5, 5), {});
  b["B"] = build_from_entries("B", TensorFormat::csr(5, 5), {});
  b["C"] = build_from_entries("C", TensorFormat::dcsr(5, 5), {});
  const auto e = parse("D(i,j) = A(i,k) * B(k,j) + C(i,j)", b);
  c.require(infer_format(e) == TensorFormat::csr(5, 5), "output not CSR");
  const Expr product = e.rhs->lhs;
  c.require(infer_level(product, {"i"}) == LevelClass::Dense, "product i not dense");
  c.require(infer_level(product, {"j"}) == LevelClass::Sparse, "product j not compressed");
  if (c.ok) c.detail = "D csr; A*B (dense i, compressed j)";
  return c;
}

Check tiling_goldens() {
  Check c;
  Bindings b;
  b["S"] = build_from_entries("S", TensorFormat::csr(32, 32), {});
  b["X"] = build_from_entries("X", TensorFormat::dense({32, 32}), {});
  b["Y"] = build_from_entries("Y", TensorFormat::dense({32, 32}), {});
  const auto spmm = names(plan(parse("C(i,k) = S(i,j) * X(j,k)", b)).tiles);
  const auto gemm = names(plan(parse("C(i,k) = X(i,j) * Y(j,k)", b)).tiles);
  const auto sddmm = names(plan(parse("D(i,j) = S(i,j) * X(i,k) * Y(k,j)", b)).tiles);
  c.require(spmm == std::set<std::string>{"k"}, "SpMM tiles");
  c.require(gemm == std::set<std::string>{"i", "j", "k"}, "dense matmul tiles");
  c.require(sddmm == std::set<std::string>{"k"}, "SDDMM tiles");
  if (c.ok) c.detail = "SpMM {k}, GEMM {i,j,k}, SDDMM {k}";
  return c;
}

Check tiling_neutrality() {
  Check c;
  std::mt19937_64 rng(20240501);
  const Index sizes[] = {1, 3, 64, 1000};
  int instances = 0, draws = 0;
  while (instances < 200 && draws < 200000) {
    ++draws;
    const auto rc = fuzz::random_case(rng, 3, 16);
    RunOptions o;
    o.output_format = rc.output_format;
    o.tile_size = sizes[instances % 4];
    const Schedule tiled = plan(rc.expr, o);
    if (tiled.tiles.empty()) continue;
    o.tiling = false;
    const Schedule untiled = plan(rc.expr, o);
    const Tensor a = execute(rc.expr, tiled).tensor;
    const Tensor b = execute(rc.expr, untiled).tensor;
    c.require(a.storage() == b.storage(), "mismatch on " + render(rc.expr));
    ++instances;
  }
  c.require(instances >= 200, "only " + std::to_string(instances) + " tiled instances");
  if (c.ok) c.detail = std::to_string(instances) + " tiled instances bit-identical";
  return c;
}

Check differential() {
  Check c;
  std::mt19937_64 rng(7);
  double worst = 0;
  int integer_cases = 0;
  for (int trial = 0; trial < 1200; ++trial) {
    const auto rc = fuzz::random_case(rng, 3, 8);
    RunOptions o;
    o.output_format = rc.output_format;
    const RunResult r = run(rc.expr, {}, o);
    const double err = max_abs_diff(to_dense(r.tensor), eval_dense(rc.expr));
    if (rc.integer_values) {
      ++integer_cases;
      c.require(err == 0.0, "nonzero error on integer case " + render(rc.expr));
    } else {
      c.require(err <= 1e-10, "error " + std::to_string(err) + " on " + render(rc.expr));
    }
    worst = std::max(worst, err);
  }
  if (c.ok) {
    std::ostringstream os;
    os << "1200 instances (" << integer_cases << " integer), max-abs " << worst;
    c.detail = os.str();
  }
  return c;
}

Check fused_sddmm() {
  Check c;
  const Tensor m = generate_matrix("A", 100, 100, 0.01, 31);
  c.require(nnz(m) == 100, "nnz != 100");
  BenchOptions o;
  o.k = 16;
  const KernelCase kc = make_kernel(Kernel::SDDMM, m, o);
  const ExecutionResult r = execute(kc.expr, kc.schedule);
  c.require(r.counters.scalar_mults == 1700, "scalar_mults = " + std::to_string(r.counters.scalar_mults));
  c.require(max_abs_diff(to_dense(r.tensor), eval_dense(kc.expr)) <= 1e-10, "result differs from oracle");
  if (c.ok) c.detail = "scalar_mults 1700 vs unfused 160000";
  return c;
}

Check counter_laws() {
  Check c;
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = 20 + static_cast<Index>(rng() % 40), n = 20 + static_cast<Index>(rng() % 40);
    const Index k = 1 + static_cast<Index>(rng() % 24);
    const double density = 0.02 + 0.2 * std::uniform_real_distribution<double>(0, 1)(rng);
    Bindings b;
    b["A"] = generate_matrix("A", m, n, density, rng());
    b["B"] = generate_matrix("B", n, m, density, rng());
    b["x"] = random_dense("x", {n}, rng());
    b["X"] = random_dense("X", {n, k}, rng());

    // Independent counts straight from the stored coordinates.
    std::uint64_t a_nnz = 0;
    std::vector<std::uint64_t> b_row(n, 0);
    for (const Entry& e : stored_entries(b["B"])) ++b_row[e.coords[0]];
    std::uint64_t gustavson = 0;
    for (const Entry& e : stored_entries(b["A"])) {
      ++a_nnz;
      gustavson += b_row[e.coords[1]];
    }

    const auto spmv = run(parse("y(i) = A(i,j) * x(j)", b)).counters.scalar_mults;
    const auto spmm = run(parse("Y(i,k) = A(i,j) * X(j,k)", b)).counters.scalar_mults;
    const RunResult gemm = run(parse("C(i,k) = A(i,j) * B(j,k)", b));
    c.require(spmv == a_nnz, "SpMV law");
    c.require(spmm == a_nnz * static_cast<std::uint64_t>(k), "SpMM law");
    c.require(gemm.schedule && gemm.schedule->workspace.has_value(), "SpGEMM not Gustavson");
    c.require(gemm.counters.scalar_mults == gustavson, "SpGEMM law");
  }
  if (c.ok) c.detail = "SpMV, SpMM, SpGEMM exact on 20 instances each";
  return c;
}

Check scaling() {
  Check c;
  const Index n = 2048;
  const double nnzs[] = {1e4, 4e4, 1.6e5};
  std::vector<double> xs, ys;
  BenchOptions o;
  o.k = 32;
  o.reps = 10;
  o.warmup = 3;
  std::ostringstream os;
  for (double target : nnzs) {
    const Tensor m = generate_matrix("A", n, n, target / static_cast<double>(n * n), 5);
    const BenchResult r = bench(Kernel::SpMM, m, o);
    xs.push_back(std::log(static_cast<double>(r.nnz)));
    ys.push_back(std::log(r.mean_ns));
    os << r.nnz << ":" << static_cast<long long>(r.mean_ns / 1000) << "us ";
  }
  const double mx = (xs[0] + xs[1] + xs[2]) / 3, my = (ys[0] + ys[1] + ys[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int k = 0; k < 3; ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  const double slope = sxy / sxx;
  os << "slope " << slope;
  c.require(slope >= 0.7 && slope <= 1.3, os.str());
  c.detail = os.str();
  return c;
}

Check round_trips() {
  Check c;
  std::mt19937_64 rng(123);
  const char* formats[] = {"csr", "csc", "dcsr", "coo", "dense"};
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = 1 + static_cast<Index>(rng() % 30), n = 1 + static_cast<Index>(rng() % 30);
    const double density = std::uniform_real_distribution<double>(0, 0.5)(rng);
    const char* fmt = formats[trial % 4];
    const Tensor t = generate_matrix("M", m, n, density, rng(), fmt);
    std::stringstream ss;
    write_matrix_market(ss, t);
    const Tensor back = read_matrix_market(ss, "M", fmt);
    c.require(back.storage() == t.storage(), "Matrix Market round-trip differs");

    const DenseArray ref = to_dense(t);
    for (const char* from : formats) {
      const Tensor src = convert(t, TensorFormat::named(from, {m, n}));
      for (const char* to : formats)
        c.require(to_dense(convert(src, TensorFormat::named(to, {m, n}))) == ref,
                  std::string("convert ") + from + " -> " + to);
    }
  }
  if (c.ok) c.detail = "50 matrices, 25 conversions each";
  return c;
}

Check dense_dispatch() {
  Check c;
  auto dense = [](const char* name, Shape shape, std::vector<double> v) {
    const TensorFormat f = TensorFormat::dense(shape);
    return from_dense(name, DenseArray(std::move(shape), std::move(v)), f);
  };
  Bindings b;
  b["A"] = dense("A", {2, 2}, {1, 2, 3, 4});
  b["B"] = dense("B", {2, 2}, {5, 6, 7, 8});
  b["x"] = dense("x", {2}, {1, -1});
  struct Case {
    const char* src;
    DenseArray expect;
  };
  const Case cases[] = {
      {"C(i,k) = A(i,j) * B(j,k)", DenseArray({2, 2}, {19, 22, 43, 50})},
      {"y(i) = A(i,j) * x(j)", DenseArray({2}, {-1, -1})},
      {"C(i,j) = A(i,j) + B(i,j) * A(i,j)", DenseArray({2, 2}, {6, 14, 24, 36})},
  };
  for (const Case& k : cases) {
    const RunResult r = run(parse(k.src, b));
    c.require(r.dense_dispatch, std::string("not dispatched: ") + k.src);
    c.require(!r.schedule.has_value(), std::string("scheduled: ") + k.src);
    c.require(to_dense(r.tensor) == k.expect, std::string("wrong result: ") + k.src);
  }
  if (c.ok) c.detail = "3 instances on the dense path";
  return c;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Check()> body;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "scheduler golden (Gustavson)", 1, gustavson},
      {2, "scheduler rejection (inner product)", 1, inner_product_rejected},
      {3, "format inference golden", 1, sum_of_product_inference},
      {4, "tiling goldens", 1, tiling_goldens},
      {5, "tiling neutrality", 60, tiling_neutrality},
      {6, "differential correctness", 300, differential},
      {7, "fused SDDMM complexity", 1, fused_sddmm},
      {8, "kernel counter laws", 10, counter_laws},
      {9, "SpMM scaling", 60, scaling},
      {10, "round-trips", 30, round_trips},
      {11, "dense dispatch", 1, dense_dispatch},
  };
  int failed = 0;
  for (const Criterion& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.body();
    } catch (const std::exception& ex) {
      c.ok = false;
      c.detail = std::string("exception: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > cr.budget_s) {
      c.ok = false;
      c.detail += " (over budget)";
    }
    failed += !c.ok;
    std::printf("criterion %2d %-38s %s  %.3fs  %s\n", cr.id, cr.name, c.ok ? "PASS" : "FAIL", secs,
                c.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
