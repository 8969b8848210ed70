#include <gtest/gtest.h>

#include <set>

#include "sparsetc/bench.hpp"
#include "sparsetc/parser.hpp"

using namespace sparsetc;

TEST(Generate, Deterministic) {
  const Tensor a = generate_matrix("A", 30, 20, 0.1, 7);
  const Tensor b = generate_matrix("A", 30, 20, 0.1, 7);
  const Tensor c = generate_matrix("A", 30, 20, 0.1, 8);
  EXPECT_EQ(a.storage(), b.storage());
  EXPECT_NE(a.storage(), c.storage());
}

TEST(Generate, ExactNonzeroCount) {
  EXPECT_EQ(nnz(generate_matrix("A", 10, 10, 0.0, 1)), 0);
  const Tensor t = generate_matrix("A", 100, 100, 0.01, 2, "coo");
  EXPECT_EQ(t.format(), TensorFormat::coo({100, 100}));
  std::set<std::pair<Index, Index>> seen;
  for (const Entry& e : stored_entries(t)) {
    EXPECT_GE(e.value, -1.0);
    EXPECT_LE(e.value, 1.0);
    seen.insert({e.coords[0], e.coords[1]});
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(nnz(generate_matrix("A", 4, 5, 1.0, 3)), 20);
}

TEST(Kernels, Names) {
  for (Kernel k : {Kernel::SpMV, Kernel::SpMM, Kernel::SpGEMM, Kernel::SDDMM})
    EXPECT_EQ(parse_kernel(to_string(k)), k);
  EXPECT_THROW(parse_kernel("gemm"), std::invalid_argument);
}

TEST(Kernels, SpmvIdentity) {
  const Tensor id = build_from_entries("A", TensorFormat::csr(2, 2), std::vector<Entry>{{{0, 0}, 1}, {{1, 1}, 1}});
  BenchOptions o;
  o.reps = 1;
  o.warmup = 0;
  const BenchResult r = bench(Kernel::SpMV, id, o);
  EXPECT_EQ(r.counters.scalar_mults, 2u);
  EXPECT_EQ(r.nnz, 2);
  EXPECT_EQ(r.dims, (Shape{2, 2}));
  EXPECT_EQ(r.format, "csr");
}

TEST(Kernels, SpgemmTruncatesToSquare) {
  const Tensor m = generate_matrix("A", 3, 4, 0.5, 4);
  const KernelCase kc = make_kernel(Kernel::SpGEMM, m, {});
  for (const Access* a : accesses(kc.expr)) EXPECT_EQ(a->tensor.shape(), (Shape{3, 3}));
  EXPECT_EQ(output_shape(kc.expr), (Shape{3, 3}));
}

TEST(Kernels, BenchCountersMatchExecute) {
  const Tensor m = generate_matrix("A", 40, 40, 0.05, 9);
  BenchOptions o;
  o.reps = 2;
  o.warmup = 1;
  o.k = 8;
  for (Kernel k : {Kernel::SpMV, Kernel::SpMM, Kernel::SpGEMM, Kernel::SDDMM}) {
    const KernelCase kc = make_kernel(k, m, o);
    const BenchResult r = bench(k, m, o);
    EXPECT_EQ(r.counters, execute(kc.expr, kc.schedule).counters) << to_string(k);
    EXPECT_EQ(r.reps, 2);
    EXPECT_GT(r.mean_ns, 0.0);
  }
  EXPECT_EQ(bench(Kernel::SDDMM, m, o).counters.scalar_mults, static_cast<std::uint64_t>(nnz(m) * (o.k + 1)));
}

TEST(Kernels, RejectsZeroReps) {
  BenchOptions o;
  o.reps = 0;
  EXPECT_THROW(bench(Kernel::SpMV, generate_matrix("A", 4, 4, 0.5, 1), o), std::invalid_argument);
}

TEST(Kernels, JsonSchema) {
  BenchOptions o;
  o.reps = 1;
  o.warmup = 0;
  const auto j = to_json(bench(Kernel::SpMM, generate_matrix("A", 8, 8, 0.25, 1), o));
  for (const char* key : {"kernel", "format", "dims", "nnz", "reps", "mean_ns", "std_ns", "counters"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["kernel"], "spmm");
  EXPECT_EQ(j["nnz"], 16);
}
