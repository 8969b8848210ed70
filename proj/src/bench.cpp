#include "sparsetc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "sparsetc/error.hpp"
#include "sparsetc/parser.hpp"
#include "sparsetc/report.hpp"

namespace sparsetc {

Tensor generate_matrix(const std::string& name, Index rows, Index cols, double density,
                       std::uint64_t seed, std::string_view format) {
  if (rows < 1 || cols < 1) throw ShapeError("matrix extents must be positive");
  if (!(density >= 0.0 && density <= 1.0)) throw DataError("density must lie in [0, 1]");
  const Index total = rows * cols;
  const Index count = std::min<Index>(total, std::llround(static_cast<double>(total) * density));

  // Floyd's sampling of `count` distinct linear indices.
  std::mt19937_64 rng(seed);
  std::unordered_set<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(count) * 2);
  for (Index j = total - count; j < total; ++j) {
    const Index t = std::uniform_int_distribution<Index>(0, j)(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<Index> linear(chosen.begin(), chosen.end());
  std::sort(linear.begin(), linear.end());

  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::vector<Entry> entries;
  entries.reserve(linear.size());
  for (Index k : linear) entries.push_back({{k / cols, k % cols}, value(rng)});
  return build_from_entries(name, TensorFormat::named(format, {rows, cols}), entries);
}

Tensor random_dense(const std::string& name, const Shape& shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  DenseArray d(shape);
  for (double& x : d.data()) x = value(rng);
  return from_dense(name, d, TensorFormat::dense(shape));
}

Kernel parse_kernel(std::string_view name) {
  if (name == "spmv") return Kernel::SpMV;
  if (name == "spmm") return Kernel::SpMM;
  if (name == "spgemm") return Kernel::SpGEMM;
  if (name == "sddmm") return Kernel::SDDMM;
  throw std::invalid_argument("unknown kernel: " + std::string(name));
}

std::string_view to_string(Kernel k) {
  switch (k) {
    case Kernel::SpMV: return "spmv";
    case Kernel::SpMM: return "spmm";
    case Kernel::SpGEMM: return "spgemm";
    case Kernel::SDDMM: return "sddmm";
  }
  return "?";
}

namespace {

std::string default_format(Kernel k, const BenchOptions& o) {
  if (!o.format.empty()) return o.format;
  return k == Kernel::SpGEMM ? "coo" : "csr";
}

}  // namespace

KernelCase make_kernel(Kernel kernel, const Tensor& matrix, const BenchOptions& options) {
  if (matrix.order() != 2) throw ShapeError("benchmark kernels take a matrix");
  const std::string fmt = default_format(kernel, options);
  const Index rows = matrix.shape()[0];
  const Index cols = matrix.shape()[1];
  Tensor a = convert(matrix, TensorFormat::named(fmt, matrix.shape())).renamed("A");
  Bindings b;
  std::string src;
  switch (kernel) {
    case Kernel::SpMV:
      b["x"] = random_dense("x", {cols}, options.seed + 1);
      src = "y(i) = A(i,j) * x(j)";
      break;
    case Kernel::SpMM:
      b["X"] = random_dense("X", {cols, options.k}, options.seed + 1);
      src = "Y(i,k) = A(i,j) * X(j,k)";
      break;
    case Kernel::SpGEMM: {
      // Square truncation, then A * A^T.
      const Index n = std::min(rows, cols);
      std::vector<Entry> kept;
      std::vector<Entry> flipped;
      for (const Entry& e : stored_entries(matrix)) {
        if (e.coords[0] >= n || e.coords[1] >= n) continue;
        kept.push_back(e);
        flipped.push_back({{e.coords[1], e.coords[0]}, e.value});
      }
      a = build_from_entries("A", TensorFormat::named(fmt, {n, n}), kept);
      b["B"] = build_from_entries("B", TensorFormat::named(fmt, {n, n}), flipped);
      src = "C(i,k) = A(i,j) * B(j,k)";
      break;
    }
    case Kernel::SDDMM:
      b["B"] = random_dense("B", {rows, options.k}, options.seed + 1);
      b["C"] = random_dense("C", {options.k, cols}, options.seed + 2);
      src = "D(i,j) = A(i,j) * B(i,k) * C(k,j)";
      break;
  }
  b["A"] = a;
  KernelCase kc{parse(src, b), {}};
  RunOptions ro;
  ro.tiling = options.tiling;
  ro.tile_size = options.tile_size;
  kc.schedule = plan(kc.expr, ro);
  return kc;
}

BenchResult bench(Kernel kernel, const Tensor& matrix, const BenchOptions& options) {
  if (options.reps < 1) throw std::invalid_argument("reps must be at least 1");
  const KernelCase kc = make_kernel(kernel, matrix, options);
  using Clock = std::chrono::steady_clock;
  BenchResult r;
  r.kernel = kernel;
  r.format = default_format(kernel, options);
  const Access* a = accesses(kc.expr).front();
  r.dims = a->tensor.shape();
  r.nnz = nnz(a->tensor);
  r.reps = options.reps;
  for (int w = 0; w < options.warmup; ++w) execute(kc.expr, kc.schedule);
  std::vector<double> times;
  for (int k = 0; k < options.reps; ++k) {
    const auto t0 = Clock::now();
    ExecutionResult x = execute(kc.expr, kc.schedule);
    const auto t1 = Clock::now();
    times.push_back(static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
    r.counters = x.counters;
  }
  double sum = 0;
  for (double t : times) sum += t;
  r.mean_ns = sum / static_cast<double>(times.size());
  double var = 0;
  for (double t : times) var += (t - r.mean_ns) * (t - r.mean_ns);
  r.std_ns = times.size() > 1 ? std::sqrt(var / static_cast<double>(times.size() - 1)) : 0.0;
  return r;
}

nlohmann::json to_json(const BenchResult& r) {
  return {{"kernel", std::string(to_string(r.kernel))},
          {"format", r.format},
          {"dims", r.dims},
          {"nnz", r.nnz},
          {"reps", r.reps},
          {"mean_ns", r.mean_ns},
          {"std_ns", r.std_ns},
          {"counters", to_json(r.counters)}};
}

}  // namespace sparsetc
