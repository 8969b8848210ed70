#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"
#include "sparsetc/pipeline.hpp"

namespace sparsetc {

/// Matrix with exactly round(rows * cols * density) distinct coordinates,
/// sampled uniformly, and values uniform in [-1, 1]. Deterministic per seed.
Tensor generate_matrix(const std::string& name, Index rows, Index cols, double density,
                       std::uint64_t seed, std::string_view format = "csr");

/// Dense tensor with values uniform in [-1, 1].
Tensor random_dense(const std::string& name, const Shape& shape, std::uint64_t seed);

enum class Kernel { SpMV, SpMM, SpGEMM, SDDMM };

/// Throws std::invalid_argument for unknown names.
Kernel parse_kernel(std::string_view name);
std::string_view to_string(Kernel k);

struct BenchOptions {
  int reps = 10;
  int warmup = 5;
  Index k = 16;  // dense columns for SpMM and SDDMM
  std::uint64_t seed = 0;
  /// Sparse operand format; empty selects coo for SpGEMM and csr otherwise.
  std::string format;
  bool tiling = true;
  Index tile_size = kDefaultTileSize;
};

/// The expression and schedule a benchmark times.
struct KernelCase {
  TensorExpr expr;
  Schedule schedule;
};

KernelCase make_kernel(Kernel kernel, const Tensor& matrix, const BenchOptions& options);

struct BenchResult {
  Kernel kernel = Kernel::SpMV;
  std::string format;
  Shape dims;
  Index nnz = 0;
  int reps = 0;
  double mean_ns = 0;
  double std_ns = 0;
  OpCounter counters;
};

/// Times execute() only: `warmup` untimed runs, then `reps` timed ones.
/// Throws std::invalid_argument when reps < 1.
BenchResult bench(Kernel kernel, const Tensor& matrix, const BenchOptions& options = {});

nlohmann::json to_json(const BenchResult& r);

}  // namespace sparsetc
