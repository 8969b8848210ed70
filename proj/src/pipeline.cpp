#include "sparsetc/pipeline.hpp"

#include <chrono>

#include "sparsetc/error.hpp"
#include "sparsetc/format_infer.hpp"
#include "sparsetc/oracle.hpp"

namespace sparsetc {

Schedule plan(const TensorExpr& e, const RunOptions& options) {
  const TensorFormat out = options.output_format ? *options.output_format : infer_format(e);
  if (out.shape() != output_shape(e))
    throw ShapeError("output format shape does not match the expression");
  Schedule s = schedule(e, out, options.cost_model);
  if (options.tiling) s = tile(e, s, options.tile_size);
  return s;
}

RunResult run(const TensorExpr& e, const Bindings& bindings, const RunOptions& options) {
  const TensorExpr bound = rebind(e, bindings);
  for (const Access* a : accesses(bound))
    if (!a->tensor.valid()) throw ParseError("tensor " + a->name + " is not bound");
  RunResult r;
  r.inferred_format = infer_format(bound);
  using Clock = std::chrono::steady_clock;

  if (all_inputs_dense(bound)) {
    r.dense_dispatch = true;
    const TensorFormat out =
        options.output_format ? *options.output_format : TensorFormat::dense(output_shape(bound));
    const auto t0 = Clock::now();
    const DenseArray d = eval_dense(bound);
    r.wall_time_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
    r.tensor = from_dense(bound.output.name, d, out);
    return r;
  }

  r.schedule = plan(bound, options);
  const auto t0 = Clock::now();
  ExecutionResult x = execute(bound, *r.schedule);
  r.wall_time_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
  r.tensor = std::move(x.tensor);
  r.counters = x.counters;
  return r;
}

}  // namespace sparsetc
