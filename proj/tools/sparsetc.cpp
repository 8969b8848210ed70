#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sparsetc/bench.hpp"
#include "sparsetc/error.hpp"
#include "sparsetc/matrix_market.hpp"
#include "sparsetc/oracle.hpp"
#include "sparsetc/parser.hpp"
#include "sparsetc/pipeline.hpp"
#include "sparsetc/report.hpp"

namespace {

using namespace sparsetc;
using nlohmann::json;

enum Exit { kOk = 0, kUsage = 2, kParse = 3, kData = 4, kShape = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<std::string, std::string> split_assign(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected NAME=VALUE, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

Index parse_index(std::string_view s) {
  Index v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 1)
    throw UsageError("bad extent '" + std::string(s) + "'");
  return v;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw UsageError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("bad number '" + s + "'");
  }
}

Shape parse_shape(const std::string& s) {
  Shape shape;
  std::size_t start = 0;
  if (s.empty()) return shape;
  for (;;) {
    const auto x = s.find('x', start);
    shape.push_back(parse_index(std::string_view(s).substr(start, x - start)));
    if (x == std::string::npos) break;
    start = x + 1;
  }
  return shape;
}

struct TensorSpecs {
  std::vector<std::string> tensors;  // NAME=SOURCE
  std::vector<std::string> formats;  // NAME=FORMAT
  std::uint64_t seed = 0;
};

/// Sources: a Matrix Market path, `rand:SHAPE[:DENSITY]` or `empty:SHAPE`.
std::pair<Bindings, std::vector<std::string>> load_tensors(const TensorSpecs& specs) {
  std::map<std::string, std::string> formats;
  for (const std::string& f : specs.formats) formats.insert(split_assign(f));
  Bindings b;
  std::vector<std::string> order;
  std::uint64_t k = 0;
  for (const std::string& spec : specs.tensors) {
    const auto [name, src] = split_assign(spec);
    const auto fit = formats.find(name);
    const bool has_fmt = fit != formats.end();
    Tensor t;
    if (src.rfind("rand:", 0) == 0 || src.rfind("empty:", 0) == 0) {
      const bool empty = src[0] == 'e';
      std::string rest = src.substr(empty ? 6 : 5);
      double density = 1.0;
      if (const auto c = rest.find(':'); c != std::string::npos) {
        density = parse_double(rest.substr(c + 1));
        rest = rest.substr(0, c);
      }
      const Shape shape = parse_shape(rest);
      const std::string fmt_name =
          has_fmt ? fit->second : (density >= 1.0 && !empty ? "dense" : (shape.size() == 2 ? "csr" : "coo"));
      const TensorFormat fmt = TensorFormat::named(fmt_name, shape);
      if (empty) {
        t = build_from_entries(name, fmt, {});
      } else if (shape.size() == 2 && density < 1.0) {
        t = generate_matrix(name, shape[0], shape[1], density, specs.seed + k, fmt_name);
      } else {
        t = convert(random_dense(name, shape, specs.seed + k), fmt);
      }
    } else {
      t = read_matrix_market_file(src, name, has_fmt ? fit->second : "csr");
    }
    b[name] = t;
    order.push_back(name);
    ++k;
  }
  return {b, order};
}

TensorExpr parse_expression(const std::string& src, const Bindings& b,
                            const std::vector<std::string>& order) {
  if (is_einsum(src)) return parse_einsum(src, order, b);
  return parse(src, b);
}

void write_grid(std::ostream& os, const Tensor& t) {
  const DenseArray d = to_dense(t);
  const Index last = d.order() == 0 ? 1 : d.shape().back();
  char buf[64];
  for (Index k = 0; k < d.size(); ++k) {
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d.data()[k]);
    os.write(buf, p - buf);
    os << ((k + 1) % last == 0 || d.order() < 2 ? '\n' : ' ');
  }
}

void write_result(const std::string& path, const Tensor& t) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path);
  if (t.order() == 2 && t.format().has_sparse_levels()) {
    write_matrix_market(os, t);
  } else {
    write_grid(os, t);
  }
}

json dense_json(const Tensor& t) {
  const DenseArray d = to_dense(t);
  return {{"shape", d.shape()}, {"values", std::vector<double>(d.data().begin(), d.data().end())}};
}

struct RunArgs {
  std::string expr;
  TensorSpecs specs;
  Index tile_size = kDefaultTileSize;
  bool no_tiling = false;
  bool emit_counters = false;
  bool explain_schedule = false;
  bool explain_format = false;
  bool as_json = false;
  std::string out;
};

int cmd_run(const RunArgs& a) {
  auto [b, order] = load_tensors(a.specs);
  const TensorExpr e = parse_expression(a.expr, b, order);
  RunOptions o;
  o.tiling = !a.no_tiling;
  o.tile_size = a.tile_size;
  for (const std::string& f : a.specs.formats) {
    const auto [name, fmt] = split_assign(f);
    if (name == e.output.name) o.output_format = TensorFormat::named(fmt, output_shape(e));
  }
  const RunResult r = run(e, {}, o);
  json report = run_report(e, r);
  if (!(a.emit_counters || a.as_json)) report.erase("counters");
  if (!(a.explain_schedule || a.as_json)) report.erase("schedule");
  if (a.explain_format || a.as_json) report["format_derivation"] = format_derivation_json(e);
  if (!a.out.empty()) {
    write_result(a.out, r.tensor);
    report["out"] = a.out;
  } else if (to_dense(r.tensor).size() <= 4096) {
    report["result"] = dense_json(r.tensor);
  }
  std::cout << report.dump(a.as_json ? 2 : -1) << '\n';
  return kOk;
}

int cmd_explain(const RunArgs& a) {
  auto [b, order] = load_tensors(a.specs);
  const TensorExpr e = parse_expression(a.expr, b, order);
  RunOptions o;
  o.tiling = !a.no_tiling;
  o.tile_size = a.tile_size;
  json report = {{"expression", render(e)}, {"dense_dispatch", all_inputs_dense(e)}};
  report["format_derivation"] = format_derivation_json(e);
  report["schedule"] = to_json(plan(e, o));
  std::cout << report.dump(2) << '\n';
  return kOk;
}

struct BenchArgs {
  std::string kernel;
  std::vector<std::string> matrices;
  std::vector<std::string> synthetic;  // RxC:DENSITY
  BenchOptions options;
  bool as_json = false;
};

int cmd_bench(const BenchArgs& a) {
  const Kernel kernel = [&] {
    try {
      return parse_kernel(a.kernel);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  if (a.options.reps < 1) throw UsageError("--reps must be at least 1");
  if (a.matrices.empty() && a.synthetic.empty()) throw UsageError("no --matrix or --synthetic input");
  json results = json::array();
  for (const std::string& path : a.matrices) {
    json r = to_json(bench(kernel, read_matrix_market_file(path, "A"), a.options));
    r["source"] = path;
    results.push_back(r);
  }
  std::uint64_t k = 0;
  for (const std::string& spec : a.synthetic) {
    const auto c = spec.find(':');
    if (c == std::string::npos) throw UsageError("synthetic spec is ROWSxCOLS:DENSITY");
    const Shape shape = parse_shape(spec.substr(0, c));
    if (shape.size() != 2) throw UsageError("synthetic spec is ROWSxCOLS:DENSITY");
    const Tensor m = generate_matrix("A", shape[0], shape[1], parse_double(spec.substr(c + 1)),
                                     a.options.seed + 1000 * ++k);
    json r = to_json(bench(kernel, m, a.options));
    r["source"] = spec;
    results.push_back(r);
  }
  const json out = {{"kernel", a.kernel}, {"results", results}};
  std::cout << out.dump(a.as_json ? 2 : -1) << '\n';
  return kOk;
}

struct GenArgs {
  Index rows = 0;
  Index cols = 0;
  double density = 0;
  std::uint64_t seed = 0;
  std::string format = "csr";
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  const Tensor t = generate_matrix("A", a.rows, a.cols, a.density, a.seed, a.format);
  if (a.out.empty()) {
    write_matrix_market(std::cout, t);
  } else {
    write_matrix_market_file(a.out, t);
  }
  return kOk;
}

void add_run_flags(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("expr", a.expr, "Assignment such as 'y(i)=A(i,j)*x(j)' or einsum 'ij,j->i'")
      ->required();
  cmd->add_option("--tensor,-t", a.specs.tensors, "NAME=PATH.mtx | NAME=rand:SHAPE[:DENSITY] | NAME=empty:SHAPE");
  cmd->add_option("--format,-f", a.specs.formats, "NAME=csr|csc|dcsr|coo|dense (output name overrides inference)");
  cmd->add_option("--tile-size", a.tile_size, "Tile size for dense loops")->check(CLI::PositiveNumber);
  cmd->add_flag("--no-tiling", a.no_tiling, "Disable tiling");
  cmd->add_option("--seed", a.specs.seed, "Seed for rand: tensors");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparsetc: sparse tensor algebra engine"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Evaluate an expression");
  add_run_flags(run, run_args);
  run->add_flag("--emit-counters", run_args.emit_counters, "Include operation counters");
  run->add_flag("--explain-schedule", run_args.explain_schedule, "Include the schedule");
  run->add_flag("--explain-format", run_args.explain_format, "Include the format derivation");
  run->add_option("--out,-o", run_args.out, "Write the result (Matrix Market or text grid)");
  run->add_flag("--json", run_args.as_json, "Full, pretty-printed report");

  RunArgs explain_args;
  CLI::App* explain = app.add_subcommand("explain", "Show inferred format and schedule without running");
  add_run_flags(explain, explain_args);

  BenchArgs bench_args;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Time a kernel");
  bench_cmd->add_option("kernel", bench_args.kernel, "spmv | spmm | spgemm | sddmm")->required();
  bench_cmd->add_option("--matrix,-m", bench_args.matrices, "Matrix Market input");
  bench_cmd->add_option("--synthetic", bench_args.synthetic, "ROWSxCOLS:DENSITY");
  bench_cmd->add_option("--reps", bench_args.options.reps, "Timed repetitions");
  bench_cmd->add_option("--warmup", bench_args.options.warmup, "Untimed repetitions");
  bench_cmd->add_option("--k", bench_args.options.k, "Dense columns for spmm/sddmm")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench_args.options.seed, "Seed for dense operands");
  bench_cmd->add_option("--format,-f", bench_args.options.format, "Sparse operand format");
  bench_cmd->add_option("--tile-size", bench_args.options.tile_size)->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--no-tiling", [&](std::int64_t) { bench_args.options.tiling = false; });
  bench_cmd->add_flag("--json", bench_args.as_json, "Pretty-print");

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "Write a random sparse matrix");
  gen->add_option("--rows", gen_args.rows)->required()->check(CLI::PositiveNumber);
  gen->add_option("--cols", gen_args.cols)->required()->check(CLI::PositiveNumber);
  gen->add_option("--density", gen_args.density)->required()->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", gen_args.seed);
  gen->add_option("--format,-f", gen_args.format);
  gen->add_option("--out,-o", gen_args.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (explain->parsed()) return cmd_explain(explain_args);
    if (bench_cmd->parsed()) return cmd_bench(bench_args);
    if (gen->parsed()) return cmd_gen(gen_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << '\n';
    return kShape;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
