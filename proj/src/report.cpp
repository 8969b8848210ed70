#include "sparsetc/report.hpp"

#include "sparsetc/format_infer.hpp"

namespace sparsetc {
namespace {

using nlohmann::json;

json names(const IndexVars& vars) {
  json out = json::array();
  for (const IndexVar& v : vars) out.push_back(v.name);
  return out;
}

json cost_json(const CostBreakdown& c) {
  return {{"filter_loss", c.filter_loss},
          {"workspace", c.workspace},
          {"transpose", c.transpose},
          {"dense_iteration", c.dense_iteration},
          {"total", c.total()}};
}

json derivation_json(const LevelDerivation& d) {
  json out = {{"node", d.node}, {"level", std::string(to_string(d.result))}};
  if (!d.children.empty()) {
    out["children"] = json::array();
    for (const LevelDerivation& c : d.children) out["children"].push_back(derivation_json(c));
  }
  return out;
}

}  // namespace

json to_json(const TensorFormat& f) {
  json levels = json::array();
  for (LevelKind k : f.levels()) levels.push_back(std::string(to_string(k)));
  return {{"name", f.name()}, {"shape", f.shape()}, {"mode_ordering", f.mode_ordering()},
          {"levels", levels}};
}

json to_json(const OpCounter& c) {
  return {{"scalar_mults", c.scalar_mults},
          {"scalar_adds", c.scalar_adds},
          {"iterator_advances", c.iterator_advances}};
}

json to_json(const Schedule& s) {
  json loops = json::array();
  for (const Loop& l : s.loops)
    loops.push_back({{"var", l.var.name}, {"kind", std::string(to_string(l.kind))},
                     {"filters", l.filters}});
  json transposes = json::array();
  for (const TransposePlan& t : s.transposes)
    transposes.push_back({{"tensor", t.tensor}, {"output", t.access == TransposePlan::npos},
                          {"mode_ordering", t.mode_ordering}});
  json moves = json::array();
  for (const MoveRecord& m : s.moves)
    moves.push_back({{"var", m.var.name}, {"from", m.from}, {"to", m.to},
                     {"order_before", names(m.order_before)}, {"cost", cost_json(m.cost)},
                     {"accepted", m.accepted}});
  json removed = json::array();
  for (const RemovedEdge& r : s.removed_edges)
    removed.push_back({{"from", r.from.name}, {"to", r.to.name}, {"transposed", r.transposed}});

  json out = {{"loop_order", names(s.order)},
              {"loops", loops},
              {"sparsity_order", names(s.sparsity_order)},
              {"moves", moves},
              {"removed_edges", removed},
              {"transposes", transposes},
              {"output_format", to_json(s.output_format)},
              {"produced_format", to_json(s.produced_format)},
              {"tiles", names(s.tiles)},
              {"tile_size", s.tile_size},
              {"tiled_loops", tiled_loop_names(s)}};
  if (s.workspace) {
    out["workspace"] = {{"split_var", s.workspace->split_var.name},
                        {"ws_indices", names(s.workspace->ws_indices)},
                        {"producer_loops", names(s.workspace->producer_loops)},
                        {"consumer_loops", names(s.workspace->consumer_loops)}};
  } else {
    out["workspace"] = nullptr;
  }
  return out;
}

json format_derivation_json(const TensorExpr& e) {
  json out = json::object();
  for (const IndexVar& v : e.output.indices) out[v.name] = derivation_json(derive_level(e.rhs, v));
  return out;
}

json run_report(const TensorExpr& e, const RunResult& r) {
  json out = {{"expression", render(e)},
              {"path", r.dense_dispatch ? "dense-dispatch" : "sparse"},
              {"inferred_format", to_json(r.inferred_format)},
              {"output_format", to_json(r.tensor.format())},
              {"nnz", nnz(r.tensor)},
              {"counters", to_json(r.counters)},
              {"wall_time_ns", r.wall_time_ns}};
  out["schedule"] = r.schedule ? to_json(*r.schedule) : json(nullptr);
  return out;
}

}  // namespace sparsetc
