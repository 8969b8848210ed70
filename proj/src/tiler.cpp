#include "sparsetc/tiler.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace sparsetc {

TensorFormat effective_format(const Schedule& s, std::size_t a, const Access& access) {
  for (const TransposePlan& t : s.transposes)
    if (t.access == a) return access.tensor.format().with_mode_ordering(t.mode_ordering);
  return access.tensor.format();
}

IndexVars select_tiles(const TensorExpr& e, const Schedule& s) {
  const IndexVars all = get_index_variables(e);
  const auto inputs = accesses(e);

  std::set<IndexVar> working;
  auto consider = [&](const IndexVars& idx) {
    if (idx.size() < all.size()) working.insert(idx.begin(), idx.end());
  };
  consider(e.output.indices);
  for (const Access* a : inputs) consider(a->indices);

  std::set<IndexVar> sparse_vars;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const TensorFormat f = effective_format(s, k, *inputs[k]);
    for (int d = 0; d < f.order(); ++d)
      if (level_is_sparse(f, d)) sparse_vars.insert(inputs[k]->indices[d]);
  }
  for (const IndexVar& v : sparse_vars) working.erase(v);

  IndexVars out;
  for (std::size_t d = 0; d < s.order.size(); ++d) {
    const IndexVar& v = s.order[d];
    if (!working.contains(v)) continue;
    const bool ancestor = std::any_of(s.order.begin() + d + 1, s.order.end(),
                                      [&](const IndexVar& u) { return sparse_vars.contains(u); });
    if (!ancestor) out.push_back(v);
  }
  return out;
}

Schedule tile(const TensorExpr& e, const Schedule& s, Index tile_size) {
  if (tile_size < 1) throw std::invalid_argument("tile size must be at least 1");
  Schedule tiled = s;
  tiled.tiles = select_tiles(e, s);
  tiled.tile_size = tile_size;
  return tiled;
}

std::vector<std::string> tiled_loop_names(const Schedule& s) {
  std::vector<std::string> names;
  for (const IndexVar& v : s.tiles) names.push_back(v.name + "_outer");
  for (const IndexVar& v : s.order) {
    const bool tiled = std::find(s.tiles.begin(), s.tiles.end(), v) != s.tiles.end();
    names.push_back(tiled ? v.name + "_inner" : v.name);
  }
  return names;
}

Index block_count(Index extent, Index tile_size) { return (extent + tile_size - 1) / tile_size; }

Block block_range(Index extent, Index tile_size, Index block) {
  const Index begin = block * tile_size;
  return {begin, std::min(extent, begin + tile_size)};
}

}  // namespace sparsetc
