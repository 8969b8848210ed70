#pragma once

#include <string>
#include <vector>

#include "sparsetc/schedule.hpp"

namespace sparsetc {

inline constexpr Index kDefaultTileSize = 64;

/// Loops worth tiling: indices of accesses that are reused across some
/// loop, minus sparse dimensions, minus ancestors of sparse loops.
IndexVars select_tiles(const TensorExpr& e, const Schedule& s);

/// Returns `s` with the selected loops split by `tile_size`. Throws
/// std::invalid_argument when tile_size < 1.
Schedule tile(const TensorExpr& e, const Schedule& s, Index tile_size = kDefaultTileSize);

/// Loop nest after tiling, e.g. {"k_outer", "i", "j", "k_inner"}: every
/// outer block loop is hoisted to the top in pre-tiling order.
std::vector<std::string> tiled_loop_names(const Schedule& s);

/// Clamped block [begin, end) of block `block` over `extent`.
struct Block {
  Index begin;
  Index end;
};
Index block_count(Index extent, Index tile_size);
Block block_range(Index extent, Index tile_size, Index block);

/// Format of access `a` (index into accesses(e)) after the schedule's
/// transposes.
TensorFormat effective_format(const Schedule& s, std::size_t a, const Access& access);

}  // namespace sparsetc
