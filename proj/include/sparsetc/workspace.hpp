#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <vector>

#include "sparsetc/format.hpp"

namespace sparsetc {

/// Ordered scatter/gather accumulator keyed by coordinate tuples.
///
/// Backed by a red-black tree, so insertion is O(log n) and iteration visits
/// keys in strictly increasing lexicographic order.
class Workspace {
 public:
  using Key = std::vector<Index>;

  /// Adds `value` at `key`. Returns true when the key already held a value
  /// (that is, when an addition was performed).
  bool accumulate(std::span<const Index> key, double value) {
    auto it = map_.find(key);
    if (it != map_.end()) {
      it->second += value;
      return true;
    }
    map_.emplace(Key(key.begin(), key.end()), value);
    return false;
  }

  void clear() { map_.clear(); }
  std::size_t size() const { return map_.size(); }
  bool empty() const { return map_.empty(); }

  auto begin() const { return map_.begin(); }
  auto end() const { return map_.end(); }

 private:
  struct Less {
    using is_transparent = void;
    template <typename A, typename B>
    bool operator()(const A& a, const B& b) const {
      return std::lexicographical_compare(std::begin(a), std::end(a), std::begin(b), std::end(b));
    }
  };

  std::map<Key, double, Less> map_;
};

}  // namespace sparsetc
