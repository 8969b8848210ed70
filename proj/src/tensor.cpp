#include "sparsetc/tensor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "sparsetc/error.hpp"

namespace sparsetc {

// ---------------------------------------------------------------------------
// DenseArray

DenseArray::DenseArray(Shape shape) : shape_(std::move(shape)) {
  Index n = 1;
  for (Index e : shape_) n *= e;
  data_.assign(static_cast<std::size_t>(n), 0.0);
}

DenseArray::DenseArray(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  Index n = 1;
  for (Index e : shape_) n *= e;
  if (static_cast<Index>(data_.size()) != n)
    throw ShapeError("dense array data length does not match its shape");
}

Index DenseArray::offset(std::span<const Index> coords) const {
  Index off = 0;
  for (std::size_t d = 0; d < shape_.size(); ++d) off = off * shape_[d] + coords[d];
  return off;
}

// ---------------------------------------------------------------------------
// Storage

TensorStorage::TensorStorage(TensorFormat format, std::vector<LevelStorage> levels,
                             std::vector<double> values)
    : format_(std::move(format)), levels_(std::move(levels)), values_(std::move(values)) {}

Tensor::Tensor(std::string name, std::shared_ptr<const TensorStorage> storage)
    : name_(std::move(name)), storage_(std::move(storage)) {}

namespace {

struct Range {
  Index lo;
  Index hi;
};

// Packs entries sorted by level coordinates (row-major, `order` columns).
std::shared_ptr<const TensorStorage> pack(const TensorFormat& format,
                                          std::span<const Index> crd,
                                          std::span<const double> vals) {
  const int order = format.order();
  const Index count = static_cast<Index>(vals.size());
  auto at = [&](Index e, int l) { return crd[e * order + l]; };

  std::vector<LevelStorage> levels(order);
  std::vector<Range> parents{{0, count}};
  std::vector<Range> children;

  for (int l = 0; l < order; ++l) {
    const LevelKind kind = format.levels()[l];
    LevelStorage& ls = levels[l];
    if (kind == LevelKind::Coordinate) {
      ls.pos.reserve(parents.size() + 1);
      for (const Range& p : parents) ls.pos.push_back(p.lo);
      ls.pos.push_back(count);
      for (int c = l; c < order; ++c) {
        levels[c].crd.resize(count);
        for (Index e = 0; e < count; ++e) levels[c].crd[e] = at(e, c);
      }
      return std::make_shared<const TensorStorage>(
          format, std::move(levels), std::vector<double>(vals.begin(), vals.end()));
    }
    children.clear();
    if (kind == LevelKind::Dense) {
      const Index n = format.level_extent(l);
      children.reserve(parents.size() * n);
      for (const Range& p : parents) {
        Index e = p.lo;
        for (Index c = 0; c < n; ++c) {
          const Index start = e;
          while (e < p.hi && at(e, l) == c) ++e;
          children.push_back({start, e});
        }
      }
    } else {
      ls.pos.reserve(parents.size() + 1);
      ls.pos.push_back(0);
      for (const Range& p : parents) {
        Index e = p.lo;
        while (e < p.hi) {
          const Index c = at(e, l);
          const Index start = e;
          while (e < p.hi && at(e, l) == c) ++e;
          ls.crd.push_back(c);
          children.push_back({start, e});
        }
        ls.pos.push_back(static_cast<Index>(ls.crd.size()));
      }
    }
    std::swap(parents, children);
  }

  std::vector<double> values(parents.size(), 0.0);
  for (std::size_t p = 0; p < parents.size(); ++p)
    if (parents[p].hi > parents[p].lo) values[p] = vals[parents[p].lo];
  return std::make_shared<const TensorStorage>(format, std::move(levels), std::move(values));
}

bool lex_less(std::span<const Index> a, std::span<const Index> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Visits stored values in storage order with their level coordinates.
template <typename Fn>
void walk(const TensorStorage& s, int l, Index p, std::vector<Index>& coords, Fn&& fn) {
  const TensorFormat& f = s.format();
  const int order = f.order();
  if (l == order) {
    fn(std::span<const Index>(coords), s.values()[p]);
    return;
  }
  const LevelStorage& ls = s.level(l);
  switch (f.levels()[l]) {
    case LevelKind::Dense: {
      const Index n = f.level_extent(l);
      for (Index c = 0; c < n; ++c) {
        coords[l] = c;
        walk(s, l + 1, p * n + c, coords, fn);
      }
      break;
    }
    case LevelKind::Compressed:
      for (Index q = ls.pos[p]; q < ls.pos[p + 1]; ++q) {
        coords[l] = ls.crd[q];
        walk(s, l + 1, q, coords, fn);
      }
      break;
    case LevelKind::Coordinate:
      for (Index q = ls.pos[p]; q < ls.pos[p + 1]; ++q) {
        for (int c = l; c < order; ++c) coords[c] = s.level(c).crd[q];
        fn(std::span<const Index>(coords), s.values()[q]);
      }
      break;
  }
}

template <typename Fn>
void for_each_stored(const TensorStorage& s, Fn&& fn) {
  std::vector<Index> coords(s.format().order());
  walk(s, 0, 0, coords, fn);
}

}  // namespace

Tensor build_from_sorted(std::string name, const TensorFormat& format,
                         std::span<const Index> level_coords,
                         std::span<const double> values) {
  const std::size_t order = format.order();
  if (level_coords.size() != values.size() * order)
    throw ShapeError("coordinate array does not match value count");
  for (std::size_t e = 1; e < values.size(); ++e) {
    auto prev = level_coords.subspan((e - 1) * order, order);
    auto cur = level_coords.subspan(e * order, order);
    if (!lex_less(prev, cur))
      throw std::logic_error("build_from_sorted: entries are not strictly increasing");
  }
  return Tensor(std::move(name), pack(format, level_coords, values));
}

Tensor build_from_entries(std::string name, const TensorFormat& format,
                          std::span<const Entry> entries) {
  const int order = format.order();
  const auto& perm = format.mode_ordering();
  const Index count = static_cast<Index>(entries.size());

  std::vector<Index> crd(static_cast<std::size_t>(count) * order);
  for (Index e = 0; e < count; ++e) {
    const Entry& entry = entries[e];
    if (static_cast<int>(entry.coords.size()) != order)
      throw ShapeError("entry arity does not match tensor order");
    for (int l = 0; l < order; ++l) {
      const Index c = entry.coords[perm[l]];
      if (c < 0 || c >= format.shape()[perm[l]])
        throw DataError("coordinate out of bounds");
      crd[e * order + l] = c;
    }
  }

  std::vector<Index> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  auto row = [&](Index e) { return std::span<const Index>(crd).subspan(e * order, order); };
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return lex_less(row(a), row(b)); });

  std::vector<Index> sorted_crd;
  std::vector<double> sorted_vals;
  sorted_crd.reserve(crd.size());
  sorted_vals.reserve(count);
  for (Index k = 0; k < count; ++k) {
    const Index e = idx[k];
    if (k > 0 && std::ranges::equal(row(e), row(idx[k - 1]))) {
      sorted_vals.back() += entries[e].value;
      continue;
    }
    auto r = row(e);
    sorted_crd.insert(sorted_crd.end(), r.begin(), r.end());
    sorted_vals.push_back(entries[e].value);
  }
  return Tensor(std::move(name), pack(format, sorted_crd, sorted_vals));
}

Tensor from_dense(std::string name, const DenseArray& dense, const TensorFormat& format) {
  if (dense.shape() != format.shape()) throw ShapeError("dense array shape does not match format");
  bool identity = true;
  for (int d = 0; d < format.order(); ++d) identity = identity && format.mode_ordering()[d] == d;
  if (format.all_dense() && identity) {
    auto storage = std::make_shared<const TensorStorage>(
        format, std::vector<LevelStorage>(format.order()),
        std::vector<double>(dense.data().begin(), dense.data().end()));
    return Tensor(std::move(name), std::move(storage));
  }
  std::vector<Entry> entries;
  const int order = dense.order();
  std::vector<Index> coords(order, 0);
  for (Index k = 0; k < dense.size(); ++k) {
    Index rem = k;
    for (int d = order - 1; d >= 0; --d) {
      coords[d] = rem % dense.shape()[d];
      rem /= dense.shape()[d];
    }
    const double v = dense.data()[k];
    if (v != 0.0) entries.push_back({coords, v});
  }
  return build_from_entries(std::move(name), format, entries);
}

std::vector<Entry> stored_entries(const Tensor& t) {
  const TensorFormat& f = t.format();
  const int order = f.order();
  const bool leaf_dense = order > 0 && f.levels().back() == LevelKind::Dense;
  std::vector<Entry> out;
  for_each_stored(t.storage(), [&](std::span<const Index> lc, double v) {
    if (leaf_dense && v == 0.0) return;
    Entry e{std::vector<Index>(order), v};
    for (int l = 0; l < order; ++l) e.coords[f.mode_ordering()[l]] = lc[l];
    out.push_back(std::move(e));
  });
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    return lex_less(a.coords, b.coords);
  });
  return out;
}

Tensor convert(const Tensor& t, const TensorFormat& target) {
  if (target.shape() != t.shape()) throw ShapeError("convert: shape mismatch");
  if (target == t.format()) return t;
  return build_from_entries(t.name(), target, stored_entries(t));
}

Tensor transpose(const Tensor& t, std::vector<int> mode_ordering) {
  return convert(t, t.format().with_mode_ordering(std::move(mode_ordering)));
}

DenseArray to_dense(const Tensor& t) {
  const TensorFormat& f = t.format();
  DenseArray out(f.shape());
  std::vector<Index> logical(f.order());
  for_each_stored(t.storage(), [&](std::span<const Index> lc, double v) {
    for (int l = 0; l < f.order(); ++l) logical[f.mode_ordering()[l]] = lc[l];
    out(logical) = v;
  });
  return out;
}

Index nnz(const Tensor& t) { return static_cast<Index>(t.storage().values().size()); }

}  // namespace sparsetc
