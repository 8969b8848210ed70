#include "sparsetc/format.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "sparsetc/error.hpp"

namespace sparsetc {

std::string_view to_string(LevelKind kind) {
  switch (kind) {
    case LevelKind::Dense: return "dense";
    case LevelKind::Compressed: return "compressed";
    case LevelKind::Coordinate: return "coordinate";
  }
  return "?";
}

namespace {

std::vector<int> identity(std::size_t n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

}  // namespace

TensorFormat::TensorFormat(Shape shape, std::vector<int> mode_ordering,
                           std::vector<LevelKind> levels)
    : shape_(std::move(shape)),
      mode_ordering_(std::move(mode_ordering)),
      levels_(std::move(levels)) {
  const std::size_t n = shape_.size();
  if (mode_ordering_.size() != n || levels_.size() != n)
    throw ShapeError("format arity mismatch: shape, mode ordering and levels must have equal length");
  for (Index extent : shape_)
    if (extent <= 0) throw ShapeError("dimension extents must be positive");
  std::vector<int> sorted = mode_ordering_;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != identity(n)) throw DataError("mode ordering is not a permutation");
  bool in_coordinate_run = false;
  for (LevelKind kind : levels_) {
    if (kind == LevelKind::Coordinate) {
      in_coordinate_run = true;
    } else if (in_coordinate_run) {
      throw DataError("a coordinate level may only be followed by coordinate levels");
    }
  }
}

TensorFormat::TensorFormat(Shape shape, std::vector<LevelKind> levels)
    : TensorFormat(shape, identity(shape.size()), std::move(levels)) {}

TensorFormat TensorFormat::csr(Index rows, Index cols) {
  return {{rows, cols}, {0, 1}, {LevelKind::Dense, LevelKind::Compressed}};
}

TensorFormat TensorFormat::csc(Index rows, Index cols) {
  return {{rows, cols}, {1, 0}, {LevelKind::Dense, LevelKind::Compressed}};
}

TensorFormat TensorFormat::dcsr(Index rows, Index cols) {
  return {{rows, cols}, {0, 1}, {LevelKind::Compressed, LevelKind::Compressed}};
}

TensorFormat TensorFormat::coo(Shape shape) {
  std::vector<LevelKind> levels(shape.size(), LevelKind::Coordinate);
  return {std::move(shape), std::move(levels)};
}

TensorFormat TensorFormat::dense(Shape shape) {
  std::vector<LevelKind> levels(shape.size(), LevelKind::Dense);
  return {std::move(shape), std::move(levels)};
}

TensorFormat TensorFormat::named(std::string_view name, const Shape& shape) {
  if (name == "dense") return dense(shape);
  if (name == "coo") return coo(shape);
  if (name == "csr" || name == "csc" || name == "dcsr") {
    if (shape.size() != 2)
      throw ShapeError("format '" + std::string(name) + "' requires an order-2 tensor");
    if (name == "csr") return csr(shape[0], shape[1]);
    if (name == "csc") return csc(shape[0], shape[1]);
    return dcsr(shape[0], shape[1]);
  }
  throw DataError("unknown format name '" + std::string(name) + "'");
}

LevelKind TensorFormat::kind_of_dim(int dim) const { return levels_[level_of_dim(dim)]; }

int TensorFormat::level_of_dim(int dim) const {
  auto it = std::find(mode_ordering_.begin(), mode_ordering_.end(), dim);
  return static_cast<int>(it - mode_ordering_.begin());
}

bool TensorFormat::all_dense() const {
  return std::none_of(levels_.begin(), levels_.end(), is_sparse);
}

bool TensorFormat::has_sparse_levels() const { return !all_dense(); }

int TensorFormat::coordinate_start() const {
  auto it = std::find(levels_.begin(), levels_.end(), LevelKind::Coordinate);
  return static_cast<int>(it - levels_.begin());
}

TensorFormat TensorFormat::with_mode_ordering(std::vector<int> mode_ordering) const {
  return {shape_, std::move(mode_ordering), levels_};
}

std::string TensorFormat::name() const {
  const int n = order();
  const bool ident = mode_ordering_ == identity(n);
  if (all_dense() && ident) return "dense";
  if (ident && std::all_of(levels_.begin(), levels_.end(),
                           [](LevelKind k) { return k == LevelKind::Coordinate; }))
    return "coo";
  if (n == 2) {
    const bool dc = levels_[0] == LevelKind::Dense && levels_[1] == LevelKind::Compressed;
    const bool cc = levels_[0] == LevelKind::Compressed && levels_[1] == LevelKind::Compressed;
    if (dc && ident) return "csr";
    if (dc && !ident) return "csc";
    if (cc && ident) return "dcsr";
  }
  std::ostringstream os;
  os << '(';
  for (int l = 0; l < n; ++l) os << (l ? "," : "") << mode_ordering_[l];
  os << "):[";
  for (int l = 0; l < n; ++l) os << (l ? "," : "") << to_string(levels_[l]);
  os << ']';
  return os.str();
}

bool level_is_sparse(const TensorFormat& format, int dim) {
  return is_sparse(format.kind_of_dim(dim));
}

}  // namespace sparsetc
