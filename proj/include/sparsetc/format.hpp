#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace sparsetc {

using Index = std::int64_t;
using Shape = std::vector<Index>;

/// Storage scheme of one tensor level.
enum class LevelKind { Dense, Compressed, Coordinate };

std::string_view to_string(LevelKind kind);

inline bool is_sparse(LevelKind kind) { return kind != LevelKind::Dense; }

/// Per-dimension storage descriptor plus mode ordering.
///
/// `mode_ordering[l]` is the logical dimension stored at level `l`, and
/// `levels[l]` is that level's storage kind. Coordinate levels must form a
/// suffix of the level list.
class TensorFormat {
 public:
  TensorFormat() = default;
  TensorFormat(Shape shape, std::vector<int> mode_ordering,
               std::vector<LevelKind> levels);
  /// Identity mode ordering.
  TensorFormat(Shape shape, std::vector<LevelKind> levels);

  static TensorFormat csr(Index rows, Index cols);
  static TensorFormat csc(Index rows, Index cols);
  static TensorFormat dcsr(Index rows, Index cols);
  static TensorFormat coo(Shape shape);
  static TensorFormat dense(Shape shape);

  /// Builds a named format ("csr", "csc", "dcsr", "coo", "dense") for the
  /// given shape. csr/csc/dcsr require order 2.
  static TensorFormat named(std::string_view name, const Shape& shape);

  const Shape& shape() const { return shape_; }
  const std::vector<int>& mode_ordering() const { return mode_ordering_; }
  const std::vector<LevelKind>& levels() const { return levels_; }
  int order() const { return static_cast<int>(shape_.size()); }

  /// Storage kind of logical dimension `dim`.
  LevelKind kind_of_dim(int dim) const;
  /// Level at which logical dimension `dim` is stored.
  int level_of_dim(int dim) const;
  Index level_extent(int level) const { return shape_[mode_ordering_[level]]; }

  bool all_dense() const;
  bool has_sparse_levels() const;
  /// First coordinate level, or order() when there is none.
  int coordinate_start() const;

  /// Same level kinds (by level position), new mode ordering.
  TensorFormat with_mode_ordering(std::vector<int> mode_ordering) const;

  /// "csr", "csc", "dcsr", "coo", "dense" when the format matches one of the
  /// aliases, otherwise a descriptor such as "(1,0):[dense,compressed]".
  std::string name() const;

  friend bool operator==(const TensorFormat&, const TensorFormat&) = default;

 private:
  Shape shape_;
  std::vector<int> mode_ordering_;
  std::vector<LevelKind> levels_;
};

bool level_is_sparse(const TensorFormat& format, int dim);

}  // namespace sparsetc
