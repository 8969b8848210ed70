#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sparsetc/format.hpp"

namespace sparsetc {

/// Row-major dense multi-array of doubles.
class DenseArray {
 public:
  DenseArray() = default;
  explicit DenseArray(Shape shape);
  DenseArray(Shape shape, std::vector<double> data);

  const Shape& shape() const { return shape_; }
  int order() const { return static_cast<int>(shape_.size()); }
  Index size() const { return static_cast<Index>(data_.size()); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Index offset(std::span<const Index> coords) const;
  double& operator()(std::span<const Index> coords) { return data_[offset(coords)]; }
  double operator()(std::span<const Index> coords) const { return data_[offset(coords)]; }
  double& at(std::initializer_list<Index> coords) { return data_[offset({coords.begin(), coords.size()})]; }
  double at(std::initializer_list<Index> coords) const { return data_[offset({coords.begin(), coords.size()})]; }

  friend bool operator==(const DenseArray&, const DenseArray&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// One (coordinate, value) pair in logical dimension order.
struct Entry {
  std::vector<Index> coords;
  double value = 0.0;
};

/// Index arrays of one level. Dense levels keep both empty. Compressed
/// levels use `pos` (one segment per parent position) and `crd`. The first
/// level of a coordinate run uses `pos` and `crd`; later coordinate levels
/// use `crd` only, aligned entry-for-entry with the first one.
struct LevelStorage {
  std::vector<Index> pos;
  std::vector<Index> crd;

  friend bool operator==(const LevelStorage&, const LevelStorage&) = default;
};

/// Physical storage: format descriptor, per-level index arrays and values.
class TensorStorage {
 public:
  TensorStorage(TensorFormat format, std::vector<LevelStorage> levels,
                std::vector<double> values);

  const TensorFormat& format() const { return format_; }
  const LevelStorage& level(int l) const { return levels_[l]; }
  const std::vector<LevelStorage>& levels() const { return levels_; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const TensorStorage&, const TensorStorage&) = default;

 private:
  TensorFormat format_;
  std::vector<LevelStorage> levels_;
  std::vector<double> values_;
};

/// Immutable logical tensor. Copies share storage.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::string name, std::shared_ptr<const TensorStorage> storage);

  const std::string& name() const { return name_; }
  const Shape& shape() const { return storage_->format().shape(); }
  int order() const { return storage_->format().order(); }
  const TensorFormat& format() const { return storage_->format(); }
  const TensorStorage& storage() const { return *storage_; }
  bool valid() const { return storage_ != nullptr; }

  /// Same storage under a different name.
  Tensor renamed(std::string name) const { return Tensor(std::move(name), storage_); }

 private:
  std::string name_;
  std::shared_ptr<const TensorStorage> storage_;
};

/// Assembles a tensor in `format`. Duplicate coordinates are summed and
/// explicit zeros are kept.
Tensor build_from_entries(std::string name, const TensorFormat& format,
                          std::span<const Entry> entries);

/// Builds a tensor from a dense array, storing only its nonzeros (all slots
/// for dense levels).
Tensor from_dense(std::string name, const DenseArray& dense,
                  const TensorFormat& format);

/// Builds a tensor from entries already sorted by mode-ordered coordinates
/// and duplicate-free. `level_coords` holds one row of `order` level
/// coordinates per entry. Throws std::logic_error if the order is violated.
Tensor build_from_sorted(std::string name, const TensorFormat& format,
                         std::span<const Index> level_coords,
                         std::span<const double> values);

Tensor convert(const Tensor& t, const TensorFormat& target);
Tensor transpose(const Tensor& t, std::vector<int> mode_ordering);

DenseArray to_dense(const Tensor& t);

/// Stored entries in logical coordinates, sorted lexicographically by logical
/// coordinate. Values stored only as padding of a dense leaf level are
/// skipped when they are zero.
std::vector<Entry> stored_entries(const Tensor& t);

Index nnz(const Tensor& t);

}  // namespace sparsetc
