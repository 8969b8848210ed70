#pragma once

#include <iosfwd>
#include <string>

#include "sparsetc/tensor.hpp"

namespace sparsetc {

/// Matrix Market coordinate exchange format for order-2 tensors.
///
/// The reader accepts `real`, `integer` and `pattern` fields with `general`,
/// `symmetric` or `skew-symmetric` symmetry; symmetric inputs are expanded to
/// general. Indices are 1-based on disk. Malformed input raises DataError.
Tensor read_matrix_market(std::istream& in, const std::string& name,
                          std::string_view format_name = "csr");
Tensor read_matrix_market_file(const std::string& path, const std::string& name,
                               std::string_view format_name = "csr");

/// Writes `coordinate real general` with entries in row-major order and
/// values printed with round-trip precision.
void write_matrix_market(std::ostream& out, const Tensor& t);
void write_matrix_market_file(const std::string& path, const Tensor& t);

}  // namespace sparsetc
