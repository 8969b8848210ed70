#pragma once

#include <string_view>
#include <vector>

#include "sparsetc/expr.hpp"

namespace sparsetc {

/// Parses `Out(i,j) = A(i,k) * B(k,j) + C(i,j)`.
///
/// `*` binds tighter than `+`, both associate to the left, parentheses group.
/// Variables missing from the output are summed over the smallest subtree
/// that uses them.
TensorExpr parse(std::string_view src, const Bindings& bindings);

/// Parses the einsum form `ij,jk->ik`, binding operand k to `operands[k]`.
/// Without `->` the output holds the indices used exactly once, sorted.
TensorExpr parse_einsum(std::string_view spec, const std::vector<std::string>& operands,
                        const Bindings& bindings, std::string output_name = "Out");

/// True when `src` looks like an einsum string rather than an assignment.
bool is_einsum(std::string_view src);

}  // namespace sparsetc
