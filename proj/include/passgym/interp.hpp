// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_INTERP_HPP
#define PASSGYM_INTERP_HPP

#include <map>
#include <span>

#include "passgym/graph.hpp"
#include "passgym/tensor.hpp"

namespace passgym::ir {

// Parameter node id -> bound value.
using Bindings = std::map<int64_t, Tensor>;

// Reference interpreter. Computes the root value of a valid graph in 64-bit
// arithmetic; this is the semantics oracle the pass tests compare against.
// Only nodes reachable from the root are evaluated. Missing or mis-shaped
// bindings raise DataError. Log of a non-positive input yields the IEEE
// result, not an error.
Tensor evaluate(const Graph& graph, const Bindings& bindings);

// Applies one operation to already-computed operand values. Shared between
// the interpreter and the constant-folding pass so both agree by
// construction. `out_shape` is the node's declared shape.
Tensor eval_node(OpKind kind, const NodeAttrs& attrs, const TensorShape& out_shape,
                 std::span<const Tensor> operands);

}  // namespace passgym::ir

#endif  // PASSGYM_INTERP_HPP
