// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_COST_HPP
#define PASSGYM_COST_HPP

#include <array>
#include <cstdint>

#include "passgym/graph.hpp"

namespace passgym::ir {

// Deterministic structural cost features of a graph. op_count excludes
// Parameter nodes (interface, not work) but includes Constants.
struct CostAnalysis {
  int64_t op_count = 0;
  std::array<int64_t, kOpKindCount> per_kind{};
  int64_t flop_count = 0;
  int64_t transcendental_count = 0;
};

// FLOP rules:
//   Add/Subtract/Multiply/Divide/Negate/Maximum -> element_count of output
//   Exp/Log/Tanh -> element_count (also counted as transcendental)
//   Dot [m,k]x[k,n] -> 2*m*k*n
//   ReduceSum -> element_count of input
//   Transpose/Reshape/Broadcast/Constant/Parameter -> 0
CostAnalysis cost_analysis(const Graph& graph);

inline constexpr int kObservationSize = 1 + kOpKindCount;  // 17

// Fixed-layout feature vector: [op_count, per_kind[0..15]] in OpKind order,
// raw (unnormalized) counts.
std::array<double, kObservationSize> observation(const Graph& graph);

}  // namespace passgym::ir

#endif  // PASSGYM_COST_HPP
