// SPDX-License-Identifier: Apache-2.0

#include "passgym/cost.hpp"

#include <unordered_map>

namespace passgym::ir {

CostAnalysis cost_analysis(const Graph& graph) {
  std::unordered_map<int64_t, const Node*> by_id;
  for (const Node& n : graph.nodes) by_id[n.id] = &n;

  CostAnalysis cost;
  for (const Node& node : graph.nodes) {
    cost.per_kind[static_cast<size_t>(node.kind)] += 1;
    const int64_t out_elems = node.shape.element_count();
    switch (node.kind) {
      case OpKind::Add:
      case OpKind::Subtract:
      case OpKind::Multiply:
      case OpKind::Divide:
      case OpKind::Negate:
      case OpKind::Maximum:
        cost.flop_count += out_elems;
        break;
      case OpKind::Exp:
      case OpKind::Log:
      case OpKind::Tanh:
        cost.flop_count += out_elems;
        cost.transcendental_count += out_elems;
        break;
      case OpKind::Dot: {
        const Node* lhs = by_id.at(node.operands[0]);
        const int64_t m = lhs->shape.dims[0];
        const int64_t k = lhs->shape.dims[1];
        const int64_t n = node.shape.dims[1];
        cost.flop_count += 2 * m * k * n;
        break;
      }
      case OpKind::ReduceSum: {
        const Node* in = by_id.at(node.operands[0]);
        cost.flop_count += in->shape.element_count();
        break;
      }
      case OpKind::Parameter:
      case OpKind::Constant:
      case OpKind::Transpose:
      case OpKind::Reshape:
      case OpKind::Broadcast:
        break;
    }
  }
  int64_t total = 0;
  for (int64_t c : cost.per_kind) total += c;
  cost.op_count = total - cost.per_kind[static_cast<size_t>(OpKind::Parameter)];
  return cost;
}

std::array<double, kObservationSize> observation(const Graph& graph) {
  CostAnalysis cost = cost_analysis(graph);
  std::array<double, kObservationSize> obs{};
  obs[0] = static_cast<double>(cost.op_count);
  for (int i = 0; i < kOpKindCount; ++i) {
    obs[static_cast<size_t>(i + 1)] = static_cast<double>(cost.per_kind[static_cast<size_t>(i)]);
  }
  return obs;
}

}  // namespace passgym::ir
