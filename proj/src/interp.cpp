// SPDX-License-Identifier: Apache-2.0

#include "passgym/interp.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "passgym/error.hpp"

namespace passgym::ir {

namespace {

Tensor elementwise2(const Tensor& a, const Tensor& b, double (*f)(double, double)) {
  Tensor out = Tensor::zeros(a.shape);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = f(a.data[i], b.data[i]);
  return out;
}

Tensor elementwise1(const Tensor& a, double (*f)(double)) {
  Tensor out = Tensor::zeros(a.shape);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = f(a.data[i]);
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  int64_t m = a.shape.dims[0], k = a.shape.dims[1], n = b.shape.dims[1];
  Tensor out = Tensor::zeros(make_shape({m, n}));
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int64_t t = 0; t < k; ++t) {
        acc += a.data[static_cast<size_t>(i * k + t)] * b.data[static_cast<size_t>(t * n + j)];
      }
      out.data[static_cast<size_t>(i * n + j)] = acc;
    }
  }
  return out;
}

// Iterates the row-major index space of `dims`, calling f(flat, multi_index).
template <typename F>
void for_each_index(const std::vector<int64_t>& dims, F&& f) {
  std::vector<int64_t> idx(dims.size(), 0);
  int64_t total = 1;
  for (int64_t d : dims) total *= d;
  for (int64_t flat = 0; flat < total; ++flat) {
    f(flat, idx);
    for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
      if (++idx[static_cast<size_t>(i)] < dims[static_cast<size_t>(i)]) break;
      idx[static_cast<size_t>(i)] = 0;
    }
  }
}

}  // namespace

Tensor eval_node(OpKind kind, const NodeAttrs& attrs, const TensorShape& out_shape,
                 std::span<const Tensor> operands) {
  switch (kind) {
    case OpKind::Parameter:
      throw DataError("eval_node: parameter has no semantics without a binding");
    case OpKind::Constant:
      return Tensor{out_shape, attrs.literal};

    case OpKind::Add:
      return elementwise2(operands[0], operands[1], [](double x, double y) { return x + y; });
    case OpKind::Subtract:
      return elementwise2(operands[0], operands[1], [](double x, double y) { return x - y; });
    case OpKind::Multiply:
      return elementwise2(operands[0], operands[1], [](double x, double y) { return x * y; });
    case OpKind::Divide:
      return elementwise2(operands[0], operands[1], [](double x, double y) { return x / y; });
    case OpKind::Maximum:
      return elementwise2(operands[0], operands[1],
                          [](double x, double y) { return std::fmax(x, y); });

    case OpKind::Negate:
      return elementwise1(operands[0], [](double x) { return -x; });
    case OpKind::Exp:
      return elementwise1(operands[0], [](double x) { return std::exp(x); });
    case OpKind::Log:
      return elementwise1(operands[0], [](double x) { return std::log(x); });
    case OpKind::Tanh:
      return elementwise1(operands[0], [](double x) { return std::tanh(x); });

    case OpKind::Dot:
      return matmul(operands[0], operands[1]);

    case OpKind::Transpose: {
      const Tensor& in = operands[0];
      Tensor out = Tensor::zeros(out_shape);
      auto in_strides = row_major_strides(in.shape.dims);
      // out[i...] = in[j...] with j[perm[d]] = i[d]
      for_each_index(out_shape.dims, [&](int64_t flat, const std::vector<int64_t>& idx) {
        int64_t src = 0;
        for (size_t d = 0; d < idx.size(); ++d) {
          src += idx[d] * in_strides[static_cast<size_t>(attrs.perm[d])];
        }
        out.data[static_cast<size_t>(flat)] = in.data[static_cast<size_t>(src)];
      });
      return out;
    }

    case OpKind::Reshape:
      // Row-major reinterpretation: data is unchanged.
      return Tensor{out_shape, operands[0].data};

    case OpKind::Broadcast: {
      const Tensor& in = operands[0];
      Tensor out = Tensor::zeros(out_shape);
      auto in_strides = row_major_strides(in.shape.dims);
      for_each_index(out_shape.dims, [&](int64_t flat, const std::vector<int64_t>& idx) {
        int64_t src = 0;
        for (size_t d = 0; d < attrs.dims.size(); ++d) {
          src += idx[static_cast<size_t>(attrs.dims[d])] * in_strides[d];
        }
        out.data[static_cast<size_t>(flat)] = in.data[static_cast<size_t>(src)];
      });
      return out;
    }

    case OpKind::ReduceSum: {
      const Tensor& in = operands[0];
      Tensor out = Tensor::zeros(out_shape);
      auto out_strides = row_major_strides(out_shape.dims);
      std::vector<bool> reduced(in.shape.dims.size(), false);
      for (int64_t d : attrs.reduce) reduced[static_cast<size_t>(d)] = true;
      for_each_index(in.shape.dims, [&](int64_t flat, const std::vector<int64_t>& idx) {
        int64_t dst = 0;
        size_t out_d = 0;
        for (size_t d = 0; d < idx.size(); ++d) {
          if (!reduced[d]) dst += idx[d] * out_strides[out_d++];
        }
        out.data[static_cast<size_t>(dst)] += in.data[static_cast<size_t>(flat)];
      });
      return out;
    }
  }
  throw DataError("eval_node: unknown kind");
}

Tensor evaluate(const Graph& graph, const Bindings& bindings) {
  std::unordered_map<int64_t, size_t> index;
  for (size_t i = 0; i < graph.nodes.size(); ++i) index[graph.nodes[i].id] = i;

  std::vector<bool> live = reachable_from_root(graph);
  std::vector<Tensor> values(graph.nodes.size());

  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    if (!live[i]) continue;
    const Node& node = graph.nodes[i];
    if (node.kind == OpKind::Parameter) {
      auto it = bindings.find(node.id);
      if (it == bindings.end()) {
        throw DataError("evaluate: missing binding for parameter %" + std::to_string(node.id));
      }
      if (it->second.shape != node.shape) {
        throw DataError("evaluate: binding shape mismatch for parameter %" +
                        std::to_string(node.id));
      }
      values[i] = it->second;
      continue;
    }
    std::vector<Tensor> args;
    args.reserve(node.operands.size());
    for (int64_t op : node.operands) args.push_back(values[index.at(op)]);
    values[i] = eval_node(node.kind, node.attrs, node.shape, args);
  }
  return values[index.at(graph.root)];
}

}  // namespace passgym::ir
