// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_GRAPH_HPP
#define PASSGYM_GRAPH_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "passgym/tensor.hpp"

namespace passgym::ir {

// Operation kinds. The enumeration order is fixed: it defines the per-kind
// slot layout of the observation vector.
enum class OpKind : int {
  Parameter = 0,
  Constant,
  Add,
  Subtract,
  Multiply,
  Divide,
  Negate,
  Maximum,
  Exp,
  Log,
  Tanh,
  Dot,
  Transpose,
  Reshape,
  Broadcast,
  ReduceSum,
};

inline constexpr int kOpKindCount = 16;

std::string_view op_kind_name(OpKind kind);
std::optional<OpKind> op_kind_from_name(std::string_view name);

// Exp, Log, Tanh form the transcendental set.
bool is_transcendental(OpKind kind);

// Number of operands the kind requires.
int op_kind_arity(OpKind kind);

// Kind-specific payload. Only the fields relevant to the kind are populated:
//   Constant  -> literal (row-major, element_count values)
//   Transpose -> perm (permutation of the operand rank)
//   Reshape   -> dims (target dims, same element count)
//   Broadcast -> dims (output dims each operand dim maps to, strictly increasing)
//   ReduceSum -> reduce (operand dims summed away, strictly increasing)
struct NodeAttrs {
  std::vector<double> literal;
  std::vector<int64_t> perm;
  std::vector<int64_t> dims;
  std::vector<int64_t> reduce;

  bool operator==(const NodeAttrs&) const = default;
};

struct Node {
  int64_t id = -1;
  OpKind kind = OpKind::Parameter;
  std::vector<int64_t> operands;
  TensorShape shape;
  NodeAttrs attrs;
};

// A single-rooted DAG of tensor operations. Nodes are stored in topological
// order; operand ids always refer to earlier entries. Graphs produced by
// GraphBuilder, the parser, and the passes keep ids dense (id == position),
// but the type itself permits arbitrary unique ids so that validate() can
// report violations on hand-built graphs.
struct Graph {
  std::vector<Node> nodes;
  int64_t root = -1;
  std::string name;

  const Node* find(int64_t id) const;
};

// Computes the output shape of a node from its kind, operand shapes, and
// attrs. Returns nullopt and fills *error when the shape rule is violated.
std::optional<TensorShape> infer_shape(OpKind kind,
                                       std::span<const TensorShape> operand_shapes,
                                       const NodeAttrs& attrs, std::string* error);

// Returns one description per invariant violation (ordering, duplicate ids,
// arity, attrs, shape rules, root). Empty means the graph is valid.
std::vector<std::string> validate(const Graph& graph);

// Renumbers node ids to their topological positions and remaps operand and
// root references. Structure is otherwise unchanged.
Graph canonicalize(const Graph& graph);

// Structural equality up to id renumbering. Graph names are ignored.
bool structural_equal(const Graph& a, const Graph& b);

// Ids reachable from the root (including the root itself).
std::vector<bool> reachable_from_root(const Graph& graph);

// Incrementally builds a valid graph with dense ids. Every emit checks the
// kind's arity and shape rule and throws DataError on violation.
class GraphBuilder {
 public:
  int64_t parameter(TensorShape shape);
  int64_t constant(TensorShape shape, std::vector<double> literal);
  int64_t unary(OpKind kind, int64_t input);
  int64_t binary(OpKind kind, int64_t lhs, int64_t rhs);
  int64_t dot(int64_t lhs, int64_t rhs);
  int64_t transpose(int64_t input, std::vector<int64_t> perm);
  int64_t reshape(int64_t input, std::vector<int64_t> dims);
  // `mapped_dims[i]` is the target dim that operand dim i occupies.
  int64_t broadcast(int64_t input, std::vector<int64_t> target_dims,
                    std::vector<int64_t> mapped_dims);
  int64_t reduce_sum(int64_t input, std::vector<int64_t> reduce_dims);

  // Generic emission used by the pass machinery.
  int64_t emit(OpKind kind, std::vector<int64_t> operands, NodeAttrs attrs = {});
  // Emission with an explicit shape (Parameter/Constant only).
  int64_t emit_sourced(OpKind kind, TensorShape shape, NodeAttrs attrs = {});
  // Emission against a declared shape, checked for every kind. Used by the
  // parser and by passes that re-emit Broadcast nodes.
  int64_t emit_declared(OpKind kind, std::vector<int64_t> operands, TensorShape shape,
                        NodeAttrs attrs = {});

  const TensorShape& shape_of(int64_t id) const;
  const Node& node(int64_t id) const;
  int64_t size() const { return static_cast<int64_t>(nodes_.size()); }

  Graph build(int64_t root, std::string name = "");

 private:
  std::vector<Node> nodes_;
};

}  // namespace passgym::ir

#endif  // PASSGYM_GRAPH_HPP
