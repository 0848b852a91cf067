// SPDX-License-Identifier: Apache-2.0

#include "passgym/passes.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>
#include <unordered_map>

#include "passgym/error.hpp"
#include "passgym/interp.hpp"

namespace passgym::passes {

using ir::Graph;
using ir::GraphBuilder;
using ir::Node;
using ir::NodeAttrs;
using ir::OpKind;
using ir::Tensor;

namespace {

constexpr int kMaxFixedPointIters = 100;

// A node rule sees the input node with operands already remapped into the
// output builder and returns the output id the node maps to. It may emit new
// nodes through the builder (the last emitted id is the mapping target).
// Returning nullopt emits the node unchanged.
using NodeRule = std::function<std::optional<int64_t>(const Node&, GraphBuilder&)>;

// One left-to-right rebuild. Nodes a rule maps away are not emitted; their
// operands may become dead, which is left for dce.
Graph rewrite_once(const Graph& graph, const NodeRule& rule) {
  GraphBuilder builder;
  std::unordered_map<int64_t, int64_t> remap;
  for (const Node& node : graph.nodes) {
    Node n = node;
    for (int64_t& op : n.operands) op = remap.at(op);
    std::optional<int64_t> mapped = rule(n, builder);
    if (!mapped) {
      mapped = builder.emit_declared(n.kind, n.operands, n.shape, n.attrs);
    }
    remap[node.id] = *mapped;
  }
  return builder.build(remap.at(graph.root), graph.name);
}

Graph apply_rule_to_fixed_point(const Graph& graph, const NodeRule& rule) {
  Graph current = graph;
  for (int iter = 0; iter < kMaxFixedPointIters; ++iter) {
    Graph next = rewrite_once(current, rule);
    if (ir::structural_equal(next, current)) return next;
    current = std::move(next);
  }
  return current;
}

bool is_constant_filled(const GraphBuilder& b, int64_t id, double value) {
  const Node& n = b.node(id);
  if (n.kind != OpKind::Constant) return false;
  return std::all_of(n.attrs.literal.begin(), n.attrs.literal.end(),
                     [&](double v) { return v == value; });
}

// --- pass rules ---------------------------------------------------------

std::optional<int64_t> fold_constants_rule(const Node& n, GraphBuilder& b) {
  if (n.kind == OpKind::Parameter || n.kind == OpKind::Constant) return std::nullopt;
  std::vector<Tensor> args;
  args.reserve(n.operands.size());
  for (int64_t op : n.operands) {
    const Node& src = b.node(op);
    if (src.kind != OpKind::Constant) return std::nullopt;
    args.push_back(Tensor{src.shape, src.attrs.literal});
  }
  Tensor value = ir::eval_node(n.kind, n.attrs, n.shape, args);
  return b.constant(n.shape, std::move(value.data));
}

std::optional<int64_t> identity_elim_rule(const Node& n, GraphBuilder& b) {
  if (n.operands.size() != 2) return std::nullopt;
  const int64_t x = n.operands[0];
  const int64_t c = n.operands[1];
  switch (n.kind) {
    case OpKind::Add:
    case OpKind::Subtract:
      if (is_constant_filled(b, c, 0.0)) return x;
      return std::nullopt;
    case OpKind::Multiply:
    case OpKind::Divide:
      if (is_constant_filled(b, c, 1.0)) return x;
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

std::optional<int64_t> zero_elim_rule(const Node& n, GraphBuilder& b) {
  if (n.kind == OpKind::Multiply && is_constant_filled(b, n.operands[1], 0.0)) {
    return b.constant(n.shape, std::vector<double>(
                                   static_cast<size_t>(n.shape.element_count()), 0.0));
  }
  return std::nullopt;
}

std::optional<int64_t> neg_neg_rule(const Node& n, GraphBuilder& b) {
  if (n.kind == OpKind::Negate) {
    const Node& inner = b.node(n.operands[0]);
    if (inner.kind == OpKind::Negate) return inner.operands[0];
  }
  return std::nullopt;
}

std::optional<int64_t> exp_log_rule(const Node& n, GraphBuilder& b) {
  if (n.kind == OpKind::Exp) {
    const Node& inner = b.node(n.operands[0]);
    if (inner.kind == OpKind::Log) return inner.operands[0];
  }
  if (n.kind == OpKind::Log) {
    const Node& inner = b.node(n.operands[0]);
    if (inner.kind == OpKind::Exp) return inner.operands[0];
  }
  return std::nullopt;
}

std::optional<int64_t> transpose_folding_rule(const Node& n, GraphBuilder& b) {
  if (n.kind != OpKind::Transpose) return std::nullopt;
  const Node& inner = b.node(n.operands[0]);
  if (inner.kind != OpKind::Transpose) return std::nullopt;
  // out[i] = mid[p2[i]] = x[p1[p2[i]]]
  const auto& p1 = inner.attrs.perm;
  const auto& p2 = n.attrs.perm;
  std::vector<int64_t> composed(p2.size());
  bool identity = true;
  for (size_t i = 0; i < p2.size(); ++i) {
    composed[i] = p1[static_cast<size_t>(p2[i])];
    if (composed[i] != static_cast<int64_t>(i)) identity = false;
  }
  if (identity) return inner.operands[0];
  return b.transpose(inner.operands[0], std::move(composed));
}

std::optional<int64_t> reshape_folding_rule(const Node& n, GraphBuilder& b) {
  if (n.kind != OpKind::Reshape) return std::nullopt;
  const Node& inner = b.node(n.operands[0]);
  if (inner.kind == OpKind::Reshape) {
    int64_t source = inner.operands[0];
    if (n.shape == b.node(source).shape) return source;
    return b.reshape(source, n.attrs.dims);
  }
  if (n.shape == inner.shape) return n.operands[0];
  return std::nullopt;
}

std::optional<int64_t> broadcast_folding_rule(const Node& n, GraphBuilder& b) {
  if (n.kind != OpKind::Broadcast) return std::nullopt;
  const Node& inner = b.node(n.operands[0]);
  if (n.shape == inner.shape) return n.operands[0];
  if (inner.kind != OpKind::Broadcast) return std::nullopt;
  int64_t source = inner.operands[0];
  if (n.shape == b.node(source).shape) return source;
  // dim i of the source sits at inner.dims[i] of the middle, which sits at
  // n.dims[inner.dims[i]] of the output.
  std::vector<int64_t> composed(inner.attrs.dims.size());
  for (size_t i = 0; i < composed.size(); ++i) {
    composed[i] = n.attrs.dims[static_cast<size_t>(inner.attrs.dims[i])];
  }
  return b.broadcast(source, n.shape.dims, std::move(composed));
}

std::optional<int64_t> algebraic_simplify_rule(const Node& n, GraphBuilder& b) {
  if (n.operands.size() != 2 || n.operands[0] != n.operands[1]) return std::nullopt;
  const size_t elems = static_cast<size_t>(n.shape.element_count());
  switch (n.kind) {
    case OpKind::Subtract:
      return b.constant(n.shape, std::vector<double>(elems, 0.0));
    case OpKind::Divide:
      return b.constant(n.shape, std::vector<double>(elems, 1.0));
    case OpKind::Maximum:
      return n.operands[0];
    default:
      return std::nullopt;
  }
}

std::optional<int64_t> strength_reduce_div_rule(const Node& n, GraphBuilder& b) {
  if (n.kind != OpKind::Divide) return std::nullopt;
  const Node& divisor = b.node(n.operands[1]);
  if (divisor.kind != OpKind::Constant) return std::nullopt;
  std::vector<double> recip(divisor.attrs.literal.size());
  for (size_t i = 0; i < recip.size(); ++i) {
    if (divisor.attrs.literal[i] == 0.0) return std::nullopt;
    recip[i] = 1.0 / divisor.attrs.literal[i];
  }
  int64_t recip_id = b.constant(divisor.shape, std::move(recip));
  return b.binary(OpKind::Multiply, n.operands[0], recip_id);
}

// cse needs per-rebuild state (the seen-key map), so it is not a plain
// stateless NodeRule.
Graph cse_once(const Graph& graph) {
  auto key_of = [](const Node& n) {
    std::ostringstream os;
    os << static_cast<int>(n.kind);
    for (int64_t op : n.operands) os << ',' << op;
    os << '|';
    for (int64_t d : n.shape.dims) os << d << ',';
    os << '|';
    for (double v : n.attrs.literal) {
      uint64_t bits;
      std::memcpy(&bits, &v, sizeof(bits));
      os << bits << ',';
    }
    os << '|';
    for (int64_t v : n.attrs.perm) os << v << ',';
    os << '|';
    for (int64_t v : n.attrs.dims) os << v << ',';
    os << '|';
    for (int64_t v : n.attrs.reduce) os << v << ',';
    return os.str();
  };
  std::unordered_map<std::string, int64_t> seen;
  NodeRule rule = [&](const Node& n, GraphBuilder& b) -> std::optional<int64_t> {
    // Parameters are distinct inputs even when shapes coincide.
    if (n.kind == OpKind::Parameter) return std::nullopt;
    std::string key = key_of(n);
    auto it = seen.find(key);
    if (it != seen.end()) return it->second;
    int64_t id = b.emit_declared(n.kind, n.operands, n.shape, n.attrs);
    seen.emplace(std::move(key), id);
    return id;
  };
  return rewrite_once(graph, rule);
}

Graph cse_pass(const Graph& graph) {
  Graph current = graph;
  for (int iter = 0; iter < kMaxFixedPointIters; ++iter) {
    Graph next = cse_once(current);
    if (ir::structural_equal(next, current)) return next;
    current = std::move(next);
  }
  return current;
}

Graph dce_pass(const Graph& graph) {
  std::vector<bool> live = ir::reachable_from_root(graph);
  GraphBuilder builder;
  std::unordered_map<int64_t, int64_t> remap;
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    if (!live[i]) continue;
    Node n = graph.nodes[i];
    for (int64_t& op : n.operands) op = remap.at(op);
    remap[graph.nodes[i].id] = builder.emit_declared(n.kind, n.operands, n.shape, n.attrs);
  }
  return builder.build(remap.at(graph.root), graph.name);
}

Graph rule_pass(const Graph& graph, std::optional<int64_t> (*rule)(const Node&, GraphBuilder&)) {
  return apply_rule_to_fixed_point(graph, rule);
}

}  // namespace

const Catalog& Catalog::standard() {
  static const Catalog catalog = [] {
    Catalog c;
    auto add = [&](std::string name, std::string desc, std::function<Graph(const Graph&)> run) {
      PassId id = static_cast<PassId>(c.entries_.size());
      c.entries_.push_back(Entry{PassInfo{id, std::move(name), std::move(desc)}, std::move(run)});
    };
    add("constant-folding", "evaluate ops whose operands are all constants",
        [](const Graph& g) { return rule_pass(g, fold_constants_rule); });
    add("dce", "remove nodes unreachable from the root", dce_pass);
    add("cse", "merge structurally identical nodes, keeping the earliest", cse_pass);
    add("identity-elim", "drop add/subtract of 0 and multiply/divide by 1",
        [](const Graph& g) { return rule_pass(g, identity_elim_rule); });
    add("zero-elim", "multiply by an all-zero constant becomes that constant",
        [](const Graph& g) { return rule_pass(g, zero_elim_rule); });
    add("neg-neg-elim", "negate of negate cancels",
        [](const Graph& g) { return rule_pass(g, neg_neg_rule); });
    add("exp-log-elim", "exp(log(x)) and log(exp(x)) collapse to x",
        [](const Graph& g) { return rule_pass(g, exp_log_rule); });
    add("transpose-folding", "compose nested transposes, cancel inverse pairs",
        [](const Graph& g) { return rule_pass(g, transpose_folding_rule); });
    add("reshape-folding", "compose nested reshapes, drop no-op reshapes",
        [](const Graph& g) { return rule_pass(g, reshape_folding_rule); });
    add("broadcast-folding", "compose nested broadcasts, drop no-op broadcasts",
        [](const Graph& g) { return rule_pass(g, broadcast_folding_rule); });
    add("algebraic-simplify", "x-x -> 0, x/x -> 1, max(x,x) -> x",
        [](const Graph& g) { return rule_pass(g, algebraic_simplify_rule); });
    add("strength-reduce-div", "divide by a nonzero constant becomes multiply",
        [](const Graph& g) { return rule_pass(g, strength_reduce_div_rule); });

    auto id_of = [&](std::string_view name) {
      for (const Entry& e : c.entries_) {
        if (e.info.name == name) return e.info.id;
      }
      throw ConfigError("unknown pass in default pipeline");
    };
    c.default_pipeline_ = {
        id_of("constant-folding"), id_of("identity-elim"),     id_of("zero-elim"),
        id_of("neg-neg-elim"),     id_of("exp-log-elim"),      id_of("transpose-folding"),
        id_of("reshape-folding"),  id_of("broadcast-folding"), id_of("algebraic-simplify"),
        id_of("strength-reduce-div"), id_of("cse"),            id_of("dce"),
    };
    c.default_pipeline_rounds_ = 3;
    return c;
  }();
  return catalog;
}

const PassInfo& Catalog::info(PassId id) const {
  if (id < 0 || id >= size()) throw ConfigError("unknown pass id " + std::to_string(id));
  return entries_[static_cast<size_t>(id)].info;
}

PassId Catalog::find(std::string_view name) const {
  for (const Entry& e : entries_) {
    if (e.info.name == name) return e.info.id;
  }
  return -1;
}

std::pair<Graph, bool> Catalog::apply(const Graph& graph, PassId id) const {
  if (id < 0 || id >= size()) throw ConfigError("unknown pass id " + std::to_string(id));
  Graph out = entries_[static_cast<size_t>(id)].run(graph);
  bool changed = !ir::structural_equal(graph, out);
  return {std::move(out), changed};
}

std::string Catalog::fingerprint() const {
  uint64_t hash = 1469598103934665603ull;  // FNV-1a
  for (const Entry& e : entries_) {
    for (char ch : e.info.name) {
      hash ^= static_cast<unsigned char>(ch);
      hash *= 1099511628211ull;
    }
    hash ^= static_cast<unsigned char>('\n');
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buf);
}

std::pair<Graph, bool> apply_pass(const Graph& graph, PassId id, const Catalog& catalog) {
  return catalog.apply(graph, id);
}

Graph run_pipeline(const Graph& graph, std::span<const PassId> sequence,
                   const Catalog& catalog) {
  Graph current = graph;
  for (PassId id : sequence) {
    current = catalog.apply(current, id).first;
  }
  return current;
}

Graph run_default_pipeline(const Graph& graph, const Catalog& catalog) {
  Graph current = graph;
  for (int round = 0; round < catalog.default_pipeline_rounds(); ++round) {
    bool any_changed = false;
    for (PassId id : catalog.default_pipeline()) {
      auto [next, changed] = catalog.apply(current, id);
      current = std::move(next);
      any_changed = any_changed || changed;
    }
    if (!any_changed) break;
  }
  return current;
}

}  // namespace passgym::passes
