// SPDX-License-Identifier: Apache-2.0

#include "passgym/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "passgym/cost.hpp"
#include "passgym/error.hpp"
#include "passgym/passes.hpp"
#include "passgym/rng.hpp"
#include "passgym/text.hpp"

namespace passgym::bench {

using ir::Graph;
using ir::GraphBuilder;
using ir::make_shape;
using ir::Node;
using ir::OpKind;
using ir::TensorShape;
using nlohmann::json;

namespace {

// --- synthetic graph templates ---------------------------------------------

int64_t pick_dim(std::mt19937_64& rng) {
  static const int64_t dims[] = {2, 3, 4};
  return dims[rl::uniform_index(rng, 3)];
}

std::vector<double> random_literal(std::mt19937_64& rng, const TensorShape& shape) {
  std::vector<double> v(static_cast<size_t>(shape.element_count()));
  for (double& x : v) x = rl::uniform_real(rng, 0.5, 2.0);
  return v;
}

int64_t ops_so_far(const GraphBuilder& b) {
  int64_t n = 0;
  for (int64_t i = 0; i < b.size(); ++i) {
    if (b.node(i).kind != OpKind::Parameter) ++n;
  }
  return n;
}

Graph template_mlp_block(std::mt19937_64& rng, int64_t budget) {
  GraphBuilder b;
  const int64_t batch = pick_dim(rng);
  const int64_t width = pick_dim(rng);
  int64_t x = b.parameter(make_shape({batch, width}));
  do {
    int64_t w = b.parameter(make_shape({width, width}));
    int64_t h = b.dot(x, w);
    int64_t bias = b.constant(make_shape({}), {rl::uniform_real(rng, 0.5, 2.0)});
    int64_t row = b.broadcast(bias, {width}, {});
    int64_t full = b.broadcast(row, {batch, width}, {1});
    x = b.unary(OpKind::Tanh, b.binary(OpKind::Add, h, full));
  } while (ops_so_far(b) + 6 <= budget);
  int64_t root = b.reduce_sum(x, {0, 1});
  return b.build(root);
}

Graph template_attention_like(std::mt19937_64& rng, int64_t budget) {
  GraphBuilder b;
  const int64_t n = pick_dim(rng);
  const int64_t m = pick_dim(rng);
  int64_t x = b.parameter(make_shape({n, m}));
  do {
    int64_t q = b.dot(x, b.parameter(make_shape({m, m})));
    int64_t k = b.dot(x, b.parameter(make_shape({m, m})));
    int64_t kt = b.transpose(k, {1, 0});
    int64_t scores = b.dot(q, kt);
    int64_t e = b.unary(OpKind::Exp, scores);
    int64_t sums = b.reduce_sum(e, {1});
    int64_t denom = b.broadcast(sums, {n, n}, {0});
    int64_t soft = b.binary(OpKind::Divide, e, denom);
    int64_t v = b.dot(x, b.parameter(make_shape({m, m})));
    x = b.dot(soft, v);
  } while (ops_so_far(b) + 10 <= budget);
  int64_t root = b.reduce_sum(x, {0, 1});
  return b.build(root);
}

Graph template_residual_chain(std::mt19937_64& rng, int64_t budget) {
  GraphBuilder b;
  const int64_t rows = pick_dim(rng);
  const int64_t cols = pick_dim(rng);
  const TensorShape shape = make_shape({rows, cols});
  int64_t x = b.parameter(shape);
  do {
    int64_t scale = b.constant(shape, random_literal(rng, shape));
    int64_t t = b.unary(OpKind::Tanh, b.binary(OpKind::Multiply, x, scale));
    x = b.binary(OpKind::Add, x, t);  // skip connection
  } while (ops_so_far(b) + 4 <= budget);
  return b.build(x);
}

Graph template_random_dag(std::mt19937_64& rng, int64_t budget) {
  GraphBuilder b;
  const int64_t n = pick_dim(rng);
  const TensorShape shape = make_shape({n, n});  // square so dot/transpose stay in-shape
  std::vector<int64_t> pool{b.parameter(shape), b.parameter(shape)};
  auto pick = [&] {
    return pool[static_cast<size_t>(rl::uniform_index(rng, static_cast<int64_t>(pool.size())))];
  };
  while (ops_so_far(b) + 2 <= budget) {
    switch (rl::uniform_index(rng, 8)) {
      case 0:
        pool.push_back(b.binary(OpKind::Add, pick(), pick()));
        break;
      case 1:
        pool.push_back(b.binary(OpKind::Subtract, pick(), pick()));
        break;
      case 2:
        pool.push_back(b.binary(OpKind::Multiply, pick(), pick()));
        break;
      case 3:
        pool.push_back(b.binary(OpKind::Maximum, pick(), pick()));
        break;
      case 4:
        pool.push_back(b.unary(OpKind::Tanh, pick()));
        break;
      case 5:
        pool.push_back(b.dot(pick(), pick()));
        break;
      case 6:
        pool.push_back(b.transpose(pick(), {1, 0}));
        break;
      case 7:
        pool.push_back(b.constant(shape, random_literal(rng, shape)));
        break;
    }
  }
  int64_t root = b.binary(OpKind::Add, pool[pool.size() - 1], pool[pool.size() - 2]);
  return b.build(root);
}

// --- salting ----------------------------------------------------------------

// A wrapper emits value-preserving nodes around x and returns the node that
// replaces it on the wrapped edge. `gain` is the op count the full pipeline
// can win back (0 hurts only the default pipeline via strength-reduce-div).
struct SaltKind {
  const char* name;
  int cost;        // ops added
  int gain;        // ops the optimizer can remove again
  bool needs_rank1;  // requires rank >= 1
};

constexpr SaltKind kSalts[] = {
    {"mul_one", 2, 2, false},     {"add_zero", 2, 2, false},
    {"sub_zero", 2, 2, false},    {"div_one", 2, 2, false},
    {"neg_neg", 2, 2, false},     {"log_exp", 2, 2, false},
    {"island_add", 3, 3, false},  {"zero_mul_add", 3, 3, false},
    {"transpose_pair", 2, 2, true}, {"reshape_pair", 2, 2, true},
    {"broadcast_noop", 1, 1, false}, {"max_self", 1, 1, false},
    {"clone_use", 1, 1, false},   {"shared_div", 3, 0, false},
};
constexpr int kSaltCount = static_cast<int>(sizeof(kSalts) / sizeof(kSalts[0]));

int salt_index(const char* name) {
  for (int i = 0; i < kSaltCount; ++i) {
    if (std::string_view(kSalts[i].name) == name) return i;
  }
  return -1;
}

// Emits the wrapper for salt `which` around output id x; returns the
// replacement id. `rng` only draws literal values.
int64_t emit_salt(int which, GraphBuilder& b, int64_t x, std::mt19937_64& rng) {
  const TensorShape shape = b.shape_of(x);  // copy: emits may reallocate the node pool
  const size_t elems = static_cast<size_t>(shape.element_count());
  const std::string_view name = kSalts[which].name;
  if (name == "mul_one") {
    return b.binary(OpKind::Multiply, x, b.constant(shape, std::vector<double>(elems, 1.0)));
  }
  if (name == "add_zero") {
    return b.binary(OpKind::Add, x, b.constant(shape, std::vector<double>(elems, 0.0)));
  }
  if (name == "sub_zero") {
    return b.binary(OpKind::Subtract, x, b.constant(shape, std::vector<double>(elems, 0.0)));
  }
  if (name == "div_one") {
    return b.binary(OpKind::Divide, x, b.constant(shape, std::vector<double>(elems, 1.0)));
  }
  if (name == "neg_neg") {
    return b.unary(OpKind::Negate, b.unary(OpKind::Negate, x));
  }
  if (name == "log_exp") {
    return b.unary(OpKind::Log, b.unary(OpKind::Exp, x));
  }
  if (name == "island_add") {
    int64_t c = b.constant(shape, random_literal(rng, shape));
    return b.binary(OpKind::Add, x, b.binary(OpKind::Subtract, c, c));
  }
  if (name == "zero_mul_add") {
    int64_t zeros = b.constant(shape, std::vector<double>(elems, 0.0));
    return b.binary(OpKind::Add, x, b.binary(OpKind::Multiply, x, zeros));
  }
  if (name == "transpose_pair") {
    std::vector<int64_t> perm(static_cast<size_t>(shape.rank()));
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int64_t>(perm.size() - 1 - i);
    std::vector<int64_t> inverse(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) inverse[static_cast<size_t>(perm[i])] =
        static_cast<int64_t>(i);
    return b.transpose(b.transpose(x, perm), inverse);
  }
  if (name == "reshape_pair") {
    int64_t flat = b.reshape(x, {shape.element_count()});
    return b.reshape(flat, shape.dims);
  }
  if (name == "broadcast_noop") {
    std::vector<int64_t> mapped(static_cast<size_t>(shape.rank()));
    for (size_t i = 0; i < mapped.size(); ++i) mapped[i] = static_cast<int64_t>(i);
    return b.broadcast(x, shape.dims, mapped);
  }
  if (name == "max_self") {
    return b.binary(OpKind::Maximum, x, x);
  }
  if (name == "clone_use") {
    const Node& src = b.node(x);
    if (src.kind == OpKind::Parameter) {
      return b.binary(OpKind::Multiply, x,
                      b.constant(shape, std::vector<double>(elems, 1.0)));
    }
    return b.emit_declared(src.kind, src.operands, src.shape, src.attrs);
  }
  if (name == "shared_div") {
    // Divide(Multiply(x, c), c): value-preserving; strength reduction turns
    // the divide into a multiply by a fresh 1/c constant while c stays live,
    // so the default pipeline ends one op larger than a policy that skips it.
    int64_t c = b.constant(shape, random_literal(rng, shape));
    return b.binary(OpKind::Divide, b.binary(OpKind::Multiply, x, c), c);
  }
  throw DataError("unknown salt");
}

struct EdgeRef {
  int node_index;  // -1 for the root edge
  int slot;
};

// Applies all planned edge modifications in one rebuild, so wrappers never
// nest inside each other.
Graph apply_salts(const Graph& graph, const std::vector<std::pair<EdgeRef, int>>& plan,
                  std::mt19937_64& rng) {
  std::unordered_map<int64_t, int64_t> remap;
  GraphBuilder b;
  Graph out;
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    Node n = graph.nodes[i];
    for (int64_t& op : n.operands) op = remap.at(op);
    for (const auto& [edge, salt] : plan) {
      if (edge.node_index == static_cast<int>(i)) {
        int64_t& slot_ref = n.operands[static_cast<size_t>(edge.slot)];
        slot_ref = emit_salt(salt, b, slot_ref, rng);
      }
    }
    remap[graph.nodes[i].id] = b.emit_declared(n.kind, n.operands, n.shape, n.attrs);
  }
  int64_t root = remap.at(graph.root);
  for (const auto& [edge, salt] : plan) {
    if (edge.node_index == -1) root = emit_salt(salt, b, root, rng);
  }
  return b.build(root, graph.name);
}

// Appends a small unreachable subgraph reading existing values.
Graph append_dead_subgraph(const Graph& graph, std::mt19937_64& rng) {
  GraphBuilder b;
  std::unordered_map<int64_t, int64_t> remap;
  for (const Node& node : graph.nodes) {
    Node n = node;
    for (int64_t& op : n.operands) op = remap.at(op);
    remap[node.id] = b.emit_declared(n.kind, n.operands, n.shape, n.attrs);
  }
  const int extras = 2 + static_cast<int>(rl::uniform_index(rng, 3));
  int64_t cur = remap.at(
      graph.nodes[static_cast<size_t>(rl::uniform_index(
                      rng, static_cast<int64_t>(graph.nodes.size())))].id);
  for (int i = 0; i < extras; ++i) {
    switch (rl::uniform_index(rng, 3)) {
      case 0:
        cur = b.unary(OpKind::Tanh, cur);
        break;
      case 1:
        cur = b.unary(OpKind::Negate, cur);
        break;
      default:
        cur = b.binary(OpKind::Add, cur, cur);
        break;
    }
  }
  return b.build(remap.at(graph.root), graph.name);
}

}  // namespace

std::string_view origin_name(Origin origin) {
  switch (origin) {
    case Origin::MlpBlock:
      return "mlp_block";
    case Origin::AttentionLike:
      return "attention_like";
    case Origin::ResidualChain:
      return "residual_chain";
    case Origin::RandomDag:
      return "random_dag";
  }
  return "random_dag";
}

std::optional<Origin> origin_from_name(std::string_view name) {
  for (Origin o : {Origin::MlpBlock, Origin::AttentionLike, Origin::ResidualChain,
                   Origin::RandomDag}) {
    if (origin_name(o) == name) return o;
  }
  return std::nullopt;
}

ir::Graph generate_benchmark_graph(Origin origin, uint64_t seed, int64_t size_min,
                                   int64_t size_max) {
  if (size_min < 5 || size_max > 5000 || size_min > size_max) {
    throw ConfigError("benchmark size range must lie within [5, 5000]");
  }
  std::mt19937_64 rng = rl::make_rng(seed, 7);
  const int64_t target =
      size_min + rl::uniform_index(rng, size_max - size_min + 1);
  const int64_t template_budget = std::max<int64_t>(2, (target * 11) / 20);

  Graph graph;
  switch (origin) {
    case Origin::MlpBlock:
      graph = template_mlp_block(rng, template_budget);
      break;
    case Origin::AttentionLike:
      graph = template_attention_like(rng, template_budget);
      break;
    case Origin::ResidualChain:
      graph = template_residual_chain(rng, template_budget);
      break;
    case Origin::RandomDag:
      graph = template_random_dag(rng, template_budget);
      break;
  }

  // Candidate edges: every operand slot plus the root edge.
  std::vector<EdgeRef> edges;
  edges.push_back(EdgeRef{-1, 0});
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    for (size_t s = 0; s < graph.nodes[i].operands.size(); ++s) {
      edges.push_back(EdgeRef{static_cast<int>(i), static_cast<int>(s)});
    }
  }
  for (size_t i = edges.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rl::uniform_index(rng, static_cast<int64_t>(i)));
    std::swap(edges[i - 1], edges[j]);
  }

  auto rank_of = [&](const EdgeRef& e) {
    if (e.node_index == -1) {
      return graph.find(graph.root)->shape.rank();
    }
    const Node& n = graph.nodes[static_cast<size_t>(e.node_index)];
    return graph.find(n.operands[static_cast<size_t>(e.slot)])->shape.rank();
  };

  int64_t current = ir::cost_analysis(graph).op_count;
  std::vector<std::pair<EdgeRef, int>> plan;
  size_t next_edge = 0;
  int64_t total_gain = 0;
  int shared_divs = 0;

  // Three guaranteed-reducible wrappers first, then random fill toward the
  // size target; shared_div only once enough reducible gain is banked.
  const int core[] = {salt_index("island_add"), salt_index("mul_one"),
                      salt_index("zero_mul_add")};
  int core_at = 0;
  while (next_edge < edges.size() && current < target) {
    const EdgeRef edge = edges[next_edge++];
    int salt;
    if (core_at < 3) {
      salt = core[core_at++];
    } else {
      salt = static_cast<int>(rl::uniform_index(rng, kSaltCount));
    }
    if (kSalts[salt].needs_rank1 && rank_of(edge) < 1) continue;
    if (kSalts[salt].gain == 0) {
      if (shared_divs >= 3 || total_gain < shared_divs + 4) continue;
      ++shared_divs;
    }
    if (current + kSalts[salt].cost > size_max) continue;
    plan.emplace_back(edge, salt);
    current += kSalts[salt].cost;
    total_gain += kSalts[salt].gain;
  }
  if (!plan.empty()) {
    std::mt19937_64 literal_rng = rl::make_rng(seed, 11);
    graph = apply_salts(graph, plan, literal_rng);
  }

  std::mt19937_64 dead_rng = rl::make_rng(seed, 13);
  while (ir::cost_analysis(graph).op_count + 4 <= target) {
    graph = append_dead_subgraph(graph, dead_rng);
  }
  return graph;
}

std::vector<Benchmark> generate_suite(int count, int64_t size_min, int64_t size_max,
                                      uint64_t base_seed) {
  if (count < 1) throw ConfigError("suite count must be >= 1");
  std::vector<Benchmark> suite;
  suite.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const uint64_t seed = base_seed + static_cast<uint64_t>(i);
    std::mt19937_64 pick = rl::make_rng(seed, 3);
    const Origin origin = static_cast<Origin>(rl::uniform_index(pick, 4));
    char name[32];
    std::snprintf(name, sizeof(name), "bench_%08llu", static_cast<unsigned long long>(seed));
    Benchmark b;
    b.name = name;
    b.origin = origin;
    b.seed = seed;
    b.graph = generate_benchmark_graph(origin, seed, size_min, size_max);
    b.graph.name = b.name;
    suite.push_back(std::move(b));
  }
  return suite;
}

// --- metric -----------------------------------------------------------------

MetricResult geometric_mean_metric(std::span<const MetricRow> rows) {
  if (rows.empty()) throw DataError("geometric_mean_metric: no rows");
  MetricResult result;
  double log_sum = 0.0;
  int included = 0;
  bool has_zero_ratio = false;
  for (const MetricRow& row : rows) {
    if (row.rl_final > row.initial || row.default_final > row.initial) {
      ++result.excluded;
      continue;
    }
    if (row.initial == row.default_final) {
      if (row.rl_final == row.initial) {
        ++included;  // ratio exactly 1 contributes log 0
      } else {
        ++result.excluded;
      }
      continue;
    }
    const double ratio = (row.initial - row.rl_final) / (row.initial - row.default_final);
    ++included;
    if (ratio == 0.0) {
      has_zero_ratio = true;
    } else {
      log_sum += std::log(ratio);
    }
  }
  if (included == 0) {
    throw DataError("geometric_mean_metric: every row was excluded; metric undefined");
  }
  result.geometric_mean =
      has_zero_ratio ? 0.0 : std::exp(log_sum / static_cast<double>(included));
  return result;
}

double improvement_percent(double initial, double rl_final, double default_final) {
  const double agent_reduction = initial - rl_final;
  const double default_reduction = initial - default_final;
  return 100.0 * (agent_reduction - default_reduction) / std::max(1.0, default_reduction);
}

// --- evaluation ---------------------------------------------------------------

EvalReport run_evaluation(agents::ActionPolicy& policy, std::span<const Benchmark> suite,
                          const env::EnvConfig& env_config, int workers) {
  if (suite.empty()) throw DataError("run_evaluation: empty suite");

  std::vector<EvalRow> rows(suite.size());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(suite.size())));
  auto eval_row = [&](size_t i) {
    const Benchmark& bench = suite[i];
    EvalRow row;
    row.name = bench.name;
    try {
      row.initial = ir::cost_analysis(bench.graph).op_count;
      row.default_final =
          ir::cost_analysis(passes::run_default_pipeline(bench.graph)).op_count;
      env::PassEnv env(env_config);
      row.rl_final = agents::evaluate_policy(policy, env, bench.graph, true).final_op_count;
      row.improvement = improvement_percent(static_cast<double>(row.initial),
                                            static_cast<double>(row.rl_final),
                                            static_cast<double>(row.default_final));
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    rows[i] = std::move(row);
  };
  if (workers == 1) {
    for (size_t i = 0; i < suite.size(); ++i) eval_row(i);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (suite.size() + static_cast<size_t>(workers) - 1) /
                         static_cast<size_t>(workers);
    for (int w = 0; w < workers; ++w) {
      const size_t lo = static_cast<size_t>(w) * chunk;
      const size_t hi = std::min(suite.size(), lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] {
        for (size_t i = lo; i < hi; ++i) eval_row(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::sort(rows.begin(), rows.end(),
            [](const EvalRow& a, const EvalRow& b) { return a.name < b.name; });

  std::vector<MetricRow> metric_rows;
  for (const EvalRow& row : rows) {
    if (!row.failed) {
      metric_rows.push_back(MetricRow{static_cast<double>(row.initial),
                                      static_cast<double>(row.rl_final),
                                      static_cast<double>(row.default_final)});
    }
  }
  MetricResult metric = geometric_mean_metric(metric_rows);

  EvalReport report;
  report.rows = std::move(rows);
  report.geometric_mean = metric.geometric_mean;
  report.excluded_count = metric.excluded;

  // Recompute per-row inclusion so the ratio column matches the metric rule.
  for (EvalRow& row : report.rows) {
    if (row.failed) continue;
    const double I = static_cast<double>(row.initial);
    const double R = static_cast<double>(row.rl_final);
    const double D = static_cast<double>(row.default_final);
    if (R > I || D > I) continue;
    if (I == D) {
      if (R == I) row.ratio = 1.0;
      continue;
    }
    row.ratio = (I - R) / (I - D);
  }
  return report;
}

// --- reports ------------------------------------------------------------------

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path.string());
  out << "name,I,R,D,ratio,improvement_percent\n";
  for (const EvalRow& row : report.rows) {
    if (row.failed) {
      out << row.name << ",,,,,\n";
      continue;
    }
    out << row.name << ',' << row.initial << ',' << row.rl_final << ',' << row.default_final
        << ',' << (row.ratio ? ir::format_double(*row.ratio) : std::string()) << ','
        << ir::format_double(row.improvement) << '\n';
  }
  out << "GEOMEAN,,,," << ir::format_double(report.geometric_mean) << ",\n";
  if (!out) throw DataError("report write failed: " + path.string());
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
  json rows = json::array();
  for (const EvalRow& row : report.rows) {
    json r{{"name", row.name}};
    if (row.failed) {
      r["failed"] = true;
      r["error"] = row.error;
    } else {
      r["I"] = row.initial;
      r["R"] = row.rl_final;
      r["D"] = row.default_final;
      if (row.ratio) {
        r["ratio"] = *row.ratio;
      } else {
        r["excluded"] = true;
      }
      r["improvement_percent"] = row.improvement;
    }
    rows.push_back(std::move(r));
  }
  json j{{"rows", std::move(rows)},
         {"geometric_mean", report.geometric_mean},
         {"excluded_count", report.excluded_count}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path.string());
  out << j.dump(2) << '\n';
}

EvalReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report: " + path.string());
  json j = json::parse(in);
  EvalReport report;
  report.geometric_mean = j.at("geometric_mean");
  report.excluded_count = j.at("excluded_count");
  for (const json& r : j.at("rows")) {
    EvalRow row;
    row.name = r.at("name");
    if (r.value("failed", false)) {
      row.failed = true;
      row.error = r.value("error", "");
    } else {
      row.initial = r.at("I");
      row.rl_final = r.at("R");
      row.default_final = r.at("D");
      if (r.contains("ratio")) row.ratio = r.at("ratio").get<double>();
      row.improvement = r.at("improvement_percent");
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

// --- suites ---------------------------------------------------------------------

void write_suite(std::span<const Benchmark> suite, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest");
  if (!manifest) throw DataError("cannot write manifest in " + dir.string());
  for (const Benchmark& bench : suite) {
    const std::string file = bench.name + ".mg";
    ir::write_graph_file(bench.graph, dir / file);
    manifest << bench.name << '\t' << origin_name(bench.origin) << '\t' << bench.seed << '\t'
             << file << '\n';
  }
  if (!manifest) throw DataError("manifest write failed in " + dir.string());
}

std::vector<Benchmark> read_suite(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest");
  if (!manifest) throw DataError("cannot open suite manifest in " + dir.string());
  std::vector<Benchmark> suite;
  std::string line;
  int line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string name, origin_str, seed_str, file;
    if (!std::getline(ss, name, '\t') || !std::getline(ss, origin_str, '\t') ||
        !std::getline(ss, seed_str, '\t') || !std::getline(ss, file, '\t')) {
      throw ParseError(line_no, "malformed manifest line");
    }
    auto origin = origin_from_name(origin_str);
    if (!origin) throw ParseError(line_no, "unknown origin '" + origin_str + "'");
    Benchmark bench;
    bench.name = name;
    bench.origin = *origin;
    bench.seed = std::stoull(seed_str);
    bench.graph = ir::read_graph_file(dir / file);
    bench.graph.name = name;
    suite.push_back(std::move(bench));
  }
  if (suite.empty()) throw DataError("suite manifest is empty: " + dir.string());
  return suite;
}

}  // namespace passgym::bench
