// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "passgym/bench.hpp"
#include "passgym/cost.hpp"
#include "passgym/error.hpp"
#include "passgym/graph.hpp"
#include "passgym/interp.hpp"
#include "passgym/text.hpp"
#include "support/test_util.hpp"

using namespace passgym;
using ir::Graph;
using ir::GraphBuilder;
using ir::make_shape;
using ir::Node;
using ir::OpKind;
using ir::Tensor;

namespace {

Graph minimal_add_graph() {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2, 2}));
  int64_t a = b.binary(OpKind::Add, p, p);
  return b.build(a);
}

}  // namespace

TEST_CASE("validate accepts a minimal well-formed graph") {
  CHECK(ir::validate(minimal_add_graph()).empty());
}

TEST_CASE("validate reports a shape-rule violation naming the node") {
  Graph g;
  g.nodes.push_back(Node{0, OpKind::Parameter, {}, make_shape({2, 2}), {}});
  g.nodes.push_back(Node{1, OpKind::Parameter, {}, make_shape({3, 3}), {}});
  g.nodes.push_back(Node{2, OpKind::Add, {0, 1}, make_shape({2, 2}), {}});
  g.root = 2;
  auto violations = ir::validate(g);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("%2") != std::string::npos);
  CHECK(violations[0].find("identical operand shapes") != std::string::npos);
}

TEST_CASE("validate reports operands that appear later in the node list") {
  Graph g;
  g.nodes.push_back(Node{0, OpKind::Parameter, {}, make_shape({2}), {}});
  g.nodes.push_back(Node{1, OpKind::Add, {0, 2}, make_shape({2}), {}});
  g.nodes.push_back(Node{2, OpKind::Parameter, {}, make_shape({2}), {}});
  g.root = 1;
  auto violations = ir::validate(g);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("topological order") != std::string::npos);
}

TEST_CASE("validate reports duplicate ids, bad roots, and arity violations") {
  Graph g;
  g.nodes.push_back(Node{0, OpKind::Parameter, {}, make_shape({2}), {}});
  g.nodes.push_back(Node{0, OpKind::Parameter, {}, make_shape({2}), {}});
  g.root = 7;
  auto violations = ir::validate(g);
  CHECK(violations.size() == 2);  // duplicate id + missing root

  Graph h;
  h.nodes.push_back(Node{0, OpKind::Parameter, {}, make_shape({2}), {}});
  h.nodes.push_back(Node{1, OpKind::Add, {0}, make_shape({2}), {}});
  h.root = 1;
  auto arity = ir::validate(h);
  REQUIRE(arity.size() == 1);
  CHECK(arity[0].find("expects 2 operand") != std::string::npos);
}

TEST_CASE("evaluate computes elementwise add of constants") {
  GraphBuilder b;
  int64_t c1 = b.constant(make_shape({2}), {1, 2});
  int64_t c2 = b.constant(make_shape({2}), {3, 4});
  Graph g = b.build(b.binary(OpKind::Add, c1, c2));
  Tensor out = ir::evaluate(g, {});
  CHECK(out.data == std::vector<double>{4, 6});
}

TEST_CASE("evaluate computes dot with an identity matrix") {
  GraphBuilder b;
  int64_t eye = b.constant(make_shape({2, 2}), {1, 0, 0, 1});
  int64_t m = b.constant(make_shape({2, 2}), {1, 2, 3, 4});
  Graph g = b.build(b.dot(eye, m));
  Tensor out = ir::evaluate(g, {});
  CHECK(out.data == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("evaluate treats exp(log(x)) as an inverse pair") {
  GraphBuilder b;
  int64_t c = b.constant(make_shape({1}), {5});
  Graph g = b.build(b.unary(OpKind::Exp, b.unary(OpKind::Log, c)));
  Tensor out = ir::evaluate(g, {});
  CHECK(std::abs(out.data[0] - 5.0) < 1e-12);
}

TEST_CASE("evaluate rejects missing and mis-shaped bindings") {
  Graph g = minimal_add_graph();
  CHECK_THROWS_AS(ir::evaluate(g, {}), DataError);
  ir::Bindings wrong;
  wrong.emplace(0, Tensor::zeros(make_shape({3})));
  CHECK_THROWS_AS(ir::evaluate(g, wrong), DataError);
}

TEST_CASE("evaluate propagates IEEE results for log of non-positive input") {
  GraphBuilder b;
  int64_t c = b.constant(make_shape({2}), {-1.0, 0.0});
  Graph g = b.build(b.unary(OpKind::Log, c));
  Tensor out = ir::evaluate(g, {});
  CHECK(std::isnan(out.data[0]));
  CHECK(out.data[1] == -std::numeric_limits<double>::infinity());
}

TEST_CASE("evaluate is deterministic bit for bit") {
  auto suite = bench::generate_suite(5, 10, 30, 900);
  std::mt19937_64 rng = rl::make_rng(4, 0);
  for (const auto& bench : suite) {
    auto bindings = testsupport::random_bindings(bench.graph, rng);
    Tensor a = ir::evaluate(bench.graph, bindings);
    Tensor b = ir::evaluate(bench.graph, bindings);
    CHECK(a.data == b.data);
  }
}

TEST_CASE("transpose, reshape, broadcast, reduce_sum semantics") {
  GraphBuilder b;
  int64_t m = b.constant(make_shape({2, 3}), {1, 2, 3, 4, 5, 6});
  SUBCASE("transpose") {
    Graph g = b.build(b.transpose(m, {1, 0}));
    Tensor out = ir::evaluate(g, {});
    CHECK(out.shape.dims == std::vector<int64_t>{3, 2});
    CHECK(out.data == std::vector<double>{1, 4, 2, 5, 3, 6});
  }
  SUBCASE("reshape is a row-major reinterpret") {
    Graph g = b.build(b.reshape(m, {3, 2}));
    Tensor out = ir::evaluate(g, {});
    CHECK(out.data == std::vector<double>{1, 2, 3, 4, 5, 6});
  }
  SUBCASE("broadcast maps source dims into the target") {
    int64_t v = b.constant(make_shape({3}), {7, 8, 9});
    Graph g = b.build(b.broadcast(v, {2, 3}, {1}));
    Tensor out = ir::evaluate(g, {});
    CHECK(out.data == std::vector<double>{7, 8, 9, 7, 8, 9});
  }
  SUBCASE("reduce_sum over one dim") {
    Graph g = b.build(b.reduce_sum(m, {1}));
    Tensor out = ir::evaluate(g, {});
    CHECK(out.shape.dims == std::vector<int64_t>{2});
    CHECK(out.data == std::vector<double>{6, 15});
  }
  SUBCASE("reduce_sum to scalar") {
    Graph g = b.build(b.reduce_sum(m, {0, 1}));
    Tensor out = ir::evaluate(g, {});
    CHECK(out.shape.rank() == 0);
    CHECK(out.data == std::vector<double>{21});
  }
}

TEST_CASE("cost analysis follows the per-kind flop rules") {
  SUBCASE("elementwise add of two parameters") {
    GraphBuilder b;
    int64_t p = b.parameter(make_shape({4}));
    int64_t q = b.parameter(make_shape({4}));
    auto cost = ir::cost_analysis(b.build(b.binary(OpKind::Add, p, q)));
    CHECK(cost.op_count == 1);
    CHECK(cost.flop_count == 4);
    CHECK(cost.transcendental_count == 0);
  }
  SUBCASE("dot [2,3]x[3,4]") {
    GraphBuilder b;
    int64_t p = b.parameter(make_shape({2, 3}));
    int64_t q = b.parameter(make_shape({3, 4}));
    auto cost = ir::cost_analysis(b.build(b.dot(p, q)));
    CHECK(cost.flop_count == 48);
  }
  SUBCASE("exp over 8 elements plus add over 8 elements") {
    // Hand sum of the rules: exp contributes 8 flops and 8 transcendentals,
    // add contributes 8 flops.
    GraphBuilder b;
    int64_t p = b.parameter(make_shape({8}));
    int64_t e = b.unary(OpKind::Exp, p);
    auto cost = ir::cost_analysis(b.build(b.binary(OpKind::Add, e, p)));
    CHECK(cost.flop_count == 16);
    CHECK(cost.transcendental_count == 8);
  }
  SUBCASE("op_count counts constants but not parameters") {
    GraphBuilder b;
    int64_t p = b.parameter(make_shape({2}));
    int64_t c = b.constant(make_shape({2}), {1, 1});
    auto cost = ir::cost_analysis(b.build(b.binary(OpKind::Multiply, p, c)));
    CHECK(cost.op_count == 2);  // constant + multiply
    int64_t total = 0;
    for (int64_t k : cost.per_kind) total += k;
    CHECK(cost.op_count ==
          total - cost.per_kind[static_cast<size_t>(OpKind::Parameter)]);
  }
}

TEST_CASE("flop_count >= transcendental_count >= 0 on generated graphs") {
  for (const auto& bench : bench::generate_suite(30, 8, 60, 1700)) {
    auto cost = ir::cost_analysis(bench.graph);
    CHECK(cost.transcendental_count >= 0);
    CHECK(cost.flop_count >= cost.transcendental_count);
  }
}

TEST_CASE("observation layout is [op_count, per_kind...]") {
  SUBCASE("parameter-rooted graph") {
    GraphBuilder b;
    int64_t p = b.parameter(make_shape({2}));
    auto obs = ir::observation(b.build(p));
    CHECK(obs[0] == 0.0);
    CHECK(obs[1 + static_cast<int>(OpKind::Parameter)] == 1.0);
    for (int k = 1; k < ir::kOpKindCount; ++k) {
      CHECK(obs[static_cast<size_t>(1 + k)] == 0.0);
    }
  }
  SUBCASE("two adds, one exp, three parameters") {
    GraphBuilder b;
    int64_t p0 = b.parameter(make_shape({2}));
    int64_t p1 = b.parameter(make_shape({2}));
    int64_t p2 = b.parameter(make_shape({2}));
    int64_t a = b.binary(OpKind::Add, p0, p1);
    int64_t e = b.unary(OpKind::Exp, p2);
    auto obs = ir::observation(b.build(b.binary(OpKind::Add, a, e)));
    CHECK(obs[0] == 3.0);
    CHECK(obs[1 + static_cast<int>(OpKind::Add)] == 2.0);
    CHECK(obs[1 + static_cast<int>(OpKind::Exp)] == 1.0);
    CHECK(obs[1 + static_cast<int>(OpKind::Parameter)] == 3.0);
  }
}

TEST_CASE("observation survives a text round-trip on 100 random graphs") {
  auto suite = bench::generate_suite(100, 8, 80, 31000);
  for (const auto& bench : suite) {
    Graph round = ir::parse_text(ir::emit_text(bench.graph));
    CHECK(ir::observation(bench.graph) == ir::observation(round));
  }
}

TEST_CASE("parse_text reads the canonical two-node example") {
  Graph g = ir::parse_text(
      "%0 = f32[2,2] parameter()\n%1 = f32[2,2] add(%0, %0)\nROOT %1\n");
  REQUIRE(g.nodes.size() == 2);
  CHECK(g.nodes[0].kind == OpKind::Parameter);
  CHECK(g.nodes[1].kind == OpKind::Add);
  CHECK(g.root == 1);
}

TEST_CASE("emit then parse is the identity on canonical text") {
  const std::string canonical =
      "%0 = f32[2,2] parameter()\n"
      "%1 = f32[] constant() literal={3.5}\n"
      "%2 = f32[2,2] broadcast(%1) dims={}\n"
      "%3 = f32[2,2] multiply(%0, %2)\n"
      "%4 = f32[2,2] transpose(%3) perm={1,0}\n"
      "%5 = f32[4] reshape(%4) dims={4}\n"
      "%6 = f32[] reduce_sum(%5) reduce={0}\n"
      "ROOT %6\n";
  CHECK(ir::emit_text(ir::parse_text(canonical)) == canonical);
}

TEST_CASE("parse errors carry line numbers") {
  SUBCASE("arity error") {
    try {
      ir::parse_text("%0 = f32[2] parameter()\n%1 = f32[2] add(%0)\nROOT %1\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("expects 2 operand") != std::string::npos);
    }
  }
  SUBCASE("unknown op") {
    try {
      ir::parse_text("%0 = f32[2] conv()\nROOT %0\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
  }
  SUBCASE("forward reference") {
    CHECK_THROWS_AS(
        ir::parse_text("%1 = f32[2] negate(%0)\n%0 = f32[2] parameter()\nROOT %1\n"),
        ParseError);
  }
  SUBCASE("missing root") {
    CHECK_THROWS_AS(ir::parse_text("%0 = f32[2] parameter()\n"), ParseError);
  }
  SUBCASE("shape rule violation") {
    CHECK_THROWS_AS(
        ir::parse_text("%0 = f32[2] parameter()\n%1 = f32[3] negate(%0)\nROOT %1\n"),
        ParseError);
  }
}

TEST_CASE("parse renumbers ids to topological positions") {
  Graph g = ir::parse_text("%5 = f32[2] parameter()\n%9 = f32[2] negate(%5)\nROOT %9\n");
  CHECK(g.nodes[0].id == 0);
  CHECK(g.nodes[1].id == 1);
  CHECK(g.root == 1);
}

TEST_CASE("text round-trip preserves structure on generated graphs") {
  for (const auto& bench : bench::generate_suite(50, 8, 80, 52000)) {
    Graph round = ir::parse_text(ir::emit_text(bench.graph));
    CHECK(ir::structural_equal(bench.graph, round));
  }
}

TEST_CASE("comments and blank lines are ignored") {
  Graph g = ir::parse_text(
      "# header comment\n\n%0 = f32[2] parameter()  # trailing\n\nROOT %0\n");
  CHECK(g.nodes.size() == 1);
}

TEST_CASE("structural_equal ignores names and id numbering") {
  Graph a = minimal_add_graph();
  Graph b = a;
  b.name = "other";
  for (Node& n : b.nodes) n.id += 10;
  for (Node& n : b.nodes) {
    for (int64_t& op : n.operands) op += 10;
  }
  b.root += 10;
  CHECK(ir::structural_equal(a, b));
  b.nodes[1].kind = OpKind::Multiply;
  CHECK(!ir::structural_equal(a, b));
}
