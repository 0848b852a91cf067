// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "passgym/bench.hpp"
#include "passgym/cost.hpp"
#include "passgym/error.hpp"
#include "passgym/interp.hpp"
#include "passgym/passes.hpp"
#include "passgym/text.hpp"
#include "support/test_util.hpp"

using namespace passgym;
using ir::Graph;
using ir::GraphBuilder;
using ir::make_shape;
using ir::OpKind;
using ir::Tensor;
using passes::Catalog;
using passes::PassId;

namespace {

const Catalog& cat() { return Catalog::standard(); }

PassId id_of(const char* name) {
  PassId id = cat().find(name);
  REQUIRE(id >= 0);
  return id;
}

int64_t ops(const Graph& g) { return ir::cost_analysis(g).op_count; }

}  // namespace

TEST_CASE("constant-folding folds an all-constant add") {
  GraphBuilder b;
  int64_t c1 = b.constant(make_shape({}), {2});
  int64_t c2 = b.constant(make_shape({}), {3});
  Graph g = b.build(b.binary(OpKind::Add, c1, c2));
  auto [out, changed] = cat().apply(g, id_of("constant-folding"));
  CHECK(changed);
  const ir::Node* root = out.find(out.root);
  REQUIRE(root != nullptr);
  CHECK(root->kind == OpKind::Constant);
  CHECK(root->attrs.literal == std::vector<double>{5});
  // the original constants stay behind as dead nodes until dce runs
  CHECK(out.nodes.size() == 3);
}

TEST_CASE("constant-folding cascades to a fixed point in one application") {
  GraphBuilder b;
  int64_t c1 = b.constant(make_shape({}), {2});
  int64_t c2 = b.constant(make_shape({}), {3});
  int64_t s = b.binary(OpKind::Add, c1, c2);
  int64_t t = b.binary(OpKind::Multiply, s, c2);
  Graph g = b.build(b.unary(OpKind::Negate, t));
  auto [out, changed] = cat().apply(g, id_of("constant-folding"));
  CHECK(changed);
  CHECK(out.find(out.root)->kind == OpKind::Constant);
  CHECK(out.find(out.root)->attrs.literal == std::vector<double>{-15});
}

TEST_CASE("dce removes unreachable nodes") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2}));
  b.binary(OpKind::Add, p, p);
  b.binary(OpKind::Add, p, p);
  b.binary(OpKind::Add, p, p);
  Graph g = b.build(p);
  CHECK(ops(g) == 3);
  auto [out, changed] = cat().apply(g, id_of("dce"));
  CHECK(changed);
  CHECK(ops(out) == 0);
}

TEST_CASE("identity-elim elides the op but leaves the dead constant") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2}));
  int64_t ones = b.constant(make_shape({2}), {1, 1});
  Graph g = b.build(b.binary(OpKind::Multiply, p, ones));
  CHECK(ops(g) == 2);

  auto [after_ie, changed] = cat().apply(g, id_of("identity-elim"));
  CHECK(changed);
  CHECK(ops(after_ie) == 1);  // multiply gone, dead constant remains
  CHECK(after_ie.find(after_ie.root)->kind == OpKind::Parameter);

  auto [after_dce, dce_changed] = cat().apply(after_ie, id_of("dce"));
  CHECK(dce_changed);
  CHECK(ops(after_dce) == 0);
  CHECK(after_dce.nodes.size() == 1);
}

TEST_CASE("identity-elim handles all four patterns") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2}));
  int64_t zeros = b.constant(make_shape({2}), {0, 0});
  int64_t ones = b.constant(make_shape({2}), {1, 1});
  int64_t a = b.binary(OpKind::Add, p, zeros);
  int64_t s = b.binary(OpKind::Subtract, a, zeros);
  int64_t m = b.binary(OpKind::Multiply, s, ones);
  Graph g = b.build(b.binary(OpKind::Divide, m, ones));
  auto [out, changed] = cat().apply(g, id_of("identity-elim"));
  CHECK(changed);
  CHECK(out.find(out.root)->kind == OpKind::Parameter);
}

TEST_CASE("zero-elim replaces multiply by zero with the zero constant") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2, 2}));
  int64_t zeros = b.constant(make_shape({2, 2}), {0, 0, 0, 0});
  Graph g = b.build(b.binary(OpKind::Multiply, p, zeros));
  auto [out, changed] = cat().apply(g, id_of("zero-elim"));
  CHECK(changed);
  const ir::Node* root = out.find(out.root);
  CHECK(root->kind == OpKind::Constant);
  CHECK(root->shape.dims == std::vector<int64_t>{2, 2});
  CHECK(root->attrs.literal == std::vector<double>(4, 0.0));
}

TEST_CASE("neg-neg-elim cancels double negation") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({3}));
  Graph g = b.build(b.unary(OpKind::Negate, b.unary(OpKind::Negate, p)));
  auto [out, changed] = cat().apply(g, id_of("neg-neg-elim"));
  CHECK(changed);
  CHECK(out.find(out.root)->kind == OpKind::Parameter);
}

TEST_CASE("exp-log-elim collapses both compositions") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({3}));
  SUBCASE("log(exp(x))") {
    Graph g = b.build(b.unary(OpKind::Log, b.unary(OpKind::Exp, p)));
    auto [out, changed] = cat().apply(g, id_of("exp-log-elim"));
    CHECK(changed);
    CHECK(out.find(out.root)->kind == OpKind::Parameter);
  }
  SUBCASE("exp(log(x))") {
    Graph g = b.build(b.unary(OpKind::Exp, b.unary(OpKind::Log, p)));
    auto [out, changed] = cat().apply(g, id_of("exp-log-elim"));
    CHECK(changed);
    CHECK(out.find(out.root)->kind == OpKind::Parameter);
  }
}

TEST_CASE("transpose-folding cancels inverse pairs and composes otherwise") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2, 3}));
  SUBCASE("inverse pair cancels") {
    int64_t t1 = b.transpose(p, {1, 0});
    Graph g = b.build(b.transpose(t1, {1, 0}));
    auto [out, changed] = cat().apply(g, id_of("transpose-folding"));
    CHECK(changed);
    CHECK(out.find(out.root)->kind == OpKind::Parameter);
  }
  SUBCASE("three transposes compose to one") {
    GraphBuilder b3;
    int64_t q = b3.parameter(make_shape({2, 3, 4}));
    int64_t t1 = b3.transpose(q, {1, 2, 0});
    int64_t t2 = b3.transpose(t1, {2, 0, 1});  // undoes t1
    Graph g = b3.build(b3.transpose(t2, {0, 2, 1}));
    auto [out, changed] = cat().apply(g, id_of("transpose-folding"));
    CHECK(changed);
    const ir::Node* root = out.find(out.root);
    CHECK(root->kind == OpKind::Transpose);
    CHECK(root->attrs.perm == std::vector<int64_t>{0, 2, 1});
    CHECK(out.find(root->operands[0])->kind == OpKind::Parameter);
  }
}

TEST_CASE("reshape-folding composes chains and drops no-op reshapes") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2, 3}));
  SUBCASE("reshape chain back to the source shape vanishes") {
    int64_t r1 = b.reshape(p, {6});
    Graph g = b.build(b.reshape(r1, {2, 3}));
    auto [out, changed] = cat().apply(g, id_of("reshape-folding"));
    CHECK(changed);
    CHECK(out.find(out.root)->kind == OpKind::Parameter);
  }
  SUBCASE("reshape chain to a new shape becomes one reshape") {
    int64_t r1 = b.reshape(p, {6});
    Graph g = b.build(b.reshape(r1, {3, 2}));
    auto [out, changed] = cat().apply(g, id_of("reshape-folding"));
    CHECK(changed);
    const ir::Node* root = out.find(out.root);
    CHECK(root->kind == OpKind::Reshape);
    CHECK(root->shape.dims == std::vector<int64_t>{3, 2});
    CHECK(out.find(root->operands[0])->kind == OpKind::Parameter);
  }
  SUBCASE("reshape to the operand's own shape vanishes") {
    Graph g = b.build(b.reshape(p, {2, 3}));
    auto [out, changed] = cat().apply(g, id_of("reshape-folding"));
    CHECK(changed);
    CHECK(out.find(out.root)->kind == OpKind::Parameter);
  }
}

TEST_CASE("broadcast-folding composes chains and drops no-op broadcasts") {
  SUBCASE("broadcast of broadcast becomes one broadcast") {
    GraphBuilder b;
    int64_t c = b.constant(make_shape({}), {1.5});
    int64_t b1 = b.broadcast(c, {3}, {});
    Graph g = b.build(b.broadcast(b1, {2, 3}, {1}));
    auto [out, changed] = cat().apply(g, id_of("broadcast-folding"));
    CHECK(changed);
    const ir::Node* root = out.find(out.root);
    CHECK(root->kind == OpKind::Broadcast);
    CHECK(out.find(root->operands[0])->kind == OpKind::Constant);
    Tensor value = ir::evaluate(out, {});
    CHECK(value.data == std::vector<double>(6, 1.5));
  }
  SUBCASE("broadcast to the operand's own shape vanishes") {
    GraphBuilder b;
    int64_t p = b.parameter(make_shape({2, 3}));
    Graph g = b.build(b.broadcast(p, {2, 3}, {0, 1}));
    auto [out, changed] = cat().apply(g, id_of("broadcast-folding"));
    CHECK(changed);
    CHECK(out.find(out.root)->kind == OpKind::Parameter);
  }
}

TEST_CASE("algebraic-simplify rewrites x-x, x/x, max(x,x)") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2}));
  SUBCASE("subtract") {
    Graph g = b.build(b.binary(OpKind::Subtract, p, p));
    auto [out, changed] = cat().apply(g, id_of("algebraic-simplify"));
    CHECK(changed);
    CHECK(out.find(out.root)->attrs.literal == std::vector<double>{0, 0});
  }
  SUBCASE("divide") {
    Graph g = b.build(b.binary(OpKind::Divide, p, p));
    auto [out, changed] = cat().apply(g, id_of("algebraic-simplify"));
    CHECK(changed);
    CHECK(out.find(out.root)->attrs.literal == std::vector<double>{1, 1});
  }
  SUBCASE("maximum") {
    Graph g = b.build(b.binary(OpKind::Maximum, p, p));
    auto [out, changed] = cat().apply(g, id_of("algebraic-simplify"));
    CHECK(changed);
    CHECK(out.find(out.root)->kind == OpKind::Parameter);
  }
}

TEST_CASE("strength-reduce-div rewrites divide by a nonzero constant") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2}));
  int64_t c = b.constant(make_shape({2}), {2, 4});
  Graph g = b.build(b.binary(OpKind::Divide, p, c));
  auto [out, changed] = cat().apply(g, id_of("strength-reduce-div"));
  CHECK(changed);
  const ir::Node* root = out.find(out.root);
  CHECK(root->kind == OpKind::Multiply);
  CHECK(out.find(root->operands[1])->attrs.literal == std::vector<double>{0.5, 0.25});
  // op count grows by one until dce collects the dead divisor constant
  CHECK(ops(out) == ops(g) + 1);
}

TEST_CASE("strength-reduce-div leaves divides by zero-containing constants alone") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2}));
  int64_t c = b.constant(make_shape({2}), {2, 0});
  Graph g = b.build(b.binary(OpKind::Divide, p, c));
  auto [out, changed] = cat().apply(g, id_of("strength-reduce-div"));
  CHECK(!changed);
  CHECK(ir::structural_equal(g, out));
}

TEST_CASE("cse merges structurally identical nodes keeping the earliest") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2}));
  int64_t a1 = b.binary(OpKind::Add, p, p);
  int64_t a2 = b.binary(OpKind::Add, p, p);
  Graph g = b.build(b.binary(OpKind::Multiply, a1, a2));
  auto [out, changed] = cat().apply(g, id_of("cse"));
  CHECK(changed);
  const ir::Node* root = out.find(out.root);
  CHECK(root->operands[0] == root->operands[1]);
}

TEST_CASE("cse never merges distinct parameters") {
  GraphBuilder b;
  int64_t p = b.parameter(make_shape({2}));
  int64_t q = b.parameter(make_shape({2}));
  Graph g = b.build(b.binary(OpKind::Add, p, q));
  auto [out, changed] = cat().apply(g, id_of("cse"));
  CHECK(!changed);
  const ir::Node* root = out.find(out.root);
  CHECK(root->operands[0] != root->operands[1]);
}

TEST_CASE("unknown pass ids raise a catalog error") {
  Graph g = ir::parse_text("%0 = f32[2] parameter()\nROOT %0\n");
  CHECK_THROWS_AS(cat().apply(g, 99), ConfigError);
  CHECK_THROWS_AS(cat().apply(g, -1), ConfigError);
}

TEST_CASE("run_pipeline composes left to right") {
  GraphBuilder b;
  int64_t c1 = b.constant(make_shape({}), {2});
  int64_t c2 = b.constant(make_shape({}), {3});
  Graph g = b.build(b.binary(OpKind::Add, c1, c2));

  SUBCASE("empty sequence is the identity") {
    Graph out = passes::run_pipeline(g, {});
    CHECK(ir::structural_equal(g, out));
  }
  SUBCASE("constant-folding then dce leaves a single constant") {
    const PassId seq[] = {id_of("constant-folding"), id_of("dce")};
    Graph out = passes::run_pipeline(g, seq);
    CHECK(out.nodes.size() == 1);
    CHECK(out.nodes[0].kind == OpKind::Constant);
  }
}

TEST_CASE("pipeline composition agrees with stepwise application") {
  auto suite = bench::generate_suite(10, 10, 50, 2600);
  std::mt19937_64 rng = rl::make_rng(77, 0);
  for (const auto& bench : suite) {
    std::vector<PassId> seq;
    for (int i = 0; i < 6; ++i) {
      seq.push_back(static_cast<PassId>(rl::uniform_index(rng, cat().size())));
    }
    Graph composed = passes::run_pipeline(bench.graph, seq);
    Graph stepwise = bench.graph;
    for (PassId id : seq) stepwise = cat().apply(stepwise, id).first;
    CHECK(ops(composed) == ops(stepwise));
    CHECK(ir::structural_equal(composed, stepwise));
  }
}

TEST_CASE("default pipeline leaves already-minimal graphs unchanged") {
  Graph g = ir::parse_text("%0 = f32[2,2] parameter()\n%1 = f32[2,2] add(%0, %0)\nROOT %1\n");
  Graph out = passes::run_default_pipeline(g);
  CHECK(ir::structural_equal(g, out));
}

TEST_CASE("default pipeline reduces exp(log(x)) to the bare parameter") {
  Graph g = ir::parse_text(
      "%0 = f32[4] parameter()\n%1 = f32[4] log(%0)\n%2 = f32[4] exp(%1)\nROOT %2\n");
  Graph out = passes::run_default_pipeline(g);
  CHECK(ops(out) == 0);
  CHECK(out.find(out.root)->kind == OpKind::Parameter);
}

TEST_CASE("default pipeline never increases op count on 100 generated graphs") {
  auto suite = bench::generate_suite(100, 8, 80, 640000);
  for (const auto& bench : suite) {
    Graph out = passes::run_default_pipeline(bench.graph);
    CHECK(ops(out) <= ops(bench.graph));
  }
}

TEST_CASE("default pipeline is idempotent on generated graphs") {
  auto suite = bench::generate_suite(40, 8, 80, 888000);
  for (const auto& bench : suite) {
    Graph once = passes::run_default_pipeline(bench.graph);
    Graph twice = passes::run_default_pipeline(once);
    CHECK(ir::structural_equal(once, twice));
  }
}

TEST_CASE("apply_pass is deterministic and changed=false means structurally equal") {
  auto suite = bench::generate_suite(10, 8, 60, 4242);
  for (const auto& bench : suite) {
    for (PassId id = 0; id < cat().size(); ++id) {
      auto [a, changed_a] = cat().apply(bench.graph, id);
      auto [b, changed_b] = cat().apply(bench.graph, id);
      CHECK(changed_a == changed_b);
      CHECK(ir::structural_equal(a, b));
      if (!changed_a) CHECK(ir::structural_equal(bench.graph, a));
    }
  }
}

TEST_CASE("every pass preserves semantics on random bindings") {
  // Subset of the full acceptance sweep: 25 graphs x 12 passes x 3 bindings.
  auto suite = bench::generate_suite(25, 8, 60, 71000);
  std::mt19937_64 rng = rl::make_rng(5150, 0);
  int compared = 0;
  for (const auto& bench : suite) {
    for (PassId id = 0; id < cat().size(); ++id) {
      Graph rewritten = cat().apply(bench.graph, id).first;
      CHECK(ir::validate(rewritten).empty());
      for (int trial = 0; trial < 3; ++trial) {
        auto bindings = testsupport::random_bindings(bench.graph, rng);
        Tensor before = ir::evaluate(bench.graph, bindings);
        if (!testsupport::all_finite(before)) continue;
        Tensor after = ir::evaluate(rewritten, bindings);
        CHECK(testsupport::tensors_close(before, after, 1e-9));
        ++compared;
      }
    }
  }
  CHECK(compared > 500);  // the sweep must not be vacuous
}
