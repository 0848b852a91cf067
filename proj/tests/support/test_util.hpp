// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_TESTS_SUPPORT_TEST_UTIL_HPP
#define PASSGYM_TESTS_SUPPORT_TEST_UTIL_HPP

#include <cmath>
#include <random>

#include "passgym/graph.hpp"
#include "passgym/interp.hpp"
#include "passgym/rng.hpp"

namespace passgym::testsupport {

// Uniform random bindings for every parameter of a graph.
inline ir::Bindings random_bindings(const ir::Graph& graph, std::mt19937_64& rng,
                                    double lo = -2.0, double hi = 2.0) {
  ir::Bindings bindings;
  for (const ir::Node& node : graph.nodes) {
    if (node.kind != ir::OpKind::Parameter) continue;
    ir::Tensor t = ir::Tensor::zeros(node.shape);
    for (double& v : t.data) v = rl::uniform_real(rng, lo, hi);
    bindings.emplace(node.id, std::move(t));
  }
  return bindings;
}

inline bool all_finite(const ir::Tensor& t) {
  for (double v : t.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// |a-b| <= tol * max(1, |a|, |b|) elementwise.
inline bool tensors_close(const ir::Tensor& a, const ir::Tensor& b, double tol) {
  if (!(a.shape == b.shape) || a.data.size() != b.data.size()) return false;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double scale = std::max({1.0, std::abs(a.data[i]), std::abs(b.data[i])});
    if (std::abs(a.data[i] - b.data[i]) > tol * scale) return false;
  }
  return true;
}

}  // namespace passgym::testsupport

#endif  // PASSGYM_TESTS_SUPPORT_TEST_UTIL_HPP
