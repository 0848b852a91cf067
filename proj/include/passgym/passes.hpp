// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_PASSES_HPP
#define PASSGYM_PASSES_HPP

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "passgym/graph.hpp"

namespace passgym::passes {

// Index into the catalog. Stable across a process and across runs for the
// same catalog configuration.
using PassId = int;

struct PassInfo {
  PassId id;
  std::string name;
  std::string description;
};

// Registry of deterministic, semantics-preserving rewrite passes plus the
// fixed default pipeline used as the baseline ordering. Every pass applies
// its rewrite to a fixed point within one apply() call. Passes do not remove
// nodes that become dead (except dce itself); that is deliberate, it is what
// makes the ordering problem non-trivial.
class Catalog {
 public:
  static const Catalog& standard();

  int size() const { return static_cast<int>(entries_.size()); }
  const PassInfo& info(PassId id) const;
  PassId find(std::string_view name) const;  // -1 when absent

  // Returns the rewritten graph and whether it differs structurally.
  std::pair<ir::Graph, bool> apply(const ir::Graph& graph, PassId id) const;

  const std::vector<PassId>& default_pipeline() const { return default_pipeline_; }
  int default_pipeline_rounds() const { return default_pipeline_rounds_; }

  // Hash of the ordered pass name list; embedded in checkpoints so that
  // evaluation refuses to run a policy against a different action space.
  std::string fingerprint() const;

 private:
  struct Entry {
    PassInfo info;
    std::function<ir::Graph(const ir::Graph&)> run;
  };
  std::vector<Entry> entries_;
  std::vector<PassId> default_pipeline_;
  int default_pipeline_rounds_ = 3;
};

std::pair<ir::Graph, bool> apply_pass(const ir::Graph& graph, PassId id,
                                      const Catalog& catalog = Catalog::standard());

// Left-to-right composition of apply_pass.
ir::Graph run_pipeline(const ir::Graph& graph, std::span<const PassId> sequence,
                       const Catalog& catalog = Catalog::standard());

// Runs the default pipeline repeatedly (up to default_pipeline_rounds) until
// no pass reports a change.
ir::Graph run_default_pipeline(const ir::Graph& graph,
                               const Catalog& catalog = Catalog::standard());

}  // namespace passgym::passes

#endif  // PASSGYM_PASSES_HPP
