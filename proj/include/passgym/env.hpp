// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_ENV_HPP
#define PASSGYM_ENV_HPP

#include <array>
#include <optional>
#include <string>

#include "passgym/cost.hpp"
#include "passgym/graph.hpp"
#include "passgym/passes.hpp"

namespace passgym::env {

using Observation = std::array<double, ir::kObservationSize>;

// Potential-based shaping: the step reward becomes
//   r'(s,s') = r(s') + gamma * phi(s') - phi(s)
// with phi(s) = (-flop_weight * flop_count(s)
//                - transcendental_weight * transcendental_count(s)) / scale.
// `scale` unset means "auto": the episode's initial flop count, which keeps
// the shaping term commensurate with the op-count reward.
struct ShapingConfig {
  bool enabled = false;
  double gamma = 0.99;  // must equal EnvConfig::gamma
  double flop_weight = 1.0;
  double transcendental_weight = 2.0;
  std::optional<double> scale;
};

enum class RewardMode { ScaledOpCount };

struct EnvConfig {
  int horizon = 16;
  double gamma = 0.99;
  RewardMode reward_mode = RewardMode::ScaledOpCount;
  std::vector<passes::PassId> action_subset;  // empty = full catalog
  ShapingConfig shaping;
};

struct StepInfo {
  int64_t op_count = 0;
  int64_t flop_count = 0;
  int64_t transcendental_count = 0;
  bool pass_changed = false;
  int step_index = 0;
  // Present when shaping is enabled.
  std::optional<double> phi;
  std::optional<double> base_reward;
};

struct StepResult {
  Observation observation{};
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct ObservationSpace {
  int length;
  double low;
  double high;
};

// Gym-style episodic environment over graphs. Actions index the pass catalog
// (or the configured subset). Reward is the negative op count scaled by the
// episode's initial op count; episodes terminate only at the horizon.
//
// One instance is single-threaded; run independent instances for parallel
// collection.
class PassEnv {
 public:
  explicit PassEnv(EnvConfig config,
                   const passes::Catalog& catalog = passes::Catalog::standard());

  // Starts an episode on an unoptimized copy of `graph` and returns its
  // observation. Throws DataError when the graph fails validation.
  Observation reset(const ir::Graph& graph);

  // Applies the pass selected by `action`. Throws DataError on an
  // out-of-range action or when called on a finished episode.
  StepResult step(int action);

  // Header line (step, op count, cumulative reward) followed by the graph
  // text; the body parses back via parse_text.
  std::string render() const;

  int action_space_size() const;
  static ObservationSpace observation_space();
  passes::PassId action_to_pass(int action) const;

  const ir::Graph& graph() const { return graph_; }
  const EnvConfig& config() const { return config_; }
  const passes::Catalog& catalog() const { return *catalog_; }
  bool active() const { return active_; }
  bool done() const { return active_ && step_index_ >= config_.horizon; }
  int step_index() const { return step_index_; }
  int64_t initial_op_count() const { return initial_op_count_; }
  int64_t initial_flop_count() const { return initial_flop_count_; }
  double shaping_scale() const { return shaping_scale_; }
  double potential(const ir::CostAnalysis& cost) const;

 private:
  EnvConfig config_;
  const passes::Catalog* catalog_;
  ir::Graph graph_;
  bool active_ = false;
  int step_index_ = 0;
  int64_t initial_op_count_ = 0;
  int64_t initial_flop_count_ = 0;
  double cumulative_reward_ = 0.0;
  double shaping_scale_ = 1.0;
  double last_potential_ = 0.0;
};

}  // namespace passgym::env

#endif  // PASSGYM_ENV_HPP
