// SPDX-License-Identifier: Apache-2.0

#include "passgym/env.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "passgym/error.hpp"
#include "passgym/text.hpp"

namespace passgym::env {

PassEnv::PassEnv(EnvConfig config, const passes::Catalog& catalog)
    : config_(std::move(config)), catalog_(&catalog) {
  if (config_.horizon < 1) throw ConfigError("env horizon must be >= 1");
  if (!(config_.gamma > 0.0 && config_.gamma < 1.0)) {
    throw ConfigError("env gamma must lie in (0,1)");
  }
  if (config_.shaping.enabled && config_.shaping.gamma != config_.gamma) {
    throw ConfigError("shaping gamma must equal env gamma");
  }
  for (passes::PassId id : config_.action_subset) {
    if (id < 0 || id >= catalog_->size()) {
      throw ConfigError("action_subset references unknown pass id " + std::to_string(id));
    }
  }
  if (config_.shaping.scale && *config_.shaping.scale <= 0.0) {
    throw ConfigError("shaping scale must be positive");
  }
}

Observation PassEnv::reset(const ir::Graph& graph) {
  auto violations = ir::validate(graph);
  if (!violations.empty()) {
    throw DataError("reset: invalid graph: " + violations.front());
  }
  graph_ = graph;
  active_ = true;
  step_index_ = 0;
  cumulative_reward_ = 0.0;
  ir::CostAnalysis cost = ir::cost_analysis(graph_);
  initial_op_count_ = cost.op_count;
  initial_flop_count_ = cost.flop_count;
  shaping_scale_ = config_.shaping.scale
                       ? *config_.shaping.scale
                       : std::max<double>(1.0, static_cast<double>(initial_flop_count_));
  last_potential_ = potential(cost);
  return ir::observation(graph_);
}

double PassEnv::potential(const ir::CostAnalysis& cost) const {
  const ShapingConfig& s = config_.shaping;
  return (-s.flop_weight * static_cast<double>(cost.flop_count) -
          s.transcendental_weight * static_cast<double>(cost.transcendental_count)) /
         shaping_scale_;
}

StepResult PassEnv::step(int action) {
  if (!active_) throw DataError("step: reset has not been called");
  if (done()) throw DataError("step: episode is complete");
  if (action < 0 || action >= action_space_size()) {
    throw DataError("step: action " + std::to_string(action) + " out of range [0, " +
                    std::to_string(action_space_size()) + ")");
  }

  auto [next, changed] = catalog_->apply(graph_, action_to_pass(action));
  graph_ = std::move(next);
  ++step_index_;

  ir::CostAnalysis cost = ir::cost_analysis(graph_);
  const double base_reward = -static_cast<double>(cost.op_count) /
                             std::max<double>(1.0, static_cast<double>(initial_op_count_));

  StepResult result;
  result.info.op_count = cost.op_count;
  result.info.flop_count = cost.flop_count;
  result.info.transcendental_count = cost.transcendental_count;
  result.info.pass_changed = changed;
  result.info.step_index = step_index_;

  if (config_.shaping.enabled) {
    const double phi = potential(cost);
    result.reward = base_reward + config_.shaping.gamma * phi - last_potential_;
    result.info.phi = phi;
    result.info.base_reward = base_reward;
    last_potential_ = phi;
  } else {
    result.reward = base_reward;
  }

  cumulative_reward_ += result.reward;
  result.observation = ir::observation(graph_);
  result.done = step_index_ >= config_.horizon;
  return result;
}

std::string PassEnv::render() const {
  if (!active_) throw DataError("render: reset has not been called");
  std::ostringstream os;
  os << "# step=" << step_index_ << " op_count=" << ir::cost_analysis(graph_).op_count
     << " cumulative_reward=" << ir::format_double(cumulative_reward_) << '\n';
  os << ir::emit_text(graph_);
  return os.str();
}

int PassEnv::action_space_size() const {
  return config_.action_subset.empty() ? catalog_->size()
                                       : static_cast<int>(config_.action_subset.size());
}

ObservationSpace PassEnv::observation_space() {
  return ObservationSpace{ir::kObservationSize, 0.0, std::numeric_limits<double>::infinity()};
}

passes::PassId PassEnv::action_to_pass(int action) const {
  return config_.action_subset.empty() ? action
                                       : config_.action_subset[static_cast<size_t>(action)];
}

}  // namespace passgym::env
