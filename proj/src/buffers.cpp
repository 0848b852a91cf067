// SPDX-License-Identifier: Apache-2.0

#include "passgym/buffers.hpp"

#include "passgym/error.hpp"
#include "passgym/rng.hpp"

namespace passgym::rl {

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const uint8_t> dones, double last_value, double gamma,
                      double lambda) {
  const size_t n = rewards.size();
  if (n == 0 || values.size() != n || dones.size() != n) {
    throw DataError("compute_gae: inputs must be equal-length and non-empty");
  }
  GaeResult out;
  out.advantages.resize(n);
  out.returns.resize(n);
  double running = 0.0;
  for (size_t i = n; i-- > 0;) {
    const double not_done = dones[i] ? 0.0 : 1.0;
    const double next_value = (i + 1 < n) ? values[i + 1] : last_value;
    const double delta = rewards[i] + gamma * next_value * not_done - values[i];
    running = delta + gamma * lambda * not_done * running;
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
  }
  return out;
}

RolloutBuffer::RolloutBuffer(int n_envs, int steps_per_env, int obs_dim)
    : observations(n_envs * steps_per_env, obs_dim),
      cost_features(n_envs * steps_per_env, 2),
      time_fracs(static_cast<size_t>(n_envs * steps_per_env)),
      actions(static_cast<size_t>(n_envs * steps_per_env)),
      rewards(static_cast<size_t>(n_envs * steps_per_env)),
      dones(static_cast<size_t>(n_envs * steps_per_env)),
      log_probs(static_cast<size_t>(n_envs * steps_per_env)),
      values(static_cast<size_t>(n_envs * steps_per_env)),
      n_envs_(n_envs),
      steps_per_env_(steps_per_env) {}

void RolloutBuffer::put(int env, int step, const Eigen::VectorXd& obs, int action,
                        double reward, bool done, double log_prob, double value,
                        const std::array<double, 2>& cost, double time_frac) {
  const int i = index(env, step);
  observations.row(i) = obs.transpose();
  cost_features(i, 0) = cost[0];
  cost_features(i, 1) = cost[1];
  time_fracs[static_cast<size_t>(i)] = time_frac;
  actions[static_cast<size_t>(i)] = action;
  rewards[static_cast<size_t>(i)] = reward;
  dones[static_cast<size_t>(i)] = done ? 1 : 0;
  log_probs[static_cast<size_t>(i)] = log_prob;
  values[static_cast<size_t>(i)] = value;
}

void RolloutBuffer::compute_advantages(std::span<const double> last_values, double gamma,
                                       double lambda) {
  if (static_cast<int>(last_values.size()) != n_envs_) {
    throw DataError("compute_advantages: one bootstrap value per env required");
  }
  advantages.assign(static_cast<size_t>(capacity()), 0.0);
  returns.assign(static_cast<size_t>(capacity()), 0.0);
  for (int e = 0; e < n_envs_; ++e) {
    const size_t base = static_cast<size_t>(index(e, 0));
    const size_t len = static_cast<size_t>(steps_per_env_);
    GaeResult res = compute_gae({rewards.data() + base, len}, {values.data() + base, len},
                                {dones.data() + base, len}, last_values[static_cast<size_t>(e)],
                                gamma, lambda);
    std::copy(res.advantages.begin(), res.advantages.end(), advantages.begin() + base);
    std::copy(res.returns.begin(), res.returns.end(), returns.begin() + base);
  }
  advantages_ready = true;
}

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
  } else {
    storage_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

std::vector<size_t> ReplayBuffer::sample_indices(size_t n, std::mt19937_64& rng) const {
  if (storage_.empty()) throw DataError("replay buffer: cannot sample while empty");
  std::vector<size_t> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = static_cast<size_t>(uniform_index(rng, static_cast<int64_t>(storage_.size())));
  }
  return out;
}

}  // namespace passgym::rl
