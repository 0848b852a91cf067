// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_BUFFERS_HPP
#define PASSGYM_BUFFERS_HPP

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace passgym::rl {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Generalized advantage estimation over one trajectory segment:
//   delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// with V_{T} = last_value; returns are advantages + values.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const uint8_t> dones, double last_value, double gamma,
                      double lambda);

// One environment transition as the agents consume it: observations are
// already normalized for network input, cost_features carries the info
// dictionary's (flop_count, transcendental_count) scaled per episode.
struct Transition {
  Eigen::VectorXd observation;
  int action = 0;
  double reward = 0.0;
  Eigen::VectorXd next_observation;
  bool done = false;
  double log_prob = 0.0;        // on-policy only
  double value_estimate = 0.0;  // on-policy only
  std::array<double, 2> cost_features{};
};

// Fixed-capacity on-policy storage laid out as n_envs contiguous segments of
// steps_per_env transitions. Cleared each update.
class RolloutBuffer {
 public:
  RolloutBuffer(int n_envs, int steps_per_env, int obs_dim);

  int n_envs() const { return n_envs_; }
  int steps_per_env() const { return steps_per_env_; }
  int capacity() const { return n_envs_ * steps_per_env_; }
  int index(int env, int step) const { return env * steps_per_env_ + step; }

  void put(int env, int step, const Eigen::VectorXd& obs, int action, double reward,
           bool done, double log_prob, double value, const std::array<double, 2>& cost,
           double time_frac);

  // Computes GAE per environment segment; `last_values[e]` bootstraps the
  // value beyond segment e's final transition.
  void compute_advantages(std::span<const double> last_values, double gamma, double lambda);

  Eigen::MatrixXd observations;  // [capacity x obs_dim]
  Eigen::MatrixXd cost_features;  // [capacity x 2]
  std::vector<double> time_fracs;  // episode position / horizon, for the critic
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<uint8_t> dones;
  std::vector<double> log_probs;
  std::vector<double> values;
  std::vector<double> advantages;
  std::vector<double> returns;
  bool advantages_ready = false;

 private:
  int n_envs_;
  int steps_per_env_;
};

// Uniform-sampling ring buffer for off-policy training. Memory grows with
// insertions up to capacity, then the oldest entries are overwritten.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  void push(Transition t);
  size_t size() const { return storage_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& at(size_t i) const { return storage_[i]; }

  // `n` independent uniform draws over the valid range (with replacement).
  std::vector<size_t> sample_indices(size_t n, std::mt19937_64& rng) const;

 private:
  size_t capacity_;
  size_t head_ = 0;
  std::vector<Transition> storage_;
};

}  // namespace passgym::rl

#endif  // PASSGYM_BUFFERS_HPP
