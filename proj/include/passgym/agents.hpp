// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_AGENTS_HPP
#define PASSGYM_AGENTS_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "passgym/buffers.hpp"
#include "passgym/dist.hpp"
#include "passgym/env.hpp"
#include "passgym/mlp.hpp"

namespace passgym::agents {

enum class ValueInputMode { ObsOnly, ObsPlusCostFeatures };

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_range = 0.2;
  bool clip_enabled = true;  // off only for the A2C-equivalence configuration
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double lr = 3e-4;
  int batch_size = 256;
  int n_epochs = 10;
  int n_steps = 2048;  // transitions per update, across all envs
  long total_steps = 50000;
  bool normalize_advantage = true;
  int n_envs = 8;
  std::vector<int> hidden_dims{256, 256};
  ValueInputMode value_input_mode = ValueInputMode::ObsOnly;
  env::ShapingConfig shaping;
};

struct DqnConfig {
  double lr = 3e-4;
  double gamma = 0.99;
  int batch_size = 256;
  size_t buffer_capacity = 1000000;
  long target_update_interval = 1000;
  // Linear epsilon-greedy decay over the first eps_decay_fraction of steps.
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_fraction = 0.2;
  long total_steps = 50000;
  std::vector<int> hidden_dims{256, 256};
};

struct A2cConfig {
  double lr = 3e-4;
  double gamma = 0.99;
  int n_steps = 8;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  long total_steps = 50000;
  std::vector<int> hidden_dims{256, 256};
};

// Environment material for training: each logical env stream samples episode
// graphs from `graphs` with its own seeded rng.
struct TrainSetup {
  std::vector<ir::Graph> graphs;
  env::EnvConfig env_config;
};

struct LogRecord {
  int update = 0;
  long steps = 0;
  double mean_episode_return = 0.0;
  double mean_final_opcount = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

struct UpdateDiagnostics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double total_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double first_minibatch_clip_fraction = 0.0;
};

struct TrainResult {
  rl::MlpParams policy;  // the Q network for DQN
  rl::MlpParams value;   // unused for DQN
  rl::AdamState policy_opt;
  rl::AdamState value_opt;
  std::vector<LogRecord> log;
  bool aborted = false;  // numeric failure; params are the last good snapshot
};

// Observations enter the networks scaled by the episode's initial op count
// (the environment itself keeps reporting raw counts).
Eigen::VectorXd normalize_observation(const env::Observation& obs, double initial_op_count);

// PPO: clipped-surrogate updates with per-update advantage normalization.
// Shaped rewards are used when config.shaping.enabled; with
// ValueInputMode::ObsPlusCostFeatures the value net consumes
// concat(observation, cost features) while the policy input is unchanged.
TrainResult ppo_train(const TrainSetup& setup, const PpoConfig& config, uint64_t seed,
                      int workers = 1);

UpdateDiagnostics ppo_update(rl::RolloutBuffer& buffer, rl::MlpParams& policy,
                             rl::MlpParams& value, rl::AdamState& policy_opt,
                             rl::AdamState& value_opt, const PpoConfig& config,
                             std::mt19937_64& rng);

TrainResult dqn_train(const TrainSetup& setup, const DqnConfig& config, uint64_t seed);

TrainResult a2c_train(const TrainSetup& setup, const A2cConfig& config, uint64_t seed);

// Full-batch policy gradients on raw advantages, no optimizer step. Two
// distinct formulas that coincide at the collection policy: the PPO
// probability-ratio surrogate and the plain -log pi * A estimator. Exposed
// so the equivalence can be checked directly.
rl::MlpGrads ppo_surrogate_policy_gradient(const rl::RolloutBuffer& buffer,
                                           const rl::MlpParams& policy, double clip_range,
                                           bool clip_enabled);
rl::MlpGrads a2c_policy_gradient(const rl::RolloutBuffer& buffer,
                                 const rl::MlpParams& policy);

// --- evaluation ----------------------------------------------------------

class ActionPolicy {
 public:
  virtual ~ActionPolicy() = default;
  virtual int select(const env::PassEnv& env, bool deterministic) = 0;
};

class NetworkPolicy : public ActionPolicy {
 public:
  explicit NetworkPolicy(rl::MlpParams params, uint64_t sample_seed = 0);
  int select(const env::PassEnv& env, bool deterministic) override;
  const rl::MlpParams& params() const { return params_; }

 private:
  rl::MlpParams params_;
  std::mt19937_64 rng_;
};

// Picks the action with the largest immediate op-count decrease, ties to the
// lowest action index.
class GreedyPolicy : public ActionPolicy {
 public:
  int select(const env::PassEnv& env, bool deterministic) override;
};

struct EpisodeResult {
  std::vector<int> actions;                // action indices taken
  std::vector<passes::PassId> sequence;    // catalog pass ids applied
  int64_t final_op_count = 0;
  double episode_return = 0.0;             // sum over t of gamma^t * r_t
};

// Runs one full episode; deterministic = argmax action selection.
EpisodeResult evaluate_policy(ActionPolicy& policy, env::PassEnv& env, const ir::Graph& graph,
                              bool deterministic);

EpisodeResult greedy_baseline(env::PassEnv& env, const ir::Graph& graph);

struct BruteForceResult {
  std::vector<int> actions;  // indices into the action subset
  int64_t final_op_count = 0;
};

// Exhaustive search over all |subset|^horizon sequences (ties resolve to the
// lexicographically smallest sequence). Throws DataError when the
// enumeration budget of 1e6 sequences would be exceeded.
BruteForceResult brute_force_optimal(const ir::Graph& graph,
                                     std::span<const passes::PassId> action_subset,
                                     int horizon,
                                     const passes::Catalog& catalog = passes::Catalog::standard());

// --- checkpoints ----------------------------------------------------------

struct AgentCheckpoint {
  std::string algo;  // "ppo" | "dqn" | "a2c"
  std::string catalog_fingerprint;
  int action_count = 0;
  ValueInputMode value_input_mode = ValueInputMode::ObsOnly;
  rl::MlpParams policy;
  rl::MlpParams value;  // empty for dqn
  rl::AdamState policy_opt;
  rl::AdamState value_opt;
  nlohmann::json meta;  // seed, steps, flags; never timestamps
};

void save_agent_checkpoint(const AgentCheckpoint& cp, const std::filesystem::path& path);
AgentCheckpoint load_agent_checkpoint(const std::filesystem::path& path);

nlohmann::json log_record_to_json(const LogRecord& rec);

}  // namespace passgym::agents

#endif  // PASSGYM_AGENTS_HPP
