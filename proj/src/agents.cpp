// SPDX-License-Identifier: Apache-2.0

#include "passgym/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include "passgym/cost.hpp"
#include "passgym/error.hpp"
#include "passgym/rng.hpp"

namespace passgym::agents {

using nlohmann::json;
using rl::MlpCache;
using rl::MlpGrads;
using rl::MlpParams;

namespace {

// Maps [0, n) across up to `workers` threads in contiguous chunks. Output
// slots are fixed per index, so results never depend on the thread count.
template <typename Fn>
void parallel_for(int n, int workers, Fn&& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

void shuffle_indices(std::vector<int>& indices, std::mt19937_64& rng) {
  for (size_t i = indices.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rl::uniform_index(rng, static_cast<int64_t>(i)));
    std::swap(indices[i - 1], indices[j]);
  }
}

std::array<double, 2> normalized_cost_features(const ir::CostAnalysis& cost,
                                               double initial_flop_count) {
  const double scale = std::max(1.0, initial_flop_count);
  return {static_cast<double>(cost.flop_count) / scale,
          static_cast<double>(cost.transcendental_count) / scale};
}

// The critic additionally sees the episode position (step/horizon): with a
// fixed horizon and a dense per-step reward, the value of a state depends
// strongly on the steps remaining, which the count observation cannot carry.
// The policy input stays observation-only.
Eigen::VectorXd value_input(const Eigen::VectorXd& obs, const std::array<double, 2>& cost,
                            double time_frac, ValueInputMode mode) {
  const bool with_cost = mode == ValueInputMode::ObsPlusCostFeatures;
  Eigen::VectorXd v(obs.size() + (with_cost ? 3 : 1));
  v.head(obs.size()) = obs;
  if (with_cost) {
    v(obs.size()) = cost[0];
    v(obs.size() + 1) = cost[1];
  }
  v(v.size() - 1) = time_frac;
  return v;
}

int value_input_dim(int obs_dim, ValueInputMode mode) {
  return obs_dim + (mode == ValueInputMode::ObsPlusCostFeatures ? 3 : 1);
}

// One logical environment stream used during collection. Owns its rng; picks
// a fresh episode graph whenever the previous episode finished.
struct EnvRunner {
  env::PassEnv env;
  std::mt19937_64 rng;
  const std::vector<ir::Graph>* graphs = nullptr;
  double episode_return = 0.0;
  double discount = 1.0;
  double gamma = 0.99;
  std::vector<double> finished_returns;
  std::vector<double> finished_opcounts;

  EnvRunner(const env::EnvConfig& cfg, const passes::Catalog& catalog, uint64_t seed,
            uint64_t stream, const std::vector<ir::Graph>& gs, double gamma_)
      : env(cfg, catalog), rng(rl::make_rng(seed, stream)), graphs(&gs), gamma(gamma_) {}

  void maybe_reset() {
    if (!env.active() || env.done()) {
      const auto pick = static_cast<size_t>(
          rl::uniform_index(rng, static_cast<int64_t>(graphs->size())));
      env.reset((*graphs)[pick]);
      episode_return = 0.0;
      discount = 1.0;
    }
  }

  void record_step(const env::StepResult& sr) {
    episode_return += discount * sr.reward;
    discount *= gamma;
    if (sr.done) {
      finished_returns.push_back(episode_return);
      finished_opcounts.push_back(static_cast<double>(sr.info.op_count));
    }
  }
};

double mean_or_zero(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Gradient of -mean(min(ratio*A, clip(ratio)*A)) w.r.t. the policy MLP, plus
// the matching diagnostics. Shared by the per-minibatch PPO update and the
// full-batch equivalence helper.
struct PolicyGradOut {
  MlpGrads grads;
  double policy_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

PolicyGradOut policy_gradient_on(const MlpParams& policy, const Eigen::MatrixXd& obs,
                                 std::span<const int> actions,
                                 std::span<const double> old_log_probs,
                                 std::span<const double> advantages, double clip_range,
                                 bool clip_enabled, double entropy_coef) {
  const int n = static_cast<int>(obs.rows());
  MlpCache cache;
  Eigen::MatrixXd logits = rl::forward(policy, obs, &cache);
  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());

  PolicyGradOut out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    rl::CategoricalDist dist{logits.row(i).transpose()};
    Eigen::VectorXd log_probs = dist.log_probs();
    Eigen::VectorXd probs = log_probs.array().exp().matrix();
    const int a = actions[static_cast<size_t>(i)];
    const double lp_new = log_probs(a);
    const double ratio = std::exp(lp_new - old_log_probs[static_cast<size_t>(i)]);
    const double adv = advantages[static_cast<size_t>(i)];

    double surrogate;
    bool ratio_grad_flows;
    if (clip_enabled) {
      const double clipped = std::clamp(ratio, 1.0 - clip_range, 1.0 + clip_range);
      const double u = ratio * adv;
      const double c = clipped * adv;
      surrogate = std::min(u, c);
      ratio_grad_flows = u <= c;
      if (std::abs(ratio - 1.0) > clip_range) out.clip_fraction += inv_n;
    } else {
      surrogate = ratio * adv;
      ratio_grad_flows = true;
    }
    out.policy_loss -= inv_n * surrogate;
    out.approx_kl += inv_n * (old_log_probs[static_cast<size_t>(i)] - lp_new);

    const double h = dist.entropy();
    out.entropy += inv_n * h;

    // d(-surrogate)/d lp_new = -adv * ratio when the unclipped branch is
    // active; the clipped branch is constant in the new policy.
    double d_lp = ratio_grad_flows ? -adv * ratio * inv_n : 0.0;
    for (Eigen::Index k = 0; k < probs.size(); ++k) {
      double g = d_lp * ((k == a ? 1.0 : 0.0) - probs(k));
      if (entropy_coef != 0.0) {
        // loss term is -entropy_coef * H
        g += entropy_coef * inv_n * probs(k) * (log_probs(k) + h);
      }
      dlogits(i, k) = g;
    }
  }
  out.grads = rl::backward(policy, cache, dlogits);
  return out;
}

struct ValueGradOut {
  MlpGrads grads;
  double value_loss = 0.0;
};

ValueGradOut value_gradient_on(const MlpParams& value, const Eigen::MatrixXd& inputs,
                               std::span<const double> targets, double value_coef) {
  const int n = static_cast<int>(inputs.rows());
  MlpCache cache;
  Eigen::MatrixXd pred = rl::forward(value, inputs, &cache);
  Eigen::MatrixXd dpred(pred.rows(), 1);
  ValueGradOut out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    const double err = pred(i, 0) - targets[static_cast<size_t>(i)];
    out.value_loss += inv_n * err * err;
    dpred(i, 0) = value_coef * 2.0 * inv_n * err;
  }
  out.grads = rl::backward(value, cache, dpred);
  return out;
}

}  // namespace

Eigen::VectorXd normalize_observation(const env::Observation& obs, double initial_op_count) {
  // Counts are scaled by a fixed constant plus a per-episode relative-size
  // feature baked into slot 0's companion below. A fixed scale keeps the
  // near-boolean rewrite-applicability patterns (e.g. "two negates exist")
  // linearly separable, which per-episode scaling destroys.
  (void)initial_op_count;
  Eigen::VectorXd v(static_cast<Eigen::Index>(obs.size()));
  for (size_t i = 0; i < obs.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = obs[i] * 0.1;
  }
  return v;
}

UpdateDiagnostics ppo_update(rl::RolloutBuffer& buffer, MlpParams& policy, MlpParams& value,
                             rl::AdamState& policy_opt, rl::AdamState& value_opt,
                             const PpoConfig& config, std::mt19937_64& rng) {
  const int n = buffer.capacity();
  if (n == 0) throw DataError("ppo_update: empty buffer");
  if (!buffer.advantages_ready) throw DataError("ppo_update: advantages not computed");

  // Per-update advantage normalization (mean 0, std 1).
  std::vector<double> advantages = buffer.advantages;
  if (config.normalize_advantage) {
    double mean = 0.0;
    for (double a : advantages) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    const double std = std::sqrt(var / static_cast<double>(n));
    for (double& a : advantages) a = (a - mean) / (std + 1e-8);
  }

  std::vector<int> indices(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) indices[static_cast<size_t>(i)] = i;

  UpdateDiagnostics diag;
  int minibatches = 0;
  bool first_minibatch = true;
  for (int epoch = 0; epoch < config.n_epochs; ++epoch) {
    shuffle_indices(indices, rng);
    for (int start = 0; start < n; start += config.batch_size) {
      const int b = std::min(config.batch_size, n - start);
      const int obs_cols = static_cast<int>(buffer.observations.cols());
      Eigen::MatrixXd obs(b, obs_cols);
      Eigen::MatrixXd vin(b, value_input_dim(obs_cols, config.value_input_mode));
      std::vector<int> acts(static_cast<size_t>(b));
      std::vector<double> old_lp(static_cast<size_t>(b));
      std::vector<double> adv(static_cast<size_t>(b));
      std::vector<double> ret(static_cast<size_t>(b));
      for (int i = 0; i < b; ++i) {
        const int src = indices[static_cast<size_t>(start + i)];
        obs.row(i) = buffer.observations.row(src);
        vin.row(i).head(obs_cols) = buffer.observations.row(src);
        if (config.value_input_mode == ValueInputMode::ObsPlusCostFeatures) {
          vin(i, obs_cols) = buffer.cost_features(src, 0);
          vin(i, obs_cols + 1) = buffer.cost_features(src, 1);
        }
        vin(i, vin.cols() - 1) = buffer.time_fracs[static_cast<size_t>(src)];
        acts[static_cast<size_t>(i)] = buffer.actions[static_cast<size_t>(src)];
        old_lp[static_cast<size_t>(i)] = buffer.log_probs[static_cast<size_t>(src)];
        adv[static_cast<size_t>(i)] = advantages[static_cast<size_t>(src)];
        ret[static_cast<size_t>(i)] = buffer.returns[static_cast<size_t>(src)];
      }

      PolicyGradOut pg = policy_gradient_on(policy, obs, acts, old_lp, adv, config.clip_range,
                                            config.clip_enabled, config.entropy_coef);
      ValueGradOut vg = value_gradient_on(value, vin, ret, config.value_coef);

      const double total =
          pg.policy_loss + config.value_coef * vg.value_loss - config.entropy_coef * pg.entropy;
      if (!std::isfinite(total)) throw NumericError("ppo_update: non-finite loss");

      rl::adam_step(policy, pg.grads, policy_opt);
      rl::adam_step(value, vg.grads, value_opt);

      diag.policy_loss += pg.policy_loss;
      diag.value_loss += vg.value_loss;
      diag.total_loss += total;
      diag.entropy += pg.entropy;
      diag.clip_fraction += pg.clip_fraction;
      diag.approx_kl += pg.approx_kl;
      if (first_minibatch) {
        diag.first_minibatch_clip_fraction = pg.clip_fraction;
        first_minibatch = false;
      }
      ++minibatches;
    }
  }
  const double inv = 1.0 / static_cast<double>(std::max(1, minibatches));
  diag.policy_loss *= inv;
  diag.value_loss *= inv;
  diag.total_loss *= inv;
  diag.entropy *= inv;
  diag.clip_fraction *= inv;
  diag.approx_kl *= inv;
  return diag;
}

TrainResult ppo_train(const TrainSetup& setup, const PpoConfig& config, uint64_t seed,
                      int workers) {
  if (setup.graphs.empty()) throw ConfigError("ppo_train: no training graphs");
  if (config.n_steps % config.n_envs != 0) {
    throw ConfigError("ppo_train: n_steps must be divisible by n_envs");
  }
  if (config.batch_size > config.n_steps) {
    throw ConfigError("ppo_train: batch_size must not exceed n_steps");
  }
  const int steps_per_env = config.n_steps / config.n_envs;
  const auto& catalog = passes::Catalog::standard();

  env::EnvConfig env_config = setup.env_config;
  env_config.shaping = config.shaping;
  env_config.shaping.gamma = env_config.gamma;

  std::mt19937_64 master = rl::make_rng(seed, 0);
  env::PassEnv probe(env_config, catalog);
  const int n_actions = probe.action_space_size();
  const int obs_dim = ir::kObservationSize;
  const int value_dim = value_input_dim(obs_dim, config.value_input_mode);

  MlpParams policy = MlpParams::create(obs_dim, config.hidden_dims, n_actions, master, 0.01);
  MlpParams value = MlpParams::create(value_dim, config.hidden_dims, 1, master);
  rl::AdamState policy_opt = rl::AdamState::create(policy, rl::AdamConfig{config.lr});
  rl::AdamState value_opt = rl::AdamState::create(value, rl::AdamConfig{config.lr});

  std::vector<EnvRunner> runners;
  runners.reserve(static_cast<size_t>(config.n_envs));
  for (int e = 0; e < config.n_envs; ++e) {
    runners.emplace_back(env_config, catalog, seed, static_cast<uint64_t>(e) + 1, setup.graphs,
                         config.gamma);
  }

  TrainResult result;
  rl::RolloutBuffer buffer(config.n_envs, steps_per_env, obs_dim);
  const long n_updates = std::max(1L, config.total_steps / config.n_steps);
  long steps_done = 0;

  for (long update = 0; update < n_updates; ++update) {
    std::vector<double> last_values(static_cast<size_t>(config.n_envs), 0.0);
    parallel_for(config.n_envs, workers, [&](int e) {
      EnvRunner& run = runners[static_cast<size_t>(e)];
      run.finished_returns.clear();
      run.finished_opcounts.clear();
      for (int t = 0; t < steps_per_env; ++t) {
        run.maybe_reset();
        const double init_ops = static_cast<double>(run.env.initial_op_count());
        const double init_flops = static_cast<double>(run.env.initial_flop_count());
        Eigen::VectorXd obs =
            normalize_observation(ir::observation(run.env.graph()), init_ops);
        auto cost = normalized_cost_features(ir::cost_analysis(run.env.graph()), init_flops);

        const double time_frac = static_cast<double>(run.env.step_index()) /
                                 static_cast<double>(run.env.config().horizon);
        rl::CategoricalDist dist{rl::forward(policy, obs.transpose()).row(0).transpose()};
        const int action = dist.sample(run.rng);
        const double log_prob = dist.log_prob(action);
        const double v = rl::forward(
            value, value_input(obs, cost, time_frac, config.value_input_mode).transpose())(0, 0);

        env::StepResult sr = run.env.step(action);
        run.record_step(sr);
        buffer.put(e, t, obs, action, sr.reward, sr.done, log_prob, v, cost, time_frac);
      }
      // Bootstrap value of the state each stream stopped in (unused when the
      // final transition ended its episode).
      const double init_ops = static_cast<double>(run.env.initial_op_count());
      const double init_flops = static_cast<double>(run.env.initial_flop_count());
      Eigen::VectorXd obs = normalize_observation(ir::observation(run.env.graph()), init_ops);
      auto cost = normalized_cost_features(ir::cost_analysis(run.env.graph()), init_flops);
      const double time_frac = static_cast<double>(run.env.step_index()) /
                               static_cast<double>(run.env.config().horizon);
      last_values[static_cast<size_t>(e)] = rl::forward(
          value, value_input(obs, cost, time_frac, config.value_input_mode).transpose())(0, 0);
    });
    steps_done += config.n_steps;

    buffer.compute_advantages(last_values, config.gamma, config.gae_lambda);

    MlpParams policy_snapshot = policy;
    MlpParams value_snapshot = value;
    rl::AdamState policy_opt_snapshot = policy_opt;
    rl::AdamState value_opt_snapshot = value_opt;
    UpdateDiagnostics diag;
    try {
      diag = ppo_update(buffer, policy, value, policy_opt, value_opt, config, master);
    } catch (const NumericError&) {
      result.policy = std::move(policy_snapshot);
      result.value = std::move(value_snapshot);
      result.policy_opt = std::move(policy_opt_snapshot);
      result.value_opt = std::move(value_opt_snapshot);
      result.aborted = true;
      return result;
    }

    std::vector<double> returns;
    std::vector<double> opcounts;
    for (const EnvRunner& run : runners) {
      returns.insert(returns.end(), run.finished_returns.begin(), run.finished_returns.end());
      opcounts.insert(opcounts.end(), run.finished_opcounts.begin(),
                      run.finished_opcounts.end());
    }
    result.log.push_back(LogRecord{static_cast<int>(update + 1), steps_done,
                                   mean_or_zero(returns), mean_or_zero(opcounts),
                                   diag.policy_loss, diag.value_loss, diag.clip_fraction,
                                   diag.approx_kl});
  }

  result.policy = std::move(policy);
  result.value = std::move(value);
  result.policy_opt = std::move(policy_opt);
  result.value_opt = std::move(value_opt);
  return result;
}

rl::MlpGrads ppo_surrogate_policy_gradient(const rl::RolloutBuffer& buffer,
                                           const MlpParams& policy, double clip_range,
                                           bool clip_enabled) {
  if (!buffer.advantages_ready) throw DataError("advantages not computed");
  return policy_gradient_on(policy, buffer.observations, buffer.actions, buffer.log_probs,
                            buffer.advantages, clip_range, clip_enabled, 0.0)
      .grads;
}

rl::MlpGrads a2c_policy_gradient(const rl::RolloutBuffer& buffer, const MlpParams& policy) {
  if (!buffer.advantages_ready) throw DataError("advantages not computed");
  const int n = buffer.capacity();
  MlpCache cache;
  Eigen::MatrixXd logits = rl::forward(policy, buffer.observations, &cache);
  Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    rl::CategoricalDist dist{logits.row(i).transpose()};
    Eigen::VectorXd probs = dist.probs();
    const int a = buffer.actions[static_cast<size_t>(i)];
    const double adv = buffer.advantages[static_cast<size_t>(i)];
    // loss = -mean(log pi(a|s) * A)
    const double d_lp = -adv * inv_n;
    for (Eigen::Index k = 0; k < probs.size(); ++k) {
      dlogits(i, k) = d_lp * ((k == a ? 1.0 : 0.0) - probs(k));
    }
  }
  return rl::backward(policy, cache, dlogits);
}

TrainResult a2c_train(const TrainSetup& setup, const A2cConfig& config, uint64_t seed) {
  if (setup.graphs.empty()) throw ConfigError("a2c_train: no training graphs");
  const auto& catalog = passes::Catalog::standard();
  env::EnvConfig env_config = setup.env_config;

  std::mt19937_64 master = rl::make_rng(seed, 0);
  env::PassEnv probe(env_config, catalog);
  const int n_actions = probe.action_space_size();
  const int obs_dim = ir::kObservationSize;

  MlpParams policy = MlpParams::create(obs_dim, config.hidden_dims, n_actions, master, 0.01);
  MlpParams value = MlpParams::create(obs_dim + 1, config.hidden_dims, 1, master);
  rl::AdamState policy_opt = rl::AdamState::create(policy, rl::AdamConfig{config.lr});
  rl::AdamState value_opt = rl::AdamState::create(value, rl::AdamConfig{config.lr});

  EnvRunner run(env_config, catalog, seed, 1, setup.graphs, config.gamma);
  rl::RolloutBuffer buffer(1, config.n_steps, obs_dim);
  auto value_inputs_of = [&](const rl::RolloutBuffer& buf) {
    Eigen::MatrixXd vin(buf.capacity(), obs_dim + 1);
    vin.leftCols(obs_dim) = buf.observations;
    for (int i = 0; i < buf.capacity(); ++i) {
      vin(i, obs_dim) = buf.time_fracs[static_cast<size_t>(i)];
    }
    return vin;
  };

  TrainResult result;
  const long n_updates = std::max(1L, config.total_steps / config.n_steps);
  const long log_every = std::max(1L, 2048L / config.n_steps);
  long steps_done = 0;
  double loss_acc = 0.0;
  double value_loss_acc = 0.0;
  long acc_count = 0;
  std::vector<double> returns;
  std::vector<double> opcounts;

  for (long update = 0; update < n_updates; ++update) {
    for (int t = 0; t < config.n_steps; ++t) {
      run.maybe_reset();
      const double init_ops = static_cast<double>(run.env.initial_op_count());
      const double init_flops = static_cast<double>(run.env.initial_flop_count());
      Eigen::VectorXd obs = normalize_observation(ir::observation(run.env.graph()), init_ops);
      auto cost = normalized_cost_features(ir::cost_analysis(run.env.graph()), init_flops);
      const double time_frac = static_cast<double>(run.env.step_index()) /
                               static_cast<double>(run.env.config().horizon);
      rl::CategoricalDist dist{rl::forward(policy, obs.transpose()).row(0).transpose()};
      const int action = dist.sample(run.rng);
      const double log_prob = dist.log_prob(action);
      Eigen::VectorXd vin(obs_dim + 1);
      vin.head(obs_dim) = obs;
      vin(obs_dim) = time_frac;
      const double v = rl::forward(value, vin.transpose())(0, 0);
      env::StepResult sr = run.env.step(action);
      run.record_step(sr);
      buffer.put(0, t, obs, action, sr.reward, sr.done, log_prob, v, cost, time_frac);
    }
    const double init_ops = static_cast<double>(run.env.initial_op_count());
    Eigen::VectorXd obs = normalize_observation(ir::observation(run.env.graph()), init_ops);
    Eigen::VectorXd last_vin(obs_dim + 1);
    last_vin.head(obs_dim) = obs;
    last_vin(obs_dim) = static_cast<double>(run.env.step_index()) /
                        static_cast<double>(run.env.config().horizon);
    const double last_value = rl::forward(value, last_vin.transpose())(0, 0);
    // lambda = 1: advantage is the n-step bootstrapped return minus V(s).
    buffer.compute_advantages(std::array<double, 1>{last_value}, config.gamma, 1.0);
    steps_done += config.n_steps;

    MlpGrads pg = a2c_policy_gradient(buffer, policy);
    ValueGradOut vg = value_gradient_on(value, value_inputs_of(buffer), buffer.returns,
                                        config.value_coef);
    if (!pg.finite() || !std::isfinite(vg.value_loss)) {
      result.aborted = true;
      break;
    }
    rl::adam_step(policy, pg, policy_opt);
    rl::adam_step(value, vg.grads, value_opt);

    double policy_loss = 0.0;
    for (int i = 0; i < buffer.capacity(); ++i) {
      policy_loss -= buffer.advantages[static_cast<size_t>(i)] *
                     buffer.log_probs[static_cast<size_t>(i)] /
                     static_cast<double>(buffer.capacity());
    }
    loss_acc += policy_loss;
    value_loss_acc += vg.value_loss;
    ++acc_count;
    returns.insert(returns.end(), run.finished_returns.begin(), run.finished_returns.end());
    opcounts.insert(opcounts.end(), run.finished_opcounts.begin(), run.finished_opcounts.end());
    run.finished_returns.clear();
    run.finished_opcounts.clear();

    if ((update + 1) % log_every == 0 || update + 1 == n_updates) {
      result.log.push_back(LogRecord{
          static_cast<int>(update + 1), steps_done, mean_or_zero(returns),
          mean_or_zero(opcounts), loss_acc / static_cast<double>(std::max(1L, acc_count)),
          value_loss_acc / static_cast<double>(std::max(1L, acc_count)), 0.0, 0.0});
      returns.clear();
      opcounts.clear();
      loss_acc = value_loss_acc = 0.0;
      acc_count = 0;
    }
  }

  result.policy = std::move(policy);
  result.value = std::move(value);
  result.policy_opt = std::move(policy_opt);
  result.value_opt = std::move(value_opt);
  return result;
}

TrainResult dqn_train(const TrainSetup& setup, const DqnConfig& config, uint64_t seed) {
  if (setup.graphs.empty()) throw ConfigError("dqn_train: no training graphs");
  const auto& catalog = passes::Catalog::standard();
  env::EnvConfig env_config = setup.env_config;

  std::mt19937_64 master = rl::make_rng(seed, 0);
  env::PassEnv probe(env_config, catalog);
  const int n_actions = probe.action_space_size();
  const int obs_dim = ir::kObservationSize;

  MlpParams q = MlpParams::create(obs_dim, config.hidden_dims, n_actions, master);
  MlpParams target = q;
  rl::AdamState opt = rl::AdamState::create(q, rl::AdamConfig{config.lr});

  EnvRunner run(env_config, catalog, seed, 1, setup.graphs, config.gamma);
  rl::ReplayBuffer buffer(config.buffer_capacity);

  TrainResult result;
  MlpParams snapshot = q;
  rl::AdamState snapshot_opt = opt;

  const long log_every = 2048;
  double loss_acc = 0.0;
  long loss_count = 0;
  std::vector<double> returns;
  std::vector<double> opcounts;
  int log_index = 0;

  const double decay_steps =
      std::max(1.0, config.eps_decay_fraction * static_cast<double>(config.total_steps));

  for (long t = 0; t < config.total_steps; ++t) {
    run.maybe_reset();
    const double init_ops = static_cast<double>(run.env.initial_op_count());
    const double init_flops = static_cast<double>(run.env.initial_flop_count());
    Eigen::VectorXd obs = normalize_observation(ir::observation(run.env.graph()), init_ops);
    auto cost = normalized_cost_features(ir::cost_analysis(run.env.graph()), init_flops);

    const double frac = std::min(1.0, static_cast<double>(t) / decay_steps);
    const double eps = config.eps_start + frac * (config.eps_end - config.eps_start);
    int action;
    if (rl::uniform01(run.rng) < eps) {
      action = static_cast<int>(rl::uniform_index(run.rng, n_actions));
    } else {
      rl::CategoricalDist dist{rl::forward(q, obs.transpose()).row(0).transpose()};
      action = dist.argmax();
    }

    env::StepResult sr = run.env.step(action);
    run.record_step(sr);
    Eigen::VectorXd next_obs = normalize_observation(sr.observation, init_ops);

    rl::Transition tr;
    tr.observation = obs;
    tr.action = action;
    tr.reward = sr.reward;
    tr.next_observation = next_obs;
    tr.done = sr.done;
    tr.cost_features = cost;
    buffer.push(std::move(tr));

    // Warmup: no update until one full batch is available.
    if (buffer.size() >= static_cast<size_t>(config.batch_size)) {
      auto idx = buffer.sample_indices(static_cast<size_t>(config.batch_size), master);
      const int b = config.batch_size;
      Eigen::MatrixXd s(b, obs_dim), s2(b, obs_dim);
      for (int i = 0; i < b; ++i) {
        s.row(i) = buffer.at(idx[static_cast<size_t>(i)]).observation.transpose();
        s2.row(i) = buffer.at(idx[static_cast<size_t>(i)]).next_observation.transpose();
      }
      Eigen::MatrixXd q_next = rl::forward(target, s2);
      MlpCache cache;
      Eigen::MatrixXd q_pred = rl::forward(q, s, &cache);
      Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(b, n_actions);
      double loss = 0.0;
      for (int i = 0; i < b; ++i) {
        const rl::Transition& smp = buffer.at(idx[static_cast<size_t>(i)]);
        const double best_next = q_next.row(i).maxCoeff();
        const double y =
            smp.reward + config.gamma * (smp.done ? 0.0 : 1.0) * best_next;
        const double err = q_pred(i, smp.action) - y;
        loss += err * err / static_cast<double>(b);
        dq(i, smp.action) = 2.0 * err / static_cast<double>(b);
      }
      if (!std::isfinite(loss)) {
        result.aborted = true;
        q = snapshot;
        opt = snapshot_opt;
        break;
      }
      MlpGrads grads = rl::backward(q, cache, dq);
      rl::adam_step(q, grads, opt);
      loss_acc += loss;
      ++loss_count;
    }

    if ((t + 1) % config.target_update_interval == 0) target = q;

    if ((t + 1) % log_every == 0 || t + 1 == config.total_steps) {
      returns.insert(returns.end(), run.finished_returns.begin(), run.finished_returns.end());
      opcounts.insert(opcounts.end(), run.finished_opcounts.begin(),
                      run.finished_opcounts.end());
      run.finished_returns.clear();
      run.finished_opcounts.clear();
      result.log.push_back(LogRecord{
          ++log_index, t + 1, mean_or_zero(returns), mean_or_zero(opcounts), 0.0,
          loss_count ? loss_acc / static_cast<double>(loss_count) : 0.0, 0.0, 0.0});
      returns.clear();
      opcounts.clear();
      loss_acc = 0.0;
      loss_count = 0;
      snapshot = q;
      snapshot_opt = opt;
    }
  }

  result.policy = std::move(q);
  result.policy_opt = std::move(opt);
  return result;
}

NetworkPolicy::NetworkPolicy(MlpParams params, uint64_t sample_seed)
    : params_(std::move(params)), rng_(rl::make_rng(sample_seed, 97)) {}

int NetworkPolicy::select(const env::PassEnv& env, bool deterministic) {
  Eigen::VectorXd obs = normalize_observation(
      ir::observation(env.graph()), static_cast<double>(env.initial_op_count()));
  rl::CategoricalDist dist{rl::forward(params_, obs.transpose()).row(0).transpose()};
  return deterministic ? dist.argmax() : dist.sample(rng_);
}

int GreedyPolicy::select(const env::PassEnv& env, bool /*deterministic*/) {
  int best_action = 0;
  int64_t best_count = std::numeric_limits<int64_t>::max();
  for (int a = 0; a < env.action_space_size(); ++a) {
    auto [g, changed] = env.catalog().apply(env.graph(), env.action_to_pass(a));
    const int64_t count = ir::cost_analysis(g).op_count;
    if (count < best_count) {
      best_count = count;
      best_action = a;
    }
  }
  return best_action;
}

EpisodeResult evaluate_policy(ActionPolicy& policy, env::PassEnv& env, const ir::Graph& graph,
                              bool deterministic) {
  env.reset(graph);
  EpisodeResult result;
  double discount = 1.0;
  int64_t final_ops = env.initial_op_count();
  while (!env.done()) {
    const int action = policy.select(env, deterministic);
    env::StepResult sr = env.step(action);
    result.actions.push_back(action);
    result.sequence.push_back(env.action_to_pass(action));
    result.episode_return += discount * sr.reward;
    discount *= env.config().gamma;
    final_ops = sr.info.op_count;
  }
  result.final_op_count = final_ops;
  return result;
}

EpisodeResult greedy_baseline(env::PassEnv& env, const ir::Graph& graph) {
  GreedyPolicy greedy;
  return evaluate_policy(greedy, env, graph, true);
}

namespace {

void brute_force_recurse(const ir::Graph& graph,
                         std::span<const passes::PassId> subset, int depth_left,
                         const passes::Catalog& catalog, std::vector<int>& prefix,
                         BruteForceResult& best, bool& have_best) {
  if (depth_left == 0) {
    const int64_t count = ir::cost_analysis(graph).op_count;
    if (!have_best || count < best.final_op_count) {
      best.final_op_count = count;
      best.actions = prefix;
      have_best = true;
    }
    return;
  }
  for (size_t i = 0; i < subset.size(); ++i) {
    prefix.push_back(static_cast<int>(i));
    ir::Graph next = catalog.apply(graph, subset[i]).first;
    brute_force_recurse(next, subset, depth_left - 1, catalog, prefix, best, have_best);
    prefix.pop_back();
  }
}

}  // namespace

BruteForceResult brute_force_optimal(const ir::Graph& graph,
                                     std::span<const passes::PassId> action_subset,
                                     int horizon, const passes::Catalog& catalog) {
  if (horizon < 0) throw DataError("brute_force_optimal: negative horizon");
  double budget = 1.0;
  for (int i = 0; i < horizon; ++i) budget *= static_cast<double>(action_subset.size());
  if (budget > 1e6) throw DataError("brute_force_optimal: enumeration budget exceeded");

  BruteForceResult best;
  best.final_op_count = ir::cost_analysis(graph).op_count;
  if (horizon == 0 || action_subset.empty()) return best;

  bool have_best = false;
  std::vector<int> prefix;
  brute_force_recurse(graph, action_subset, horizon, catalog, prefix, best, have_best);
  return best;
}

namespace {

std::string value_input_mode_name(ValueInputMode mode) {
  return mode == ValueInputMode::ObsOnly ? "obs_only" : "obs_plus_cost_features";
}

ValueInputMode value_input_mode_from(const std::string& name) {
  if (name == "obs_only") return ValueInputMode::ObsOnly;
  if (name == "obs_plus_cost_features") return ValueInputMode::ObsPlusCostFeatures;
  throw DataError("unknown value_input_mode: " + name);
}

}  // namespace

void save_agent_checkpoint(const AgentCheckpoint& cp, const std::filesystem::path& path) {
  json j;
  j["version"] = 1;
  j["algo"] = cp.algo;
  j["catalog_fingerprint"] = cp.catalog_fingerprint;
  j["action_count"] = cp.action_count;
  j["obs_dim"] = ir::kObservationSize;
  j["value_input_mode"] = value_input_mode_name(cp.value_input_mode);
  j["policy"] = rl::mlp_to_json(cp.policy);
  j["optimizer_state"] = json::object();
  j["optimizer_state"]["policy"] = rl::adam_to_json(cp.policy_opt);
  if (!cp.value.layers.empty()) {
    j["value"] = rl::mlp_to_json(cp.value);
    j["optimizer_state"]["value"] = rl::adam_to_json(cp.value_opt);
  }
  j["training_meta"] = cp.meta;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("checkpoint write failed: " + path.string());
}

AgentCheckpoint load_agent_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  json j = json::parse(in, nullptr, true, true);
  if (j.at("version") != 1) throw DataError("unsupported checkpoint version");
  AgentCheckpoint cp;
  cp.algo = j.at("algo");
  cp.catalog_fingerprint = j.at("catalog_fingerprint");
  cp.action_count = j.at("action_count");
  cp.value_input_mode = value_input_mode_from(j.at("value_input_mode"));
  cp.policy = rl::mlp_from_json(j.at("policy"));
  cp.policy_opt = rl::adam_from_json(j.at("optimizer_state").at("policy"), cp.policy);
  if (j.contains("value")) {
    cp.value = rl::mlp_from_json(j.at("value"));
    cp.value_opt = rl::adam_from_json(j.at("optimizer_state").at("value"), cp.value);
  }
  cp.meta = j.value("training_meta", json::object());
  return cp;
}

json log_record_to_json(const LogRecord& rec) {
  return json{{"update", rec.update},
              {"steps", rec.steps},
              {"mean_episode_return", rec.mean_episode_return},
              {"mean_final_opcount", rec.mean_final_opcount},
              {"policy_loss", rec.policy_loss},
              {"value_loss", rec.value_loss},
              {"clip_fraction", rec.clip_fraction},
              {"approx_kl", rec.approx_kl}};
}

}  // namespace passgym::agents
