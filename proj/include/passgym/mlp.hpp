// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_MLP_HPP
#define PASSGYM_MLP_HPP

#include <Eigen/Core>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

namespace passgym::rl {

// Multilayer perceptron with tanh hidden activations and a linear output
// layer. Gradients are hand-derived reverse mode; no autodiff dependency.
// All arithmetic is 64-bit.

struct MlpLayer {
  Eigen::MatrixXd w;  // [in x out]
  Eigen::VectorXd b;  // [out]
};

struct MlpParams {
  std::vector<MlpLayer> layers;

  int input_dim() const { return static_cast<int>(layers.front().w.rows()); }
  int output_dim() const { return static_cast<int>(layers.back().w.cols()); }

  // Glorot-uniform init; `final_scale` shrinks the last layer (policy heads
  // start near-uniform).
  static MlpParams create(int input_dim, const std::vector<int>& hidden_dims, int output_dim,
                          std::mt19937_64& rng, double final_scale = 1.0);
};

// acts[0] is the input batch; acts[i] is layer i's output (tanh applied on
// hidden layers, raw affine on the last).
struct MlpCache {
  std::vector<Eigen::MatrixXd> acts;
};

struct MlpGrads {
  std::vector<MlpLayer> layers;
  static MlpGrads zeros_like(const MlpParams& params);
  void accumulate(const MlpGrads& other, double factor = 1.0);
  void scale(double factor);
  bool finite() const;
};

// Rows of `input` are samples. Pass `cache` to enable backward.
Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& input,
                        MlpCache* cache = nullptr);

// Exact reverse-mode gradients of the forward map; gradients are summed over
// the batch (put any 1/N into `output_grad`). Optionally also returns the
// gradient w.r.t. the input batch.
MlpGrads backward(const MlpParams& params, const MlpCache& cache,
                  const Eigen::MatrixXd& output_grad, Eigen::MatrixXd* input_grad = nullptr);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<MlpLayer> m;
  std::vector<MlpLayer> v;
  long step_count = 0;
  AdamConfig hp;

  static AdamState create(const MlpParams& params, AdamConfig hp = {});
};

// Standard Adam with bias correction. Throws NumericError on non-finite
// gradients.
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state);

// Lossless JSON round-trip (layer arrays are row-major).
nlohmann::json mlp_to_json(const MlpParams& params);
MlpParams mlp_from_json(const nlohmann::json& j);
nlohmann::json adam_to_json(const AdamState& state);
AdamState adam_from_json(const nlohmann::json& j, const MlpParams& params);

// Standalone checkpoint file: {version, sizes, layers, optimizer_state,
// training_meta}. Write-then-read reproduces parameters exactly.
void save_mlp_checkpoint(const MlpParams& params, const AdamState& state,
                         const nlohmann::json& training_meta, const std::string& path);
struct MlpCheckpoint {
  MlpParams params;
  AdamState state;
  nlohmann::json meta;
};
MlpCheckpoint load_mlp_checkpoint(const std::string& path);

}  // namespace passgym::rl

#endif  // PASSGYM_MLP_HPP
