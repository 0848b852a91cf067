// SPDX-License-Identifier: Apache-2.0

#include "passgym/mlp.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "passgym/error.hpp"
#include "passgym/rng.hpp"

namespace passgym::rl {

using nlohmann::json;

MlpParams MlpParams::create(int input_dim, const std::vector<int>& hidden_dims, int output_dim,
                            std::mt19937_64& rng, double final_scale) {
  std::vector<int> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(output_dim);

  MlpParams params;
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    const int in = dims[i];
    const int out = dims[i + 1];
    const bool last = i + 2 == dims.size();
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out)) *
                         (last ? final_scale : 1.0);
    MlpLayer layer;
    layer.w.resize(in, out);
    for (int r = 0; r < in; ++r) {
      for (int c = 0; c < out; ++c) {
        layer.w(r, c) = uniform_real(rng, -limit, limit);
      }
    }
    layer.b = Eigen::VectorXd::Zero(out);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& params) {
  MlpGrads grads;
  for (const MlpLayer& layer : params.layers) {
    grads.layers.push_back(MlpLayer{Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()),
                                    Eigen::VectorXd::Zero(layer.b.size())});
  }
  return grads;
}

void MlpGrads::accumulate(const MlpGrads& other, double factor) {
  for (size_t i = 0; i < layers.size(); ++i) {
    layers[i].w += factor * other.layers[i].w;
    layers[i].b += factor * other.layers[i].b;
  }
}

void MlpGrads::scale(double factor) {
  for (MlpLayer& layer : layers) {
    layer.w *= factor;
    layer.b *= factor;
  }
}

bool MlpGrads::finite() const {
  for (const MlpLayer& layer : layers) {
    if (!layer.w.allFinite() || !layer.b.allFinite()) return false;
  }
  return true;
}

Eigen::MatrixXd forward(const MlpParams& params, const Eigen::MatrixXd& input,
                        MlpCache* cache) {
  if (input.cols() != params.input_dim()) {
    throw DataError("mlp forward: input has " + std::to_string(input.cols()) +
                    " features, expected " + std::to_string(params.input_dim()));
  }
  if (cache) {
    cache->acts.clear();
    cache->acts.push_back(input);
  }
  Eigen::MatrixXd a = input;
  for (size_t i = 0; i < params.layers.size(); ++i) {
    const MlpLayer& layer = params.layers[i];
    Eigen::MatrixXd z = (a * layer.w).rowwise() + layer.b.transpose();
    if (i + 1 < params.layers.size()) {
      a = z.array().tanh().matrix();
    } else {
      a = std::move(z);
    }
    if (cache) cache->acts.push_back(a);
  }
  return a;
}

MlpGrads backward(const MlpParams& params, const MlpCache& cache,
                  const Eigen::MatrixXd& output_grad, Eigen::MatrixXd* input_grad) {
  const size_t n_layers = params.layers.size();
  if (cache.acts.size() != n_layers + 1) {
    throw DataError("mlp backward: cache does not match a forward call");
  }
  if (output_grad.rows() != cache.acts.back().rows() ||
      output_grad.cols() != cache.acts.back().cols()) {
    throw DataError("mlp backward: output gradient shape mismatch");
  }

  MlpGrads grads = MlpGrads::zeros_like(params);
  Eigen::MatrixXd delta = output_grad;  // d loss / d z for the current layer
  for (size_t i = n_layers; i-- > 0;) {
    const Eigen::MatrixXd& a_prev = cache.acts[i];
    grads.layers[i].w = a_prev.transpose() * delta;
    grads.layers[i].b = delta.colwise().sum().transpose();
    if (i > 0 || input_grad) {
      Eigen::MatrixXd d_prev = delta * params.layers[i].w.transpose();
      if (i > 0) {
        // Hidden activations are tanh; cache stores the post-activation value.
        const Eigen::MatrixXd& a = cache.acts[i];
        delta = (d_prev.array() * (1.0 - a.array().square())).matrix();
      } else if (input_grad) {
        *input_grad = std::move(d_prev);
      }
    }
  }
  return grads;
}

AdamState AdamState::create(const MlpParams& params, AdamConfig hp) {
  AdamState state;
  state.hp = hp;
  for (const MlpLayer& layer : params.layers) {
    state.m.push_back(MlpLayer{Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()),
                               Eigen::VectorXd::Zero(layer.b.size())});
    state.v.push_back(MlpLayer{Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()),
                               Eigen::VectorXd::Zero(layer.b.size())});
  }
  return state;
}

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state) {
  if (grads.layers.size() != params.layers.size()) {
    throw DataError("adam_step: gradient/parameter layer count mismatch");
  }
  if (!grads.finite()) throw NumericError("adam_step: non-finite gradient");

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.hp.beta1, t);
  const double c2 = 1.0 - std::pow(state.hp.beta2, t);

  for (size_t i = 0; i < params.layers.size(); ++i) {
    const auto& gw = grads.layers[i].w;
    const auto& gb = grads.layers[i].b;
    if (gw.rows() != params.layers[i].w.rows() || gw.cols() != params.layers[i].w.cols() ||
        gb.size() != params.layers[i].b.size()) {
      throw DataError("adam_step: gradient shape mismatch at layer " + std::to_string(i));
    }
    auto& mw = state.m[i].w;
    auto& vw = state.v[i].w;
    mw = state.hp.beta1 * mw + (1.0 - state.hp.beta1) * gw;
    vw = state.hp.beta2 * vw.array().matrix() +
         (1.0 - state.hp.beta2) * gw.array().square().matrix();
    params.layers[i].w.array() -=
        state.hp.lr * (mw.array() / c1) / ((vw.array() / c2).sqrt() + state.hp.eps);

    auto& mb = state.m[i].b;
    auto& vb = state.v[i].b;
    mb = state.hp.beta1 * mb + (1.0 - state.hp.beta1) * gb;
    vb = state.hp.beta2 * vb.array().matrix() +
         (1.0 - state.hp.beta2) * gb.array().square().matrix();
    params.layers[i].b.array() -=
        state.hp.lr * (mb.array() / c1) / ((vb.array() / c2).sqrt() + state.hp.eps);
  }
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.size();
  const auto cols = rows ? j.at(0).size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r),
                                        static_cast<Eigen::Index>(c)) = j.at(r).at(c);
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i);
  return v;
}

}  // namespace

json mlp_to_json(const MlpParams& params) {
  json sizes = json::array();
  sizes.push_back(params.input_dim());
  for (size_t i = 0; i + 1 < params.layers.size(); ++i) {
    sizes.push_back(params.layers[i].w.cols());
  }
  sizes.push_back(params.output_dim());

  json layers = json::array();
  for (const MlpLayer& layer : params.layers) {
    layers.push_back(json{{"w", matrix_to_json(layer.w)}, {"b", vector_to_json(layer.b)}});
  }
  return json{{"sizes", sizes}, {"layers", layers}};
}

MlpParams mlp_from_json(const json& j) {
  MlpParams params;
  for (const json& layer : j.at("layers")) {
    params.layers.push_back(
        MlpLayer{matrix_from_json(layer.at("w")), vector_from_json(layer.at("b"))});
  }
  if (params.layers.empty()) throw DataError("mlp_from_json: no layers");
  return params;
}

json adam_to_json(const AdamState& state) {
  json m = json::array();
  json v = json::array();
  for (size_t i = 0; i < state.m.size(); ++i) {
    m.push_back(json{{"w", matrix_to_json(state.m[i].w)}, {"b", vector_to_json(state.m[i].b)}});
    v.push_back(json{{"w", matrix_to_json(state.v[i].w)}, {"b", vector_to_json(state.v[i].b)}});
  }
  return json{{"m", m},
              {"v", v},
              {"step_count", state.step_count},
              {"hp",
               {{"lr", state.hp.lr},
                {"beta1", state.hp.beta1},
                {"beta2", state.hp.beta2},
                {"eps", state.hp.eps}}}};
}

AdamState adam_from_json(const json& j, const MlpParams& params) {
  AdamState state = AdamState::create(params);
  state.step_count = j.at("step_count");
  state.hp.lr = j.at("hp").at("lr");
  state.hp.beta1 = j.at("hp").at("beta1");
  state.hp.beta2 = j.at("hp").at("beta2");
  state.hp.eps = j.at("hp").at("eps");
  for (size_t i = 0; i < state.m.size(); ++i) {
    state.m[i].w = matrix_from_json(j.at("m").at(i).at("w"));
    state.m[i].b = vector_from_json(j.at("m").at(i).at("b"));
    state.v[i].w = matrix_from_json(j.at("v").at(i).at("w"));
    state.v[i].b = vector_from_json(j.at("v").at(i).at("b"));
  }
  return state;
}

void save_mlp_checkpoint(const MlpParams& params, const AdamState& state,
                         const json& training_meta, const std::string& path) {
  json j = mlp_to_json(params);
  j["version"] = 1;
  j["optimizer_state"] = adam_to_json(state);
  j["training_meta"] = training_meta;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << j.dump(2) << '\n';
}

MlpCheckpoint load_mlp_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  json j = json::parse(in);
  if (j.at("version") != 1) throw DataError("unsupported checkpoint version");
  MlpCheckpoint cp{mlp_from_json(j), AdamState{}, j.value("training_meta", json::object())};
  cp.state = adam_from_json(j.at("optimizer_state"), cp.params);
  return cp;
}

}  // namespace passgym::rl
