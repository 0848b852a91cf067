// SPDX-License-Identifier: Apache-2.0

#include "passgym/dist.hpp"

#include <cmath>

#include "passgym/error.hpp"
#include "passgym/rng.hpp"

namespace passgym::rl {

double CategoricalDist::logsumexp() const {
  const double m = logits.maxCoeff();
  return m + std::log((logits.array() - m).exp().sum());
}

Eigen::VectorXd CategoricalDist::log_probs() const {
  return (logits.array() - logsumexp()).matrix();
}

Eigen::VectorXd CategoricalDist::probs() const {
  return log_probs().array().exp().matrix();
}

double CategoricalDist::log_prob(int action) const {
  if (action < 0 || action >= logits.size()) {
    throw DataError("log_prob: action index out of range");
  }
  return logits(action) - logsumexp();
}

double CategoricalDist::entropy() const {
  Eigen::VectorXd lp = log_probs();
  double h = 0.0;
  for (Eigen::Index i = 0; i < lp.size(); ++i) {
    const double p = std::exp(lp(i));
    if (p > 0.0) h -= p * lp(i);
  }
  return h;
}

int CategoricalDist::sample(std::mt19937_64& rng) const {
  Eigen::VectorXd p = probs();
  const double u = uniform01(rng);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size() - 1);  // guard against rounding shortfall
}

int CategoricalDist::argmax() const {
  int best = 0;
  for (Eigen::Index i = 1; i < logits.size(); ++i) {
    if (logits(i) > logits(best)) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace passgym::rl
