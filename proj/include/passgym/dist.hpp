// SPDX-License-Identifier: Apache-2.0

#ifndef PASSGYM_DIST_HPP
#define PASSGYM_DIST_HPP

#include <Eigen/Core>
#include <random>

namespace passgym::rl {

// Categorical distribution over actions, parameterized by unnormalized
// logits (the policy head's output).
struct CategoricalDist {
  Eigen::VectorXd logits;

  double logsumexp() const;
  Eigen::VectorXd log_probs() const;
  Eigen::VectorXd probs() const;

  // log pi(a) = logits[a] - logsumexp(logits). Throws DataError when the
  // action index is out of range.
  double log_prob(int action) const;
  double entropy() const;

  // Inverse-CDF sampling; reproducible bit-for-bit for a fixed rng state.
  int sample(std::mt19937_64& rng) const;

  // Ties resolve to the lowest index.
  int argmax() const;
};

}  // namespace passgym::rl

#endif  // PASSGYM_DIST_HPP
