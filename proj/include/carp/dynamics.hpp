#pragma once

#include "carp/rng.hpp"
#include "carp/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>

namespace carp {

/// Per-step Poisson transition probabilities of one risk.
template <typename Scalar>
struct PoissonProbs {
  Scalar p_int;  // internal activation
  Scalar p_ext;  // activation by one active neighbor
  Scalar p_con;  // staying active
  Scalar p_rec;  // recovery, 1 - p_con
};

/// `1 - (1-L)^exponent`, evaluated as -expm1(exponent * log1p(-L)).
template <typename Scalar>
Scalar activation_prob(Scalar likelihood, Scalar exponent) {
  using std::expm1;
  using std::log1p;
  return -expm1(exponent * log1p(-likelihood));
}

/// `(1-L)^exponent`.
template <typename Scalar>
Scalar survival_prob(Scalar likelihood, Scalar exponent) {
  using std::exp;
  using std::log1p;
  return exp(exponent * log1p(-likelihood));
}

template <typename Scalar = double>
PoissonProbs<Scalar> poisson_probs(Scalar likelihood, const ModelParams& params) {
  if (!(likelihood > Scalar(0) && likelihood < Scalar(1))) {
    throw DomainError("likelihood must lie strictly inside (0,1)");
  }
  const Scalar log_dormant = std::log1p(-likelihood);
  PoissonProbs<Scalar> p;
  p.p_int = -std::expm1(Scalar(params.alpha) * log_dormant);
  p.p_ext = -std::expm1(Scalar(params.beta) * log_dormant);
  p.p_rec = std::exp(Scalar(params.gamma) * log_dormant);
  p.p_con = Scalar(1) - p.p_rec;
  return p;
}

/// Probability that a dormant risk activates when `active_neighbors` (possibly
/// fractional, in the mean-field use) of its neighbors are active:
/// 1 - (1-p_int)(1-p_ext)^k = 1 - (1-L)^(alpha + beta k).
template <typename Scalar>
Scalar prob_activate(Scalar likelihood, Scalar active_neighbors, const ModelParams& params) {
  return activation_prob(likelihood,
                         Scalar(params.alpha) + Scalar(params.beta) * active_neighbors);
}

struct NetworkState {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1> bits;
  long time = 0;

  int size() const { return static_cast<int>(bits.size()); }
  bool operator==(const NetworkState&) const = default;
};

NetworkState dormant_state(const RiskNetwork& network);

int active_neighbors(RiskId i, const NetworkState& state, const RiskNetwork& network);

/// Dormant-to-active probability of risk i given the current state. Does not
/// depend on the state of i itself.
double prob_activate(RiskId i, const NetworkState& state, const RiskNetwork& network,
                     const ModelParams& params);

/// Precomputed per-risk kernel for repeated stepping.
struct TransitionKernel {
  Eigen::VectorXd log_dormant;  // log1p(-L_i)
  Eigen::VectorXd p_con;
  double alpha = 0.0;
  double beta = 0.0;

  TransitionKernel(const RiskNetwork& network, const ModelParams& params);
};

/// One synchronous update. Every risk is sampled against the old state and
/// exactly one uniform draw is consumed per risk, in id order: a dormant risk
/// activates iff u < P(0->1), an active risk stays active iff u < p_con.
NetworkState step(const NetworkState& state, const RiskNetwork& network,
                  const ModelParams& params, Xoshiro256& rng);
NetworkState step(const NetworkState& state, const RiskNetwork& network,
                  const TransitionKernel& kernel, Xoshiro256& rng);

}  // namespace carp
