#include "carp/dynamics.hpp"

namespace carp {

namespace {

void check_state(const NetworkState& state, const RiskNetwork& network) {
  if (state.size() != network.size()) {
    throw DomainError("state has " + std::to_string(state.size()) +
                      " entries but the network has " + std::to_string(network.size()) +
                      " risks");
  }
}

}  // namespace

NetworkState dormant_state(const RiskNetwork& network) {
  NetworkState s;
  s.bits.setZero(network.size());
  return s;
}

int active_neighbors(RiskId i, const NetworkState& state, const RiskNetwork& network) {
  int k = 0;
  for (RiskId j : network.neighbors(i)) k += state.bits[j];
  return k;
}

double prob_activate(RiskId i, const NetworkState& state, const RiskNetwork& network,
                     const ModelParams& params) {
  check_state(state, network);
  const int k = active_neighbors(i, state, network);
  return prob_activate(network.risk(i).likelihood, static_cast<double>(k), params);
}

TransitionKernel::TransitionKernel(const RiskNetwork& network, const ModelParams& params)
    : alpha(params.alpha), beta(params.beta) {
  params.validate();
  log_dormant = (-network.likelihoods().array()).log1p().matrix();
  p_con = -(params.gamma * log_dormant.array()).expm1().matrix();
}

NetworkState step(const NetworkState& state, const RiskNetwork& network,
                  const TransitionKernel& kernel, Xoshiro256& rng) {
  check_state(state, network);
  const int n = network.size();
  NetworkState next;
  next.bits.resize(n);
  next.time = state.time + 1;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    if (state.bits[i]) {
      next.bits[i] = u < kernel.p_con[i] ? 1 : 0;
    } else {
      const int k = active_neighbors(i, state, network);
      const double p01 = -std::expm1((kernel.alpha + kernel.beta * k) * kernel.log_dormant[i]);
      next.bits[i] = u < p01 ? 1 : 0;
    }
  }
  return next;
}

NetworkState step(const NetworkState& state, const RiskNetwork& network,
                  const ModelParams& params, Xoshiro256& rng) {
  return step(state, network, TransitionKernel(network, params), rng);
}

}  // namespace carp
