#include "carp/meanfield.hpp"

#include <limits>

namespace carp {

void FixedPointOptions::validate() const {
  if (!(tol > 0.0)) throw DomainError("fixed-point tolerance must be positive");
  if (max_iter < 1) throw DomainError("fixed-point max_iter must be at least 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw DomainError("damping must lie in (0,1]");
}

double stationarity_residual(const Eigen::VectorXd& p, const RiskNetwork& network,
                             const ModelParams& params) {
  params.validate();
  if (p.size() != network.size()) throw DomainError("probability vector has wrong length");
  if ((p.array() < 0.0).any() || (p.array() > 1.0).any()) {
    throw DomainError("probabilities must lie in [0,1]");
  }
  if (p.size() == 0) return 0.0;
  const Eigen::VectorXd load = expected_active_neighbors(network, p);
  const Eigen::ArrayXd log_dormant = (-network.likelihoods().array()).log1p();
  const Eigen::ArrayXd activate =
      -((params.alpha + params.beta * load.array()) * log_dormant).expm1();
  const Eigen::ArrayXd stay = -(params.gamma * log_dormant).expm1();
  const Eigen::ArrayXd next = (1.0 - p.array()) * activate + p.array() * stay;
  return (next - p.array()).abs().maxCoeff();
}

TransitionFractions transition_fractions(const SteadyState& steady, const RiskNetwork& network,
                                         const ModelParams& params) {
  params.validate();
  if (!steady.converged) throw DomainError("transition fractions need a converged steady state");
  if (steady.p_hat.size() != network.size()) throw DomainError("steady state has wrong length");

  const Eigen::ArrayXd p = steady.p_hat.array();
  const Eigen::ArrayXd load = expected_active_neighbors(network, steady.p_hat).array();
  const Eigen::ArrayXd log_dormant = (-network.likelihoods().array()).log1p();
  const Eigen::ArrayXd p_int = -(params.alpha * log_dormant).expm1();
  const Eigen::ArrayXd p_ext_any = -(params.beta * load * log_dormant).expm1();
  const Eigen::ArrayXd p_rec = (params.gamma * log_dormant).exp();

  TransitionFractions f;
  f.A_int = ((1.0 - p) * p_int).matrix();
  f.A_ext = ((1.0 - p) * p_ext_any).matrix();
  f.A_rec = (p * p_rec).matrix();
  f.A_both = ((1.0 - p) * p_int * p_ext_any).matrix();
  const Eigen::ArrayXd total = f.A_int.array() + f.A_ext.array() + f.A_rec.array();
  f.a_int = (f.A_int.array() / total).matrix();
  f.a_ext = (f.A_ext.array() / total).matrix();
  f.a_rec = (f.A_rec.array() / total).matrix();
  return f;
}

ExtIntRatio ext_int_ratio(const SteadyState& steady, const RiskNetwork& network,
                          const ModelParams& params, RiskId i) {
  params.validate();
  if (!steady.converged) throw DomainError("ratio needs a converged steady state");
  if (steady.p_hat.size() != network.size()) throw DomainError("steady state has wrong length");
  const double likelihood = network.risk(i).likelihood;
  double load = 0.0;
  for (RiskId j : network.neighbors(i)) load += steady.p_hat[j];

  const double internal = activation_prob(likelihood, params.alpha);
  if (!(internal > std::numeric_limits<double>::min())) {
    throw DomainError("internal activation probability of risk " + std::to_string(i) +
                      " underflows; ratio undefined");
  }
  return {activation_prob(likelihood, params.beta * load) / internal,
          params.beta * load / params.alpha};
}

ExtIntRatio mean_ext_int_ratio(const SteadyState& steady, const RiskNetwork& network,
                               const ModelParams& params) {
  ExtIntRatio sum;
  for (RiskId i = 0; i < network.size(); ++i) {
    const ExtIntRatio r = ext_int_ratio(steady, network, params, i);
    sum.exact += r.exact;
    sum.taylor += r.taylor;
  }
  if (network.size() > 0) {
    sum.exact /= network.size();
    sum.taylor /= network.size();
  }
  return sum;
}

}  // namespace carp
