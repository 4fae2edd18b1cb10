#pragma once

#include "carp/dynamics.hpp"
#include "carp/types.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

namespace carp {

enum class FixedPointInit { Zeros, Likelihoods, Ones };

struct FixedPointOptions {
  double tol = 1e-10;
  long max_iter = 100000;
  FixedPointInit init = FixedPointInit::Likelihoods;
  /// Relaxation weight on the new iterate; 1 is a plain Jacobi sweep.
  double damping = 1.0;

  void validate() const;
};

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Mean-field stationary activation probabilities.
template <typename Scalar>
struct BasicSteadyState {
  Vector<Scalar> p_hat;
  long iterations = 0;
  Scalar residual = Scalar(0);  // max one-step change at exit
  bool converged = false;
};
using SteadyState = BasicSteadyState<double>;

/// Expected number of active neighbors, sum_{j in N_i} p_j, for every risk.
template <typename Scalar>
Vector<Scalar> expected_active_neighbors(const RiskNetwork& network, const Vector<Scalar>& p) {
  return network.adjacency().template cast<Scalar>() * p;
}

/// The stationarity map F. Component i is the activation probability of a
/// dormant risk facing sum_j p_j active neighbors, divided by itself plus the
/// recovery probability.
template <typename Scalar>
Vector<Scalar> mean_field_map(const RiskNetwork& network, const ModelParams& params,
                              const Vector<Scalar>& p) {
  const Vector<Scalar> load = expected_active_neighbors(network, p);
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const Array log_dormant = (-network.likelihoods().template cast<Scalar>().array()).log1p();
  const Array activate =
      -((Scalar(params.alpha) + Scalar(params.beta) * load.array()) * log_dormant).expm1();
  const Array recover = (Scalar(params.gamma) * log_dormant).exp();
  return (activate / (activate + recover)).matrix();
}

template <typename Scalar>
Vector<Scalar> initial_guess(const RiskNetwork& network, FixedPointInit init) {
  switch (init) {
    case FixedPointInit::Zeros: return Vector<Scalar>::Zero(network.size());
    case FixedPointInit::Ones: return Vector<Scalar>::Ones(network.size());
    case FixedPointInit::Likelihoods: break;
  }
  return network.likelihoods().template cast<Scalar>();
}

/// Successive approximation p <- (1-w) p + w F(p) from an explicit start.
/// Non-convergence is reported through `converged`, never thrown.
template <typename Scalar>
BasicSteadyState<Scalar> fixed_point_from(const RiskNetwork& network, const ModelParams& params,
                                          Vector<Scalar> start,
                                          const FixedPointOptions& options = {}) {
  params.validate();
  options.validate();
  if (start.size() != network.size()) throw DomainError("start vector has wrong length");

  BasicSteadyState<Scalar> out;
  out.p_hat = std::move(start);
  const Scalar w(options.damping);
  const Scalar tol(options.tol);
  for (long it = 1; it <= options.max_iter; ++it) {
    Vector<Scalar> next = mean_field_map(network, params, out.p_hat);
    if (options.damping != 1.0) next = (Scalar(1) - w) * out.p_hat + w * next;
    out.residual = network.size() > 0 ? (next - out.p_hat).cwiseAbs().maxCoeff() : Scalar(0);
    out.p_hat.swap(next);
    out.iterations = it;
    if (!(out.residual > tol)) {
      out.converged = !std::isnan(static_cast<double>(out.residual));
      break;
    }
  }
  return out;
}

template <typename Scalar = double>
BasicSteadyState<Scalar> fixed_point(const RiskNetwork& network, const ModelParams& params,
                                     const FixedPointOptions& options = {}) {
  return fixed_point_from(network, params, initial_guess<Scalar>(network, options.init), options);
}

/// max_i |(1-p_i) P_i(0->1) + p_i p_con,i - p_i|: the one-step drift of the
/// mean-field activation probabilities at p.
double stationarity_residual(const Eigen::VectorXd& p, const RiskNetwork& network,
                             const ModelParams& params);

/// Steady-state transition probabilities and their shares. Simultaneous
/// internal and external activation is kept out of the three-way split and
/// reported separately in `A_both`.
struct TransitionFractions {
  Eigen::VectorXd A_int;
  Eigen::VectorXd A_ext;
  Eigen::VectorXd A_rec;
  Eigen::VectorXd A_both;
  Eigen::VectorXd a_int;
  Eigen::VectorXd a_ext;
  Eigen::VectorXd a_rec;
};

TransitionFractions transition_fractions(const SteadyState& steady, const RiskNetwork& network,
                                         const ModelParams& params);

struct ExtIntRatio {
  double exact = 0.0;
  double taylor = 0.0;
};

/// External over internal activation probability of risk i, exactly and under
/// the first-order expansion (1-x)^m ~ 1 - m x, which reduces to
/// beta * sum_j p_j / alpha.
ExtIntRatio ext_int_ratio(const SteadyState& steady, const RiskNetwork& network,
                          const ModelParams& params, RiskId i);

/// Network average of ext_int_ratio over all risks.
ExtIntRatio mean_ext_int_ratio(const SteadyState& steady, const RiskNetwork& network,
                               const ModelParams& params);

}  // namespace carp
