#pragma once

#include "carp/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace carp {

/// Sufficient statistics of an event panel for the trajectory likelihood.
/// Dormant-risk transitions are grouped by (risk, active-neighbor count);
/// active-risk transitions need only per-risk totals since continuation does
/// not depend on neighbors. Built in one O(R T deg) pass; each likelihood
/// evaluation is then linear in the number of distinct groups.
struct TransitionCounts {
  struct DormantGroup {
    RiskId risk = 0;
    int active_neighbors = 0;
    long stayed_dormant = 0;
    long activated = 0;
  };

  std::vector<DormantGroup> dormant;
  std::vector<long> stayed_active;  // per risk, 1 -> 1
  std::vector<long> recovered;      // per risk, 1 -> 0
  Eigen::VectorXd log_dormant;      // log1p(-L_i)

  long activations() const;
  long transitions() const;

  static TransitionCounts from_panel(const EventPanel& panel, const RiskNetwork& network);
};

/// Sum over months t < T-1 and risks i of ln P_i(t)^{s_i(t) -> s_i(t+1)}.
double log_likelihood(const EventPanel& panel, const RiskNetwork& network,
                      const ModelParams& params);
double log_likelihood(const TransitionCounts& counts, const ModelParams& params);

/// Analytic gradient of the log-likelihood with respect to
/// (ln alpha, ln beta, ln gamma).
Eigen::Vector3d log_likelihood_gradient(const TransitionCounts& counts, const ModelParams& params);

struct FitConfig {
  /// Random starts drawn log-uniformly per parameter in
  /// [start_lower, start_upper]; the caller's init is always tried first.
  int starts = 5;
  std::uint64_t seed = 0;
  long max_iter = 2000;
  double tol = 1e-9;
  double start_lower = 1e-5;
  double start_upper = 1e1;
  /// Search box for each parameter.
  double param_lower = 1e-10;
  double param_upper = 1e3;
  /// Nelder-Mead restarts from the incumbent after each convergence.
  int restarts = 3;
  bool keep_trace = false;

  void validate() const;
};

struct FitTracePoint {
  ModelParams params;
  double log_likelihood = 0.0;
};

struct FitResult {
  ModelParams params;
  double log_likelihood = 0.0;
  long iterations = 0;
  bool converged = false;
  /// Index of the winning start; 0 is the caller's init.
  int best_start = 0;
  double gradient_norm = 0.0;
  /// Set when the panel cannot identify all three parameters.
  std::optional<std::string> degenerate;
  std::vector<FitTracePoint> trace;
};

/// Maximum-likelihood fit of (alpha, beta, gamma) by multi-start Nelder-Mead
/// over log-parameters. Starts run concurrently; the best log-likelihood wins,
/// ties going to the lowest start index.
FitResult fit(const EventPanel& panel, const RiskNetwork& network, const ModelParams& init,
              const FitConfig& cfg = {});

}  // namespace carp
