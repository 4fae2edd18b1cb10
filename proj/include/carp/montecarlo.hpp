#pragma once

#include "carp/dynamics.hpp"
#include "carp/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace carp {

/// How each run's state at t = 0 is chosen.
struct InitialState {
  enum class Kind {
    AllDormant,
    AllActive,
    /// The same fixed vector for every run.
    Explicit,
    /// Independent Bernoulli(p_i) draws per run from the run's own stream,
    /// R uniforms in id order before the first step.
    Bernoulli,
  };

  Kind kind = Kind::AllDormant;
  Eigen::VectorXd values;  // bits for Explicit, probabilities for Bernoulli

  static InitialState dormant() { return {}; }
  static InitialState active() { return {Kind::AllActive, {}}; }
  static InitialState exact(const Eigen::VectorXd& bits) { return {Kind::Explicit, bits}; }
  static InitialState bernoulli(const Eigen::VectorXd& p) { return {Kind::Bernoulli, p}; }
};

struct SimulationConfig {
  int runs = 1000;
  /// Number of recorded months; column t holds the state at month t, with
  /// t = 0 the initial state.
  int horizon = 100;
  std::uint64_t seed = 0;
  InitialState initial;
  /// Guard on runs * horizon * R risk-month updates.
  double budget = 5e10;
  bool keep_panels = false;

  void validate(const RiskNetwork& network) const;
};

/// Active counts per (risk, month) over the ensemble.
struct FrequencyTrajectory {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  int runs = 0;
  std::vector<EventPanel> panels;  // per run when keep_panels is set

  Eigen::MatrixXd frequencies() const { return counts.cast<double>() / runs; }
};

NetworkState initial_state(const InitialState& spec, int risks, Xoshiro256& rng);

/// One trajectory of `horizon` months from the stream seeded with `stream_seed`.
StateMatrix simulate_run(const RiskNetwork& network, const TransitionKernel& kernel,
                         const InitialState& initial, int horizon, std::uint64_t stream_seed);

/// Ensemble simulation. Run r uses the stream derive_stream_seed(seed, r), so
/// the result does not depend on thread count.
FrequencyTrajectory simulate(const RiskNetwork& network, const ModelParams& params,
                             const SimulationConfig& cfg);

/// Response of one-hop and two-hop neighbors to activating a source risk at
/// month 0. Ensemble A starts from the configured initial state with the
/// source forced active; ensemble B starts from the same state without the
/// forcing. Both share run seeds. Influence on j at t is freq_A(j,t) -
/// freq_B(j,t), averaged over each layer.
struct TemporalInfluence {
  RiskId source = 0;
  std::vector<RiskId> one_hop;
  std::vector<RiskId> two_hop;
  int runs = 0;
  /// Per run, per month: sum over the layer of (s_A - s_B). Layer curves are
  /// column means divided by the layer size. Empty when the layer is empty.
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> one_hop_runs;
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> two_hop_runs;

  Eigen::VectorXd one_hop_curve() const;
  Eigen::VectorXd two_hop_curve() const;
};

/// Breadth-first layers around `source`: result[d] holds risks at distance d.
std::vector<std::vector<RiskId>> bfs_layers(const RiskNetwork& network, RiskId source);

TemporalInfluence temporal_influence(const RiskNetwork& network, const ModelParams& params,
                                     RiskId source, const SimulationConfig& cfg);

}  // namespace carp
