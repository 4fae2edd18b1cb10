#pragma once

#include "carp/meanfield.hpp"
#include "carp/types.hpp"

#include <cstdint>

namespace carp {

/// How likelihoods are spread over [likelihood_min, likelihood_max].
/// Uniform: independent draws. Stratified: one draw in each of n equal-width
/// strata, assigned to risks in random order, so the sample covers the range
/// the way min-max normalized expert scores do.
enum class LikelihoodLayout { Uniform, Stratified };

struct SyntheticSpec {
  int nodes = 50;
  int edges = 515;
  double likelihood_min = 0.05;
  double likelihood_max = 0.95;
  LikelihoodLayout layout = LikelihoodLayout::Uniform;
  ModelParams params{3.0e-3, 1.2e-3, 3.5};
  int panel_length = 156;
  std::uint64_t seed = 0;
  /// Start the panel from Bernoulli draws of the mean-field steady state
  /// rather than from all-dormant.
  bool stationary_start = true;

  void validate() const;
};

struct SyntheticData {
  RiskNetwork network;
  EventPanel panel;
};

/// Uniform random simple graph with exactly `edges` edges (G(n, m)).
/// Categories are assigned in five contiguous id blocks.
RiskNetwork random_network(int nodes, int edges, double likelihood_min, double likelihood_max,
                           std::uint64_t seed,
                           LikelihoodLayout layout = LikelihoodLayout::Uniform);

/// Random network plus one simulated event panel. The graph and likelihoods
/// come from the stream seeded with `seed`; the panel is run 0 of an ensemble
/// with master seed derive_stream_seed(seed, 0).
SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace carp
