#include "carp/synthetic.hpp"

#include "carp/montecarlo.hpp"
#include "carp/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace carp {

void SyntheticSpec::validate() const {
  if (nodes < 1) throw DomainError("node count must be positive");
  const long max_edges = static_cast<long>(nodes) * (nodes - 1) / 2;
  if (edges < 0 || edges > max_edges) {
    throw DomainError("cannot place " + std::to_string(edges) + " edges on " +
                      std::to_string(nodes) + " nodes (at most " + std::to_string(max_edges) + ")");
  }
  if (!(likelihood_min > 0.0 && likelihood_max < 1.0 && likelihood_min <= likelihood_max)) {
    throw DomainError("likelihood range must lie inside (0,1)");
  }
  params.validate();
  if (panel_length < 2) throw DomainError("panel length must be at least 2");
}

RiskNetwork random_network(int nodes, int edges, double likelihood_min, double likelihood_max,
                           std::uint64_t seed, LikelihoodLayout layout) {
  SyntheticSpec check;
  check.nodes = nodes;
  check.edges = edges;
  check.likelihood_min = likelihood_min;
  check.likelihood_max = likelihood_max;
  check.validate();
  Xoshiro256 rng(seed);

  // Partial Fisher-Yates over the upper-triangle pair index.
  std::vector<std::pair<RiskId, RiskId>> pairs;
  pairs.reserve(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(std::max(nodes - 1, 0)) / 2);
  for (RiskId i = 0; i < nodes; ++i) {
    for (RiskId j = i + 1; j < nodes; ++j) pairs.emplace_back(i, j);
  }
  for (int k = 0; k < edges; ++k) {
    const auto pick = k + rng.below(pairs.size() - static_cast<std::size_t>(k));
    std::swap(pairs[static_cast<std::size_t>(k)], pairs[pick]);
  }
  pairs.resize(static_cast<std::size_t>(edges));

  std::vector<std::size_t> stratum(static_cast<std::size_t>(nodes));
  std::iota(stratum.begin(), stratum.end(), std::size_t{0});
  if (layout == LikelihoodLayout::Stratified) {
    for (std::size_t k = stratum.size(); k > 1; --k) std::swap(stratum[k - 1], stratum[rng.below(k)]);
  }

  std::vector<Risk> risks(static_cast<std::size_t>(nodes));
  for (RiskId i = 0; i < nodes; ++i) {
    Risk& r = risks[static_cast<std::size_t>(i)];
    r.id = i;
    char name[32];
    std::snprintf(name, sizeof name, "risk-%02d", i + 1);
    r.name = name;
    r.category = static_cast<Category>(static_cast<long>(i) * kCategoryCount / nodes);
    const double u = layout == LikelihoodLayout::Uniform
                         ? rng.uniform()
                         : (static_cast<double>(stratum[static_cast<std::size_t>(i)]) + rng.uniform()) / nodes;
    r.likelihood = likelihood_min + (likelihood_max - likelihood_min) * u;
    r.raw_likelihood = r.likelihood;
  }
  return RiskNetwork(std::move(risks), std::move(pairs));
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticData data{random_network(spec.nodes, spec.edges, spec.likelihood_min,
                                    spec.likelihood_max, spec.seed, spec.layout),
                     {}};

  SimulationConfig cfg;
  cfg.runs = 1;
  cfg.horizon = spec.panel_length;
  cfg.seed = derive_stream_seed(spec.seed, 0);
  cfg.keep_panels = true;
  if (spec.stationary_start) {
    const SteadyState steady = fixed_point(data.network, spec.params);
    cfg.initial = InitialState::bernoulli(steady.p_hat);
  }
  auto trajectory = simulate(data.network, spec.params, cfg);
  data.panel = std::move(trajectory.panels.front());
  data.panel.start_label = "2000-01";
  return data;
}

}  // namespace carp
