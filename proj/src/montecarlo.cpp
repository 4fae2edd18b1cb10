#include "carp/montecarlo.hpp"

#include "carp/parallel.hpp"

#include <algorithm>
#include <deque>

namespace carp {

namespace {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

Eigen::VectorXd layer_curve(const Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>& runs,
                            std::size_t layer_size) {
  if (layer_size == 0 || runs.rows() == 0) return {};
  return runs.cast<double>().colwise().mean().transpose() / static_cast<double>(layer_size);
}

}  // namespace

void SimulationConfig::validate(const RiskNetwork& network) const {
  if (runs < 1) throw DomainError("runs must be at least 1");
  if (horizon < 1) throw DomainError("horizon must be at least 1");
  const double work = static_cast<double>(runs) * horizon * std::max(1, network.size());
  if (work > budget) {
    throw DomainError("simulation of " + std::to_string(work) +
                      " risk-months exceeds the configured budget");
  }
  const auto n = static_cast<Eigen::Index>(network.size());
  switch (initial.kind) {
    case InitialState::Kind::Explicit:
      if (initial.values.size() != n) throw DomainError("explicit initial state has wrong length");
      for (double v : initial.values) {
        if (v != 0.0 && v != 1.0) throw DomainError("explicit initial state must be 0/1");
      }
      break;
    case InitialState::Kind::Bernoulli:
      if (initial.values.size() != n) throw DomainError("initial probabilities have wrong length");
      if ((initial.values.array() < 0.0).any() || (initial.values.array() > 1.0).any()) {
        throw DomainError("initial probabilities must lie in [0,1]");
      }
      break;
    default: break;
  }
}

NetworkState initial_state(const InitialState& spec, int risks, Xoshiro256& rng) {
  NetworkState s;
  s.bits.setZero(risks);
  switch (spec.kind) {
    case InitialState::Kind::AllDormant: break;
    case InitialState::Kind::AllActive: s.bits.setOnes(); break;
    case InitialState::Kind::Explicit:
      for (int i = 0; i < risks; ++i) s.bits[i] = spec.values[i] != 0.0 ? 1 : 0;
      break;
    case InitialState::Kind::Bernoulli:
      for (int i = 0; i < risks; ++i) s.bits[i] = rng.uniform() < spec.values[i] ? 1 : 0;
      break;
  }
  return s;
}

StateMatrix simulate_run(const RiskNetwork& network, const TransitionKernel& kernel,
                         const InitialState& initial, int horizon, std::uint64_t stream_seed) {
  Xoshiro256 rng(stream_seed);
  NetworkState state = initial_state(initial, network.size(), rng);
  StateMatrix states(network.size(), horizon);
  states.col(0) = state.bits;
  for (int t = 1; t < horizon; ++t) {
    state = step(state, network, kernel, rng);
    states.col(t) = state.bits;
  }
  return states;
}

FrequencyTrajectory simulate(const RiskNetwork& network, const ModelParams& params,
                             const SimulationConfig& cfg) {
  params.validate();
  cfg.validate(network);
  const TransitionKernel kernel(network, params);

  const std::size_t workers = std::min<std::size_t>(thread_limit(), static_cast<std::size_t>(cfg.runs));
  std::vector<CountMatrix> partial(workers, CountMatrix::Zero(network.size(), cfg.horizon));

  FrequencyTrajectory out;
  out.runs = cfg.runs;
  if (cfg.keep_panels) out.panels.resize(static_cast<std::size_t>(cfg.runs));

  // Integer counts summed per worker chunk; addition order does not affect the totals.
  const std::size_t chunk = (static_cast<std::size_t>(cfg.runs) + workers - 1) / workers;
  parallel_for(workers, [&](std::size_t w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(static_cast<std::size_t>(cfg.runs), begin + chunk);
    for (std::size_t r = begin; r < end; ++r) {
      StateMatrix states = simulate_run(network, kernel, cfg.initial, cfg.horizon,
                                        derive_stream_seed(cfg.seed, r));
      partial[w] += states.cast<std::int64_t>();
      if (cfg.keep_panels) out.panels[r].states = std::move(states);
    }
  });

  out.counts = CountMatrix::Zero(network.size(), cfg.horizon);
  for (const auto& p : partial) out.counts += p;
  return out;
}

std::vector<std::vector<RiskId>> bfs_layers(const RiskNetwork& network, RiskId source) {
  network.risk(source);
  std::vector<int> dist(static_cast<std::size_t>(network.size()), -1);
  std::vector<std::vector<RiskId>> layers{{source}};
  dist[static_cast<std::size_t>(source)] = 0;
  std::deque<RiskId> queue{source};
  while (!queue.empty()) {
    const RiskId u = queue.front();
    queue.pop_front();
    const int d = dist[static_cast<std::size_t>(u)] + 1;
    for (RiskId v : network.neighbors(u)) {
      if (dist[static_cast<std::size_t>(v)] >= 0) continue;
      dist[static_cast<std::size_t>(v)] = d;
      if (layers.size() <= static_cast<std::size_t>(d)) layers.emplace_back();
      layers[static_cast<std::size_t>(d)].push_back(v);
      queue.push_back(v);
    }
  }
  for (auto& layer : layers) std::sort(layer.begin(), layer.end());
  return layers;
}

Eigen::VectorXd TemporalInfluence::one_hop_curve() const {
  return layer_curve(one_hop_runs, one_hop.size());
}

Eigen::VectorXd TemporalInfluence::two_hop_curve() const {
  return layer_curve(two_hop_runs, two_hop.size());
}

TemporalInfluence temporal_influence(const RiskNetwork& network, const ModelParams& params,
                                     RiskId source, const SimulationConfig& cfg) {
  params.validate();
  cfg.validate(network);
  const auto layers = bfs_layers(network, source);

  TemporalInfluence out;
  out.source = source;
  out.runs = cfg.runs;
  if (layers.size() > 1) out.one_hop = layers[1];
  if (layers.size() > 2) out.two_hop = layers[2];
  out.one_hop_runs.setZero(out.one_hop.empty() ? 0 : cfg.runs, cfg.horizon);
  out.two_hop_runs.setZero(out.two_hop.empty() ? 0 : cfg.runs, cfg.horizon);

  const TransitionKernel kernel(network, params);
  const int n = network.size();
  parallel_for(static_cast<std::size_t>(cfg.runs), [&](std::size_t r) {
    const std::uint64_t seed = derive_stream_seed(cfg.seed, r);
    Xoshiro256 rng_a(seed);
    Xoshiro256 rng_b(seed);
    NetworkState a = initial_state(cfg.initial, n, rng_a);
    NetworkState b = initial_state(cfg.initial, n, rng_b);
    a.bits[source] = 1;
    const auto row = static_cast<Eigen::Index>(r);
    for (int t = 0; t < cfg.horizon; ++t) {
      if (t > 0) {
        a = step(a, network, kernel, rng_a);
        b = step(b, network, kernel, rng_b);
      }
      for (RiskId j : out.one_hop) out.one_hop_runs(row, t) += a.bits[j] - b.bits[j];
      for (RiskId j : out.two_hop) out.two_hop_runs(row, t) += a.bits[j] - b.bits[j];
    }
  });
  return out;
}

}  // namespace carp
