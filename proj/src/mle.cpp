#include "carp/mle.hpp"

#include "carp/nelder_mead.hpp"
#include "carp/parallel.hpp"
#include "carp/rng.hpp"

#include <cmath>
#include <map>
#include <numeric>

namespace carp {

namespace {

ModelParams from_log(const Eigen::VectorXd& x) {
  return {std::exp(x[0]), std::exp(x[1]), std::exp(x[2])};
}

Eigen::VectorXd to_log(const ModelParams& p) {
  return Eigen::Vector3d(std::log(p.alpha), std::log(p.beta), std::log(p.gamma));
}

// ln(1 - e^x) for x < 0.
double log1mexp(double x) {
  return x > -M_LN2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

std::optional<std::string> degeneracy(const TransitionCounts& counts) {
  long dormant = 0;
  for (const auto& g : counts.dormant) dormant += g.stayed_dormant + g.activated;
  const long active = std::accumulate(counts.stayed_active.begin(), counts.stayed_active.end(), 0L) +
                      std::accumulate(counts.recovered.begin(), counts.recovered.end(), 0L);
  if (active == 0) return "panel has no active risk-months before the final month";
  if (dormant == 0) return "panel has no dormant risk-months before the final month";
  if (counts.activations() == 0) return "panel contains no activations";
  return std::nullopt;
}

}  // namespace

long TransitionCounts::activations() const {
  long n = 0;
  for (const auto& g : dormant) n += g.activated;
  return n;
}

long TransitionCounts::transitions() const {
  long n = 0;
  for (const auto& g : dormant) n += g.stayed_dormant + g.activated;
  n += std::accumulate(stayed_active.begin(), stayed_active.end(), 0L);
  n += std::accumulate(recovered.begin(), recovered.end(), 0L);
  return n;
}

TransitionCounts TransitionCounts::from_panel(const EventPanel& panel, const RiskNetwork& network) {
  panel.validate_for(network, 2);
  const int n = network.size();
  const int months = panel.months();

  TransitionCounts c;
  c.stayed_active.assign(static_cast<std::size_t>(n), 0);
  c.recovered.assign(static_cast<std::size_t>(n), 0);
  c.log_dormant = (-network.likelihoods().array()).log1p().matrix();

  std::vector<std::map<int, std::pair<long, long>>> groups(static_cast<std::size_t>(n));
  for (int t = 0; t + 1 < months; ++t) {
    for (RiskId i = 0; i < n; ++i) {
      const bool now = panel.states(i, t) != 0;
      const bool next = panel.states(i, t + 1) != 0;
      const auto ui = static_cast<std::size_t>(i);
      if (now) {
        (next ? c.stayed_active[ui] : c.recovered[ui]) += 1;
        continue;
      }
      int k = 0;
      for (RiskId j : network.neighbors(i)) k += panel.states(j, t);
      auto& cell = groups[ui][k];
      (next ? cell.second : cell.first) += 1;
    }
  }
  for (RiskId i = 0; i < n; ++i) {
    for (const auto& [k, cell] : groups[static_cast<std::size_t>(i)]) {
      c.dormant.push_back({i, k, cell.first, cell.second});
    }
  }
  return c;
}

double log_likelihood(const TransitionCounts& counts, const ModelParams& params) {
  params.validate();
  double ll = 0.0;
  for (const auto& g : counts.dormant) {
    const double exponent = (params.alpha + params.beta * g.active_neighbors) * counts.log_dormant[g.risk];
    if (g.stayed_dormant) ll += static_cast<double>(g.stayed_dormant) * exponent;
    if (g.activated) ll += static_cast<double>(g.activated) * log1mexp(exponent);
  }
  for (std::size_t i = 0; i < counts.stayed_active.size(); ++i) {
    const double exponent = params.gamma * counts.log_dormant[static_cast<Eigen::Index>(i)];
    if (counts.stayed_active[i]) ll += static_cast<double>(counts.stayed_active[i]) * log1mexp(exponent);
    if (counts.recovered[i]) ll += static_cast<double>(counts.recovered[i]) * exponent;
  }
  if (!std::isfinite(ll)) {
    throw DomainError("log-likelihood is not finite; parameters out of representable range");
  }
  return ll;
}

double log_likelihood(const EventPanel& panel, const RiskNetwork& network,
                      const ModelParams& params) {
  return log_likelihood(TransitionCounts::from_panel(panel, network), params);
}

Eigen::Vector3d log_likelihood_gradient(const TransitionCounts& counts, const ModelParams& params) {
  params.validate();
  // d/de of ln(1 - e^{e l}) is -l e^{e l} / (1 - e^{e l}).
  auto dlog_activate = [](double exponent, double log_dormant) {
    return -log_dormant * std::exp(exponent) / -std::expm1(exponent);
  };
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  for (const auto& grp : counts.dormant) {
    const double ld = counts.log_dormant[grp.risk];
    const double exponent = (params.alpha + params.beta * grp.active_neighbors) * ld;
    double d = static_cast<double>(grp.stayed_dormant) * ld;
    if (grp.activated) d += static_cast<double>(grp.activated) * dlog_activate(exponent, ld);
    g[0] += d * params.alpha;
    g[1] += d * params.beta * grp.active_neighbors;
  }
  for (std::size_t i = 0; i < counts.stayed_active.size(); ++i) {
    const double ld = counts.log_dormant[static_cast<Eigen::Index>(i)];
    const double exponent = params.gamma * ld;
    double d = static_cast<double>(counts.recovered[i]) * ld;
    if (counts.stayed_active[i]) d += static_cast<double>(counts.stayed_active[i]) * dlog_activate(exponent, ld);
    g[2] += d * params.gamma;
  }
  return g;
}

void FitConfig::validate() const {
  if (starts < 0) throw DomainError("fit starts must be non-negative");
  if (max_iter < 1) throw DomainError("fit max_iter must be at least 1");
  if (!(tol > 0.0)) throw DomainError("fit tolerance must be positive");
  if (!(start_lower > 0.0 && start_upper > start_lower)) throw DomainError("bad start range");
  if (!(param_lower > 0.0 && param_upper > param_lower)) throw DomainError("bad parameter box");
  if (restarts < 0) throw DomainError("restarts must be non-negative");
}

FitResult fit(const EventPanel& panel, const RiskNetwork& network, const ModelParams& init,
              const FitConfig& cfg) {
  init.validate();
  cfg.validate();
  const TransitionCounts counts = TransitionCounts::from_panel(panel, network);

  std::vector<Eigen::VectorXd> starts{to_log(init)};
  Xoshiro256 rng(cfg.seed);
  const double lo = std::log(cfg.start_lower);
  const double hi = std::log(cfg.start_upper);
  for (int s = 0; s < cfg.starts; ++s) {
    Eigen::VectorXd x(3);
    for (int k = 0; k < 3; ++k) x[k] = lo + (hi - lo) * rng.uniform();
    starts.push_back(x);
  }

  NelderMeadOptions nm;
  nm.max_iter = cfg.max_iter;
  nm.f_tol = cfg.tol;
  nm.lower = Eigen::VectorXd::Constant(3, std::log(cfg.param_lower));
  nm.upper = Eigen::VectorXd::Constant(3, std::log(cfg.param_upper));
  // Clamp starts into the box so the caller's init is evaluated as given when feasible.
  for (auto& x : starts) x = x.cwiseMax(nm.lower).cwiseMin(nm.upper);

  auto objective = [&](const Eigen::VectorXd& x) {
    try {
      return -log_likelihood(counts, from_log(x));
    } catch (const DomainError&) {
      return HUGE_VAL;
    }
  };

  struct Outcome {
    NelderMeadResult nm;
    std::vector<FitTracePoint> trace;
  };
  std::vector<Outcome> outcomes(starts.size());
  parallel_for(starts.size(), [&](std::size_t s) {
    Outcome& out = outcomes[s];
    auto record = [&](const Eigen::VectorXd& x, double f) {
      if (cfg.keep_trace) out.trace.push_back({from_log(x), -f});
    };
    out.nm = nelder_mead(objective, starts[s], nm, record);
    long total_iter = out.nm.iterations;
    for (int r = 0; r < cfg.restarts; ++r) {
      NelderMeadResult again = nelder_mead(objective, out.nm.x, nm, record);
      total_iter += again.iterations;
      const bool improved = again.f < out.nm.f - cfg.tol;
      if (again.f <= out.nm.f) out.nm = again;
      if (!improved) break;
    }
    out.nm.iterations = total_iter;
  });

  std::size_t best = 0;
  for (std::size_t s = 1; s < outcomes.size(); ++s) {
    if (outcomes[s].nm.f < outcomes[best].nm.f) best = s;
  }

  FitResult result;
  result.params = from_log(outcomes[best].nm.x);
  result.log_likelihood = log_likelihood(counts, result.params);
  result.iterations = outcomes[best].nm.iterations;
  result.converged = outcomes[best].nm.converged;
  result.best_start = static_cast<int>(best);
  result.gradient_norm = log_likelihood_gradient(counts, result.params).norm();
  result.degenerate = degeneracy(counts);
  result.trace = std::move(outcomes[best].trace);
  return result;
}

}  // namespace carp
