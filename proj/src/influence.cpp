#include "carp/influence.hpp"

#include "carp/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>

namespace carp {

RiskNetwork knockout(const RiskNetwork& network, RiskId i) {
  return network.with_likelihood(i, kKnockoutLikelihood);
}

InfluenceMatrix influence_matrix(const RiskNetwork& network, const ModelParams& params,
                                 const FixedPointOptions& options) {
  params.validate();
  const int n = network.size();
  const SteadyState baseline = fixed_point(network, params, options);
  if (!baseline.converged) throw ConvergenceError("baseline steady state did not converge");
  const Eigen::VectorXd base_ext = transition_fractions(baseline, network, params).a_ext;

  InfluenceMatrix infl;
  infl.params = params;
  infl.tol = options.tol;
  infl.values.setZero(n, n);
  std::vector<char> failed(static_cast<std::size_t>(n), 0);

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t idx) {
    const auto i = static_cast<RiskId>(idx);
    const RiskNetwork disabled = knockout(network, i);
    const SteadyState steady = fixed_point(disabled, params, options);
    if (!steady.converged) {
      failed[idx] = 1;
      return;
    }
    const Eigen::VectorXd ext = transition_fractions(steady, disabled, params).a_ext;
    infl.values.row(i) = (base_ext - ext).transpose();
    infl.values(i, i) = 0.0;
  });

  const auto bad = std::find(failed.begin(), failed.end(), 1);
  if (bad != failed.end()) {
    throw ConvergenceError("steady state with risk " +
                           std::to_string(std::distance(failed.begin(), bad)) +
                           " knocked out did not converge");
  }
  return infl;
}

std::vector<RiskId> ranked_targets(const InfluenceMatrix& infl, RiskId i) {
  const auto n = static_cast<RiskId>(infl.values.rows());
  if (i < 0 || i >= n) throw DomainError("risk id out of range");
  std::vector<RiskId> order;
  for (RiskId j = 0; j < n; ++j) {
    if (j != i) order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](RiskId a, RiskId b) { return infl.values(i, a) > infl.values(i, b); });
  return order;
}

bool top_targets_are_neighbors(const InfluenceMatrix& infl, const RiskNetwork& network, RiskId i) {
  const auto& nb = network.neighbors(i);
  const auto order = ranked_targets(infl, i);
  std::vector<RiskId> top(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(nb.size()));
  std::sort(top.begin(), top.end());
  if (top != nb) return false;
  // A tie across the cut would make the top set ambiguous.
  if (nb.size() < order.size() && !nb.empty()) {
    return infl.values(i, order[nb.size() - 1]) > infl.values(i, order[nb.size()]);
  }
  return true;
}

CategoryInfluence category_influence(const InfluenceMatrix& infl, const RiskNetwork& network) {
  const int n = network.size();
  if (infl.values.rows() != n || infl.values.cols() != n) {
    throw DomainError("influence matrix does not match the network");
  }

  std::vector<std::vector<RiskId>> members(kCategoryCount);
  for (const Risk& r : network.risks()) {
    members[static_cast<std::size_t>(r.category)].push_back(r.id);
  }

  CategoryInfluence out;
  std::vector<const std::vector<RiskId>*> groups;
  for (Category c : kAllCategories) {
    const auto& m = members[static_cast<std::size_t>(c)];
    if (m.empty()) continue;
    out.categories.push_back(c);
    groups.push_back(&m);
  }
  if (groups.empty()) throw DomainError("network has no risks");

  const auto size = static_cast<Eigen::Index>(groups.size());
  out.raw.setZero(size, size);
  for (Eigen::Index a = 0; a < size; ++a) {
    for (Eigen::Index b = 0; b < size; ++b) {
      const auto& from = *groups[static_cast<std::size_t>(a)];
      const auto& to = *groups[static_cast<std::size_t>(b)];
      double sum = 0.0;
      for (RiskId i : from) {
        for (RiskId j : to) {
          if (i != j) sum += infl.values(i, j);
        }
      }
      const double pairs = a == b ? static_cast<double>(from.size()) * (from.size() - 1.0)
                                  : static_cast<double>(from.size()) * to.size();
      if (pairs == 0.0) {
        throw DomainError("category " + std::string(to_string(out.categories[static_cast<std::size_t>(a)])) +
                          " has a single risk; its self-influence is undefined");
      }
      out.raw(a, b) = sum / pairs;
    }
  }

  const double lo = out.raw.minCoeff();
  const double hi = out.raw.maxCoeff();
  if (hi > lo) {
    out.normalized = (out.raw.array() - lo) / (hi - lo);
  } else {
    out.normalized.setZero(size, size);
    out.constant = true;
  }
  return out;
}

}  // namespace carp
