#include "carp/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <set>

namespace carp {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "Economic", "Environmental", "Geopolitical", "Societal", "Technological"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view to_string(Category c) {
  return kCategoryNames.at(static_cast<std::size_t>(c));
}

Category parse_category(std::string_view name) {
  for (std::size_t k = 0; k < kCategoryNames.size(); ++k) {
    if (iequals(name, kCategoryNames[k])) return static_cast<Category>(k);
  }
  throw DomainError("unknown category '" + std::string(name) + "'");
}

RiskNetwork::RiskNetwork(std::vector<Risk> risks, std::vector<Edge> edges)
    : risks_(std::move(risks)) {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const Risk& r = risks_[static_cast<std::size_t>(i)];
    if (r.id != i) {
      throw DomainError("risk ids must be contiguous from 0; found id " +
                        std::to_string(r.id) + " at position " + std::to_string(i));
    }
    if (!(r.likelihood > 0.0 && r.likelihood < 1.0)) {
      throw DomainError("normalized likelihood of risk " + std::to_string(i) +
                        " must lie strictly inside (0,1)");
    }
  }

  std::set<Edge> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw DomainError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                        ") references an unknown risk id");
    }
    if (a == b) throw DomainError("self-loop on risk " + std::to_string(a));
    Edge e{std::min(a, b), std::max(a, b)};
    if (!seen.insert(e).second) {
      throw DomainError("duplicate edge (" + std::to_string(e.first) + "," +
                        std::to_string(e.second) + ")");
    }
  }
  edges_.assign(seen.begin(), seen.end());

  adjacency_list_.assign(static_cast<std::size_t>(n), {});
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * edges_.size());
  for (auto [a, b] : edges_) {
    adjacency_list_[static_cast<std::size_t>(a)].push_back(b);
    adjacency_list_[static_cast<std::size_t>(b)].push_back(a);
    triplets.emplace_back(a, b, 1.0);
    triplets.emplace_back(b, a, 1.0);
  }
  for (auto& nb : adjacency_list_) std::sort(nb.begin(), nb.end());

  adjacency_.resize(n, n);
  adjacency_.setFromTriplets(triplets.begin(), triplets.end());
  adjacency_.makeCompressed();

  likelihood_.resize(n);
  for (int i = 0; i < n; ++i) likelihood_[i] = risks_[static_cast<std::size_t>(i)].likelihood;
}

void RiskNetwork::check_id(RiskId i) const {
  if (i < 0 || i >= size()) {
    throw DomainError("risk id " + std::to_string(i) + " out of range [0," +
                      std::to_string(size()) + ")");
  }
}

const Risk& RiskNetwork::risk(RiskId i) const {
  check_id(i);
  return risks_[static_cast<std::size_t>(i)];
}

const std::vector<RiskId>& RiskNetwork::neighbors(RiskId i) const {
  check_id(i);
  return adjacency_list_[static_cast<std::size_t>(i)];
}

int RiskNetwork::max_degree() const {
  int best = 0;
  for (const auto& nb : adjacency_list_) best = std::max(best, static_cast<int>(nb.size()));
  return best;
}

bool RiskNetwork::has_edge(RiskId i, RiskId j) const {
  const auto& nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

RiskNetwork RiskNetwork::with_likelihood(RiskId i, double likelihood) const {
  check_id(i);
  auto risks = risks_;
  risks[static_cast<std::size_t>(i)].likelihood = likelihood;
  return RiskNetwork(std::move(risks), edges_);
}

NetworkStats RiskNetwork::stats() const {
  NetworkStats s;
  const int n = size();
  s.nodes = n;
  s.edges = edge_count();
  if (n == 0) return s;
  s.average_degree = 2.0 * s.edges / n;
  s.edge_probability = n > 1 ? 2.0 * s.edges / (static_cast<double>(n) * (n - 1)) : 0.0;

  double cc_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& nb = neighbors(i);
    const std::size_t k = nb.size();
    if (k < 2) continue;
    int links = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        if (has_edge(nb[a], nb[b])) ++links;
      }
    }
    cc_sum += 2.0 * links / (static_cast<double>(k) * (k - 1));
  }
  s.average_clustering = cc_sum / n;

  int diameter = 0;
  std::vector<int> dist(static_cast<std::size_t>(n));
  for (int src = 0; src < n; ++src) {
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<int> queue{src};
    dist[static_cast<std::size_t>(src)] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : neighbors(u)) {
        if (dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          queue.push_back(v);
        }
      }
    }
    for (int d : dist) {
      if (d < 0) s.connected = false;
      diameter = std::max(diameter, d);
    }
  }
  s.diameter = s.connected ? diameter : -1;
  return s;
}

void ModelParams::validate() const {
  for (double v : {alpha, beta, gamma}) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw DomainError("model parameters alpha, beta, gamma must be positive and finite");
    }
  }
}

void EventPanel::validate_for(const RiskNetwork& network, int min_months) const {
  if (risks() != network.size()) {
    throw DomainError("event panel has " + std::to_string(risks()) +
                      " rows but the network has " + std::to_string(network.size()) +
                      " risks");
  }
  if (months() < min_months) {
    throw DomainError("event panel needs at least " + std::to_string(min_months) +
                      " months");
  }
  if ((states.array() > 1).any()) throw DomainError("event panel cells must be 0 or 1");
}

}  // namespace carp
