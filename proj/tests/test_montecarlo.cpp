#include "doctest.h"

#include "carp/meanfield.hpp"
#include "carp/montecarlo.hpp"
#include "carp/parallel.hpp"
#include "carp/synthetic.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace carp;
using carp::testing::make_network;

namespace {

int argmax(const Eigen::VectorXd& v) {
  Eigen::Index k = 0;
  v.maxCoeff(&k);
  return static_cast<int>(k);
}

}  // namespace

TEST_CASE("frequencies are exact multiples of 1/runs") {
  const auto net = random_network(10, 20, 0.05, 0.95, 1);
  SimulationConfig cfg;
  cfg.runs = 1000;
  cfg.horizon = 30;
  cfg.seed = 5;
  const auto traj = simulate(net, ModelParams{0.1, 0.1, 1.0}, cfg);
  const Eigen::MatrixXd f = traj.frequencies();
  CHECK(f.rows() == 10);
  CHECK(f.cols() == 30);
  CHECK(((f * 1000.0).array() - (f * 1000.0).array().round()).abs().maxCoeff() < 1e-9);
  CHECK(traj.counts.col(0).sum() == 0);
  CHECK((f.array() >= 0).all());
  CHECK((f.array() <= 1).all());
}

TEST_CASE("isolated risk converges to the closed-form frequency") {
  const auto net = make_network({0.4}, {});
  const ModelParams m{0.3, 0.1, 1.0};
  const auto p = poisson_probs(0.4, m);
  const double target = p.p_int / (p.p_int + p.p_rec);
  SimulationConfig cfg;
  cfg.runs = 20000;
  cfg.horizon = 200;
  cfg.seed = 11;
  const auto f = simulate(net, m, cfg).frequencies();
  const double sigma = std::sqrt(target * (1 - target) / cfg.runs);
  CHECK(std::abs(f(0, cfg.horizon - 1) - target) < 3 * sigma);
}

TEST_CASE("late-time frequencies agree with the mean field under weak coupling") {
  const auto net = random_network(8, 10, 0.05, 0.95, 42);
  const double beta = 0.1 / (net.max_degree() * net.likelihoods().maxCoeff());
  const ModelParams m{0.2, beta, 1.0};
  const auto steady = fixed_point(net, m);
  REQUIRE(steady.converged);
  const auto exact = carp::testing::exact_chain_marginals(net, m);
  SimulationConfig cfg;
  cfg.runs = 5000;
  cfg.horizon = 300;
  cfg.seed = 3;
  const auto f = simulate(net, m, cfg).frequencies();
  for (int i = 0; i < net.size(); ++i) {
    const double q = exact.marginals[i];
    const double sigma = std::sqrt(q * (1 - q) / cfg.runs);
    const double allowance = std::abs(exact.marginals[i] - steady.p_hat[i]);
    CHECK(std::abs(f(i, cfg.horizon - 1) - steady.p_hat[i]) <= 3 * sigma + allowance);
  }
}

TEST_CASE("simulation is deterministic regardless of thread count") {
  const auto net = random_network(15, 40, 0.05, 0.95, 2);
  const ModelParams m{0.05, 0.05, 1.0};
  SimulationConfig cfg;
  cfg.runs = 97;
  cfg.horizon = 40;
  cfg.seed = 123;
  set_thread_limit(1);
  const auto a = simulate(net, m, cfg);
  set_thread_limit(3);
  const auto b = simulate(net, m, cfg);
  set_thread_limit(8);
  const auto c = simulate(net, m, cfg);
  set_thread_limit(0);
  CHECK(a.counts == b.counts);
  CHECK(a.counts == c.counts);
  cfg.seed = 124;
  CHECK(simulate(net, m, cfg).counts != a.counts);
}

TEST_CASE("adding runs never changes earlier runs") {
  const auto net = random_network(10, 20, 0.05, 0.95, 6);
  const ModelParams m{0.1, 0.1, 1.0};
  SimulationConfig cfg;
  cfg.runs = 20;
  cfg.horizon = 25;
  cfg.keep_panels = true;
  const auto small = simulate(net, m, cfg);
  cfg.runs = 50;
  const auto big = simulate(net, m, cfg);
  for (int r = 0; r < 20; ++r) CHECK(small.panels[static_cast<std::size_t>(r)] == big.panels[static_cast<std::size_t>(r)]);
}

TEST_CASE("raising every likelihood never lowers a frequency (common random numbers)") {
  // Pathwise monotone whenever every activation probability stays below every
  // continuation probability, which holds at these parameter magnitudes.
  const auto low = random_network(20, 80, 0.05, 0.6, 9);
  std::vector<Risk> risks = low.risks();
  for (auto& r : risks) r.likelihood = std::min(0.95, r.likelihood + 0.2);
  const RiskNetwork high(risks, low.edges());
  const ModelParams m{5.28e-3, 3.03e-3, 2.5};
  SimulationConfig cfg;
  cfg.runs = 300;
  cfg.horizon = 80;
  cfg.seed = 77;
  cfg.keep_panels = true;
  const auto a = simulate(low, m, cfg);
  const auto b = simulate(high, m, cfg);
  CHECK((b.counts.array() >= a.counts.array()).all());
  for (std::size_t r = 0; r < a.panels.size(); ++r) {
    CHECK((b.panels[r].states.array() >= a.panels[r].states.array()).all());
  }
}

TEST_CASE("frequencies saturate") {
  const auto net = random_network(20, 40, 0.05, 0.95, 12);
  const double beta = 0.1 / (net.max_degree() * net.likelihoods().maxCoeff());
  const ModelParams m{0.05, beta, 1.0};
  SimulationConfig cfg;
  cfg.runs = 2000;
  cfg.horizon = 400;
  cfg.seed = 8;
  const auto f = simulate(net, m, cfg).frequencies();
  auto window_variance = [&](int begin, int end) {
    double total = 0.0;
    for (int i = 0; i < net.size(); ++i) {
      const Eigen::VectorXd w = f.row(i).segment(begin, end - begin).transpose();
      total += (w.array() - w.mean()).square().mean();
    }
    return total;
  };
  CHECK(window_variance(300, 400) < window_variance(0, 100));
}

TEST_CASE("initial states") {
  const auto net = random_network(6, 5, 0.05, 0.95, 1);
  const ModelParams m{0.1, 0.1, 1.0};
  SimulationConfig cfg;
  cfg.runs = 10;
  cfg.horizon = 1;
  cfg.initial = InitialState::active();
  CHECK((simulate(net, m, cfg).counts.array() == 10).all());
  Eigen::VectorXd bits(6);
  bits << 1, 0, 1, 0, 0, 1;
  cfg.initial = InitialState::exact(bits);
  CHECK(simulate(net, m, cfg).counts.col(0) == (bits * 10).cast<std::int64_t>());
  cfg.initial = InitialState::bernoulli(Eigen::VectorXd::Constant(6, 0.5));
  cfg.runs = 4000;
  const auto counts = simulate(net, m, cfg).counts;
  for (int i = 0; i < 6; ++i) CHECK(std::abs(counts(i, 0) / 4000.0 - 0.5) < 3 * std::sqrt(0.25 / 4000));

  bits[0] = 0.5;
  cfg.initial = InitialState::exact(bits);
  CHECK_THROWS_AS(simulate(net, m, cfg), DomainError);
  cfg.initial = InitialState::bernoulli(Eigen::VectorXd::Constant(5, 0.5));
  CHECK_THROWS_AS(simulate(net, m, cfg), DomainError);
}

TEST_CASE("configuration guards") {
  const auto net = random_network(6, 5, 0.05, 0.95, 1);
  const ModelParams m{0.1, 0.1, 1.0};
  SimulationConfig cfg;
  cfg.runs = 0;
  CHECK_THROWS_AS(simulate(net, m, cfg), DomainError);
  cfg.runs = 10;
  cfg.horizon = 0;
  CHECK_THROWS_AS(simulate(net, m, cfg), DomainError);
  cfg.horizon = 100;
  cfg.budget = 1000;
  CHECK_THROWS_AS(simulate(net, m, cfg), DomainError);
}

TEST_CASE("breadth-first layers") {
  const auto net = make_network({0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, {{0, 1}, {0, 2}, {1, 3}, {3, 4}});
  const auto layers = bfs_layers(net, 0);
  REQUIRE(layers.size() == 4);
  CHECK(layers[1] == std::vector<RiskId>{1, 2});
  CHECK(layers[2] == std::vector<RiskId>{3});
  CHECK(layers[3] == std::vector<RiskId>{4});
  CHECK_THROWS_AS(bfs_layers(net, 6), DomainError);
}

TEST_CASE("temporal influence") {
  const ModelParams m{5.28e-3, 3.03e-3, 2.5};
  SimulationConfig cfg;
  cfg.runs = 2000;
  cfg.horizon = 40;
  cfg.seed = 4;

  SUBCASE("nothing has propagated at month zero") {
    const auto net = random_network(30, 275, 0.05, 0.95, 3);
    const auto ti = temporal_influence(net, m, 0, cfg);
    REQUIRE(ti.one_hop_curve().size() == cfg.horizon);
    CHECK(ti.one_hop_curve()[0] == 0.0);
    CHECK(ti.two_hop_curve()[0] == 0.0);
    CHECK(ti.one_hop.size() == static_cast<std::size_t>(net.degree(0)));
    // Common random numbers keep the forced ensemble above the baseline here.
    CHECK((ti.one_hop_runs.array() >= 0).all());
  }
  SUBCASE("isolated source has empty curves") {
    const auto net = make_network({0.5, 0.5, 0.5}, {{1, 2}});
    const auto ti = temporal_influence(net, m, 0, cfg);
    CHECK(ti.one_hop.empty());
    CHECK(ti.two_hop.empty());
    CHECK(ti.one_hop_curve().size() == 0);
  }
  SUBCASE("invalid source") {
    const auto net = make_network({0.5, 0.5}, {{0, 1}});
    CHECK_THROWS_AS(temporal_influence(net, m, 2, cfg), DomainError);
  }
  SUBCASE("star: the hub reacts before the other leaves") {
    // Source is a leaf; its one-hop layer is the hub and its two-hop layer
    // holds the remaining leaves.
    std::vector<std::pair<int, int>> edges;
    for (int leaf = 1; leaf < 12; ++leaf) edges.emplace_back(0, leaf);
    const auto net = make_network(std::vector<double>(12, 0.9), edges);
    cfg.runs = 20000;
    cfg.horizon = 60;
    const auto ti = temporal_influence(net, m, 1, cfg);
    REQUIRE(ti.one_hop == std::vector<RiskId>{0});
    REQUIRE(ti.two_hop.size() == 10);
    CHECK(argmax(ti.one_hop_curve()) < argmax(ti.two_hop_curve()));
  }
  SUBCASE("deterministic across thread counts") {
    const auto net = random_network(20, 80, 0.05, 0.95, 5);
    set_thread_limit(1);
    const auto a = temporal_influence(net, m, 3, cfg);
    set_thread_limit(4);
    const auto b = temporal_influence(net, m, 3, cfg);
    set_thread_limit(0);
    CHECK(a.one_hop_runs == b.one_hop_runs);
    CHECK(a.two_hop_runs == b.two_hop_runs);
  }
}
