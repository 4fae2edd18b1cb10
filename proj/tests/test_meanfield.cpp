#include "doctest.h"

#include "carp/meanfield.hpp"
#include "carp/synthetic.hpp"
#include "support/oracles.hpp"

#include <iostream>

using namespace carp;
using carp::testing::make_network;

namespace {

const ModelParams kFitted2013{3.04e-3, 1.17e-3, 3.56};
const ModelParams kFitted2017{5.28e-3, 3.03e-3, 2.50};

}  // namespace

TEST_CASE("isolated risk has the closed-form steady state") {
  const auto net = make_network({0.35, 0.8}, {});
  const ModelParams m{0.2, 0.4, 1.3};
  const auto s = fixed_point(net, m);
  REQUIRE(s.converged);
  for (int i = 0; i < 2; ++i) {
    const auto p = poisson_probs(net.risk(i).likelihood, m);
    CHECK(s.p_hat[i] == doctest::Approx(p.p_int / (p.p_int + p.p_rec)).epsilon(1e-12));
  }
}

TEST_CASE("vanishing likelihoods give a vanishing steady state") {
  const auto net = make_network({1e-10, 1e-10, 1e-10}, {{0, 1}, {1, 2}});
  const auto s = fixed_point(net, ModelParams{1.0, 1.0, 1.0});
  REQUIRE(s.converged);
  CHECK(s.p_hat.maxCoeff() < 1e-9);
}

TEST_CASE("two-node network matches a nested-bisection oracle") {
  const auto net = make_network({0.3, 0.6}, {{0, 1}});
  const ModelParams m{0.1, 0.05, 1.0};
  const auto [p0, p1] = carp::testing::two_node_fixed_point(0.3, 0.6, 0.1, 0.05, 1.0);
  const auto s = fixed_point(net, m);
  REQUIRE(s.converged);
  CHECK(std::abs(s.p_hat[0] - p0) < 1e-8);
  CHECK(std::abs(s.p_hat[1] - p1) < 1e-8);
}

TEST_CASE("extended precision agrees with double") {
  const auto net = random_network(20, 60, 0.05, 0.95, 4);
  const auto d = fixed_point<double>(net, kFitted2017);
  const auto ld = fixed_point<long double>(net, kFitted2017);
  REQUIRE(d.converged);
  REQUIRE(ld.converged);
  CHECK((d.p_hat - ld.p_hat.cast<double>()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("non-convergence is reported, not thrown") {
  const auto net = random_network(10, 20, 0.05, 0.95, 1);
  FixedPointOptions o;
  o.max_iter = 1;
  const auto s = fixed_point(net, kFitted2013, o);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 1);
  CHECK(s.residual > o.tol);

  o.max_iter = 0;
  CHECK_THROWS_AS(fixed_point(net, kFitted2013, o), DomainError);
  o = {};
  o.tol = 0;
  CHECK_THROWS_AS(fixed_point(net, kFitted2013, o), DomainError);
}

TEST_CASE("damping changes the path, not the limit") {
  const auto net = random_network(15, 40, 0.05, 0.95, 2);
  FixedPointOptions damped;
  damped.damping = 0.5;
  const auto a = fixed_point(net, kFitted2013);
  const auto b = fixed_point(net, kFitted2013, damped);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK((a.p_hat - b.p_hat).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("monotone iteration from zeros and ones brackets one limit") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto net = random_network(30, 275, 0.05, 0.95, seed);
    const ModelParams m = seed % 2 ? kFitted2013 : kFitted2017;
    Eigen::VectorXd lo = Eigen::VectorXd::Zero(net.size());
    Eigen::VectorXd hi = Eigen::VectorXd::Ones(net.size());
    for (int k = 0; k < 200; ++k) {
      const Eigen::VectorXd lo_next = mean_field_map(net, m, lo);
      const Eigen::VectorXd hi_next = mean_field_map(net, m, hi);
      REQUIRE((lo_next.array() >= lo.array() - 1e-15).all());
      REQUIRE((hi_next.array() <= hi.array() + 1e-15).all());
      REQUIRE((lo_next.array() <= hi_next.array() + 1e-15).all());
      lo = lo_next;
      hi = hi_next;
    }
    FixedPointOptions o;
    o.init = FixedPointInit::Zeros;
    const auto from_zero = fixed_point(net, m, o);
    o.init = FixedPointInit::Ones;
    const auto from_one = fixed_point(net, m, o);
    REQUIRE(from_zero.converged);
    REQUIRE(from_one.converged);
    CHECK((from_zero.p_hat - from_one.p_hat).cwiseAbs().maxCoeff() <= 10 * o.tol);
  }
}

TEST_CASE("fixed point lies between its no-neighbor and all-neighbor bounds") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto net = random_network(40, 300, 0.05, 0.95, 100 + seed);
    const auto s = fixed_point(net, kFitted2013);
    REQUIRE(s.converged);
    for (int i = 0; i < net.size(); ++i) {
      const double L = net.risk(i).likelihood;
      const auto p = poisson_probs(L, kFitted2013);
      const double p_max = prob_activate(L, static_cast<double>(net.degree(i)), kFitted2013);
      CHECK(s.p_hat[i] >= p.p_int / (p.p_int + p.p_rec) - 1e-12);
      CHECK(s.p_hat[i] <= p_max / (p_max + p.p_rec) + 1e-12);
    }
  }
}

TEST_CASE("stationarity residual") {
  const auto net = make_network({0.2, 0.5, 0.9, 0.4}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  const ModelParams m{0.3, 0.2, 1.1};

  SUBCASE("small at the converged fixed point") {
    const auto s = fixed_point(net, m);
    REQUIRE(s.converged);
    CHECK(stationarity_residual(s.p_hat, net, m) <= 2 * FixedPointOptions{}.tol);
  }
  SUBCASE("all-zero vector gives the largest internal activation probability") {
    double expected = 0.0;
    for (int i = 0; i < 4; ++i) expected = std::max(expected, poisson_probs(net.risk(i).likelihood, m).p_int);
    CHECK(stationarity_residual(Eigen::VectorXd::Zero(4), net, m) == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("random vectors match a term-by-term evaluation") {
    Xoshiro256 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd p(4);
      for (int i = 0; i < 4; ++i) p[i] = rng.uniform();
      double worst = 0.0;
      for (int i = 0; i < 4; ++i) {
        const double L = net.risk(i).likelihood;
        double load = 0.0;
        for (int j : net.neighbors(i)) load += p[j];
        const double up = 1.0 - std::pow(1.0 - L, m.alpha) * std::pow(std::pow(1.0 - L, m.beta), load);
        const double stay = 1.0 - std::pow(1.0 - L, m.gamma);
        worst = std::max(worst, std::abs((1 - p[i]) * up + p[i] * stay - p[i]));
      }
      CHECK(stationarity_residual(p, net, m) == doctest::Approx(worst).epsilon(1e-12));
    }
  }
  SUBCASE("input checks") {
    CHECK_THROWS_AS(stationarity_residual(Eigen::VectorXd::Zero(3), net, m), DomainError);
    CHECK_THROWS_AS(stationarity_residual(Eigen::VectorXd::Constant(4, 1.5), net, m), DomainError);
  }
}

TEST_CASE("transition fractions") {
  SUBCASE("isolated risk has no external activation") {
    const auto net = make_network({0.3, 0.6, 0.5}, {{0, 1}});
    const ModelParams m{0.2, 0.3, 1.0};
    const auto s = fixed_point(net, m);
    const auto f = transition_fractions(s, net, m);
    CHECK(f.a_ext[2] == 0.0);
    CHECK(f.A_ext[2] == 0.0);
    CHECK(f.a_ext[0] > 0.0);
  }
  SUBCASE("shares sum to one and recovery is half up to the dropped term") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto net = random_network(50, 515, 0.05, 0.95, seed);
      const auto s = fixed_point(net, kFitted2013);
      REQUIRE(s.converged);
      const auto f = transition_fractions(s, net, kFitted2013);
      for (int i = 0; i < net.size(); ++i) {
        CHECK(std::abs(f.a_int[i] + f.a_ext[i] + f.a_rec[i] - 1.0) <= 1e-12);
        CHECK(f.a_int[i] >= 0.0);
        CHECK(f.a_ext[i] >= 0.0);
        const double total = f.A_int[i] + f.A_ext[i] + f.A_rec[i];
        CHECK(std::abs(f.a_rec[i] - 0.5) <= f.A_both[i] / total + 10 * FixedPointOptions{}.tol);
      }
    }
  }
  SUBCASE("requires a converged steady state") {
    const auto net = make_network({0.3, 0.6}, {{0, 1}});
    SteadyState s;
    s.p_hat = Eigen::VectorXd::Constant(2, 0.5);
    CHECK_THROWS_AS(transition_fractions(s, net, ModelParams{}), DomainError);
  }
}

TEST_CASE("external/internal ratio") {
  SUBCASE("first-order expansion within 2% for small exponents") {
    Xoshiro256 rng(77);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
      const auto net = random_network(20, 80, 0.05, 0.95, 500 + static_cast<std::uint64_t>(trial));
      const ModelParams m{1e-4 + 9.9e-3 * rng.uniform(), 1e-5 + 1e-3 * rng.uniform(), 0.5 + 3 * rng.uniform()};
      const auto s = fixed_point(net, m);
      REQUIRE(s.converged);
      for (int i = 0; i < net.size(); ++i) {
        double load = 0.0;
        for (int j : net.neighbors(i)) load += s.p_hat[j];
        if (m.alpha > 1e-2 || m.beta * load > 1e-2 || load == 0.0) continue;
        const auto r = ext_int_ratio(s, net, m, i);
        CHECK(std::abs(r.exact - r.taylor) / r.exact <= 2e-2);
        CHECK(r.taylor == doctest::Approx(m.beta * load / m.alpha).epsilon(1e-14));
        ++checked;
      }
    }
    CHECK(checked > 200);
  }
  SUBCASE("exact ratio matches the defining quotient") {
    const auto net = make_network({0.3, 0.6}, {{0, 1}});
    const ModelParams m{0.1, 0.05, 1.0};
    const auto s = fixed_point(net, m);
    const auto r = ext_int_ratio(s, net, m, 0);
    const double expected = (1 - std::pow(0.7, 0.05 * s.p_hat[1])) / (1 - std::pow(0.7, 0.1));
    CHECK(r.exact == doctest::Approx(expected).epsilon(1e-10));
  }
  SUBCASE("guard when the internal probability underflows") {
    const auto net = make_network({1e-300, 0.5}, {{0, 1}});
    const ModelParams m{1e-20, 1.0, 1.0};
    const auto s = fixed_point(net, m);
    REQUIRE(s.converged);
    CHECK_THROWS_AS(ext_int_ratio(s, net, m, 0), DomainError);
  }
}

TEST_CASE("mean field tracks the exact chain under weak coupling") {
  Xoshiro256 rng(2718);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 4 + trial;
    const auto net = random_network(n, n + trial, 0.05, 0.95, 900 + static_cast<std::uint64_t>(trial));
    const double beta = 0.1 / (std::max(1, net.max_degree()) * net.likelihoods().maxCoeff());
    const ModelParams m{0.05 + 0.3 * rng.uniform(), beta * rng.uniform(), 0.5 + 2 * rng.uniform()};
    const auto s = fixed_point(net, m);
    REQUIRE(s.converged);
    const auto exact = carp::testing::exact_chain_marginals(net, m);
    const double gap = (exact.marginals - s.p_hat).cwiseAbs().maxCoeff();
    MESSAGE("R=" << n << " mean-field gap " << gap);
    CHECK(gap <= 0.05);
  }
}
