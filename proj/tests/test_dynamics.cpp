#include "doctest.h"

#include "carp/dynamics.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace carp;
using carp::testing::make_network;

TEST_CASE("poisson probabilities") {
  SUBCASE("exponent one is the identity") {
    const auto p = poisson_probs(0.5, ModelParams{1.0, 1.0, 1.0});
    CHECK(p.p_int == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("table-scale alpha against a 40-digit reference") {
    // 1 - 0.5^0.00304 = 0.0021049489101525921262... (mpmath, 40 digits)
    const auto p = poisson_probs(0.5, ModelParams{3.04e-3, 1.0, 1.0});
    CHECK(std::abs(p.p_int - 0.002104948910152592126) < 1e-17);
  }
  SUBCASE("continuation and recovery are complementary") {
    const auto p = poisson_probs(0.3, ModelParams{0.1, 0.2, 0.7});
    CHECK(p.p_con == doctest::Approx(0.2209440873295509).epsilon(1e-14));
    CHECK(p.p_rec == 1.0 - p.p_con);
  }
  SUBCASE("gamma one gives p_rec = 1 - L") {
    for (double L : {1e-6, 0.1, 0.37, 0.5, 0.9, 0.999}) {
      const auto p = poisson_probs(L, ModelParams{1.0, 1.0, 1.0});
      CHECK(p.p_rec == doctest::Approx(1.0 - L).epsilon(1e-15));
    }
  }
  SUBCASE("vanishing likelihood") {
    const auto p = poisson_probs(1e-300, ModelParams{3.0, 3.0, 3.0});
    CHECK(p.p_int < 1e-299);
    CHECK(p.p_ext < 1e-299);
    CHECK(p.p_con < 1e-299);
    CHECK(p.p_int > 0.0);
  }
  SUBCASE("endpoints rejected") {
    CHECK_THROWS_AS(poisson_probs(0.0, ModelParams{}), DomainError);
    CHECK_THROWS_AS(poisson_probs(1.0, ModelParams{}), DomainError);
    CHECK_THROWS_AS(poisson_probs(-0.1, ModelParams{}), DomainError);
  }
  SUBCASE("matches the naive pow formula") {
    Xoshiro256 rng(3);
    for (int k = 0; k < 500; ++k) {
      const double L = 0.001 + 0.998 * rng.uniform();
      const ModelParams m{std::exp(-8 + 10 * rng.uniform()), std::exp(-8 + 10 * rng.uniform()),
                          std::exp(-3 + 5 * rng.uniform())};
      const auto p = poisson_probs(L, m);
      CHECK(p.p_int == doctest::Approx(1 - std::pow(1 - L, m.alpha)).epsilon(1e-10));
      CHECK(p.p_ext == doctest::Approx(1 - std::pow(1 - L, m.beta)).epsilon(1e-10));
      CHECK(p.p_con == doctest::Approx(1 - std::pow(1 - L, m.gamma)).epsilon(1e-10));
    }
  }
}

TEST_CASE("activation probability given active neighbors") {
  // Choose alpha, beta so that p_int = 0.1 and p_ext = 0.2 at L = 0.5.
  const double L = 0.5;
  const ModelParams m{std::log(0.9) / std::log(0.5), std::log(0.8) / std::log(0.5), 1.0};
  CHECK(prob_activate(L, 2.0, m) == doctest::Approx(0.424).epsilon(1e-13));
  CHECK(prob_activate(L, 0.0, m) == poisson_probs(L, m).p_int);

  double last = -1.0;
  for (int k = 0; k <= 30; ++k) {
    const double p = prob_activate(L, static_cast<double>(k), m);
    CHECK(p >= last);
    CHECK(p == doctest::Approx(carp::testing::naive_activation(L, m.alpha, m.beta, k)).epsilon(1e-12));
    last = p;
  }
}

TEST_CASE("activation on a network state counts active neighbors only") {
  const auto net = make_network({0.3, 0.5, 0.7, 0.4}, {{0, 1}, {0, 2}, {2, 3}});
  const ModelParams m{0.2, 0.3, 1.0};
  auto s = dormant_state(net);
  for (int i = 0; i < net.size(); ++i) {
    CHECK(prob_activate(i, s, net, m) == poisson_probs(net.risk(i).likelihood, m).p_int);
  }
  s.bits << 1, 1, 0, 1;
  CHECK(active_neighbors(0, s, net) == 1);
  CHECK(active_neighbors(2, s, net) == 2);
  // Independent of the risk's own state.
  auto flipped = s;
  flipped.bits[0] = 0;
  CHECK(prob_activate(0, s, net, m) == prob_activate(0, flipped, net, m));
  CHECK(prob_activate(2, s, net, m) ==
        doctest::Approx(carp::testing::naive_activation(0.7, 0.2, 0.3, 2)).epsilon(1e-13));
  CHECK_THROWS_AS(prob_activate(4, s, net, m), DomainError);
  NetworkState wrong;
  wrong.bits.setZero(3);
  CHECK_THROWS_AS(prob_activate(0, wrong, net, m), DomainError);
}

TEST_CASE("step consumes one uniform per risk in id order") {
  const auto net = make_network({0.3, 0.5, 0.7, 0.4}, {{0, 1}, {0, 2}, {2, 3}});
  const ModelParams m{0.5, 0.8, 0.6};
  NetworkState s;
  s.bits.resize(4);
  s.bits << 1, 0, 0, 1;
  s.time = 5;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Xoshiro256 rng(seed);
    Xoshiro256 replay(seed);
    const auto next = step(s, net, m, rng);
    CHECK(next.time == 6);
    for (int i = 0; i < 4; ++i) {
      const double u = replay.uniform();
      const double L = net.risk(i).likelihood;
      int k = 0;
      for (int j : net.neighbors(i)) k += s.bits[j];
      const double p = s.bits[i] ? carp::testing::naive_continue(L, m.gamma)
                                 : carp::testing::naive_activation(L, m.alpha, m.beta, k);
      CHECK(next.bits[i] == (u < p ? 1 : 0));
    }
    CHECK(rng() == replay());
  }
}

TEST_CASE("step is deterministic for a fixed seed") {
  const auto net = make_network({0.3, 0.5, 0.7}, {{0, 1}, {1, 2}});
  const ModelParams m{0.3, 0.3, 0.5};
  Xoshiro256 a(99), b(99);
  NetworkState sa = dormant_state(net), sb = dormant_state(net);
  for (int t = 0; t < 200; ++t) {
    sa = step(sa, net, m, a);
    sb = step(sb, net, m, b);
    REQUIRE(sa == sb);
  }
}

TEST_CASE("vanishing rates keep a dormant network dormant") {
  const auto net = make_network({1e-9, 1e-9, 1e-9}, {{0, 1}, {1, 2}, {0, 2}});
  const ModelParams m{1.0, 1.0, 1.0};
  Xoshiro256 rng(1);
  NetworkState s = dormant_state(net);
  for (int t = 0; t < 10000; ++t) s = step(s, net, m, rng);
  CHECK(s.bits.cast<int>().sum() == 0);
}

TEST_CASE("stay-active frequency within 3 sigma of p_con") {
  const auto net = make_network({0.4}, {});
  const ModelParams m{0.1, 0.1, 1.7};
  const double p_con = carp::testing::naive_continue(0.4, 1.7);
  NetworkState active;
  active.bits.setOnes(1);
  Xoshiro256 rng(2024);
  const int n = 100000;
  int stayed = 0;
  for (int k = 0; k < n; ++k) stayed += step(active, net, m, rng).bits[0];
  const double sigma = std::sqrt(p_con * (1 - p_con) / n);
  CHECK(std::abs(static_cast<double>(stayed) / n - p_con) < 3 * sigma);
}

TEST_CASE("update is synchronous, not sequential") {
  // Risk 0 active, risk 1 dormant. Risk 1 must see the old state of risk 0.
  const auto net = make_network({0.5, 0.5}, {{0, 1}});
  const ModelParams m{0.01, 3.0, 0.2};
  const double sync = carp::testing::naive_activation(0.5, m.alpha, m.beta, 1);
  const double keep = carp::testing::naive_continue(0.5, m.gamma);
  const double sequential =
      keep * sync + (1 - keep) * carp::testing::naive_activation(0.5, m.alpha, m.beta, 0);
  NetworkState s;
  s.bits.resize(2);
  s.bits << 1, 0;
  Xoshiro256 rng(8);
  const int n = 50000;
  int activated = 0;
  for (int k = 0; k < n; ++k) activated += step(s, net, m, rng).bits[1];
  const double freq = static_cast<double>(activated) / n;
  const double sigma = std::sqrt(sync * (1 - sync) / n);
  CHECK(std::abs(freq - sync) < 3 * sigma);
  CHECK(std::abs(freq - sequential) > 100 * sigma);
}
