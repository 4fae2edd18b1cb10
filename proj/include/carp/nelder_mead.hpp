#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace carp {

struct NelderMeadOptions {
  long max_iter = 2000;
  /// Stop once max f - min f over the simplex falls below this.
  double f_tol = 1e-9;
  double initial_step = 1.0;
  /// Optional box; trial points are clamped coordinatewise.
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  long iterations = 0;
  long evaluations = 0;
  bool converged = false;
};

/// Downhill simplex minimization with the standard coefficients (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2). `on_iteration(x_best, f_best)` is
/// called once per iteration if set.
template <typename Objective>
NelderMeadResult nelder_mead(
    Objective&& f, const Eigen::VectorXd& start, const NelderMeadOptions& options,
    const std::function<void(const Eigen::VectorXd&, double)>& on_iteration = {}) {
  const Eigen::Index n = start.size();
  NelderMeadResult out;

  auto clamp = [&](Eigen::VectorXd x) {
    if (options.lower.size() == n) x = x.cwiseMax(options.lower);
    if (options.upper.size() == n) x = x.cwiseMin(options.upper);
    return x;
  };
  auto eval = [&](const Eigen::VectorXd& x) {
    ++out.evaluations;
    const double v = f(x);
    return std::isnan(v) ? HUGE_VAL : v;
  };

  std::vector<Eigen::VectorXd> simplex;
  simplex.reserve(static_cast<std::size_t>(n + 1));
  simplex.push_back(clamp(start));
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd v = simplex.front();
    v[k] += options.initial_step;
    v = clamp(v);
    // Stepping into the upper bound collapses the vertex; step down instead.
    if (v[k] == simplex.front()[k]) v[k] -= options.initial_step;
    simplex.push_back(clamp(v));
  }
  std::vector<double> values(simplex.size());
  std::transform(simplex.begin(), simplex.end(), values.begin(), eval);

  std::vector<std::size_t> order(simplex.size());
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  };

  for (out.iterations = 0; out.iterations < options.max_iter; ++out.iterations) {
    sort_simplex();
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];
    if (on_iteration) on_iteration(simplex[best], values[best]);
    if (values[worst] - values[best] < options.f_tol) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < simplex.size(); ++k) {
      if (k != worst) centroid += simplex[k];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = clamp(centroid + (centroid - simplex[worst]));
    const double f_reflected = eval(reflected);
    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded = clamp(centroid + 2.0 * (centroid - simplex[worst]));
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }

    const bool outside = f_reflected < values[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < std::min(f_reflected, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }

    for (std::size_t k = 0; k < simplex.size(); ++k) {
      if (k == best) continue;
      simplex[k] = simplex[best] + 0.5 * (simplex[k] - simplex[best]);
      values[k] = eval(simplex[k]);
    }
  }

  sort_simplex();
  out.x = simplex[order.front()];
  out.f = values[order.front()];
  return out;
}

}  // namespace carp
