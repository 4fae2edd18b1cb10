#pragma once

#include "carp/meanfield.hpp"
#include "carp/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace carp {

/// Likelihood assigned to a knocked-out risk. Keeps the transition
/// probabilities well defined; the knocked-out risk's internal activation
/// probability is about alpha * 1e-12.
inline constexpr double kKnockoutLikelihood = 1e-12;

/// Copy of `network` with risk i disabled. Edges are kept.
RiskNetwork knockout(const RiskNetwork& network, RiskId i);

/// values(i, j) is the drop in risk j's steady-state external-activation
/// share when risk i is knocked out. The diagonal is zero.
struct InfluenceMatrix {
  Eigen::MatrixXd values;
  ModelParams params;
  double tol = 0.0;
};

/// Throws ConvergenceError naming the first risk whose knockout steady state
/// fails to converge. Knockouts run concurrently; assembly is by risk index.
InfluenceMatrix influence_matrix(const RiskNetwork& network, const ModelParams& params,
                                 const FixedPointOptions& options = {});

/// Risks j != i ordered by decreasing I(i, j), ties by id.
std::vector<RiskId> ranked_targets(const InfluenceMatrix& infl, RiskId i);

/// True if the deg(i) largest entries of row i are exactly the neighbors of i.
bool top_targets_are_neighbors(const InfluenceMatrix& infl, const RiskNetwork& network, RiskId i);

/// Category-level influence over the categories present in the network, in
/// enum order. Off-diagonal blocks are averaged over all |c_a||c_b| pairs;
/// diagonal blocks over the |c|(|c|-1) ordered pairs of distinct risks. The
/// normalized matrix is a min-max rescaling over all entries; a constant
/// matrix normalizes to zeros and sets `constant`.
struct CategoryInfluence {
  std::vector<Category> categories;
  Eigen::MatrixXd raw;
  Eigen::MatrixXd normalized;
  bool constant = false;
};

CategoryInfluence category_influence(const InfluenceMatrix& infl, const RiskNetwork& network);

}  // namespace carp
