#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace carp {

/// Invalid input, violated precondition, or a model domain error.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method stopped before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Category : int {
  Economic = 0,
  Environmental,
  Geopolitical,
  Societal,
  Technological,
};

inline constexpr int kCategoryCount = 5;
inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::Economic, Category::Environmental, Category::Geopolitical,
    Category::Societal, Category::Technological};

std::string_view to_string(Category c);
/// Case-insensitive; throws DomainError for names outside the five categories.
Category parse_category(std::string_view name);

using RiskId = int;

struct Risk {
  RiskId id = 0;
  std::string name;
  Category category = Category::Economic;
  double raw_likelihood = 0.0;
  double likelihood = 0.0;  // normalized L_i, strictly inside (0,1)

  bool operator==(const Risk&) const = default;
};

struct NetworkStats {
  int nodes = 0;
  int edges = 0;
  double average_degree = 0.0;
  double edge_probability = 0.0;
  double average_clustering = 0.0;
  /// Longest shortest path over connected pairs; -1 if the graph is disconnected.
  int diameter = 0;
  bool connected = true;
};

/// Undirected risk graph. Immutable after construction; every invariant is
/// checked in the constructor.
class RiskNetwork {
 public:
  using Edge = std::pair<RiskId, RiskId>;

  RiskNetwork() = default;
  RiskNetwork(std::vector<Risk> risks, std::vector<Edge> edges);

  int size() const { return static_cast<int>(risks_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const std::vector<Risk>& risks() const { return risks_; }
  const Risk& risk(RiskId i) const;
  /// Edges as (min, max) pairs, sorted.
  const std::vector<Edge>& edges() const { return edges_; }
  /// Sorted neighbor ids N_i.
  const std::vector<RiskId>& neighbors(RiskId i) const;
  int degree(RiskId i) const { return static_cast<int>(neighbors(i).size()); }
  int max_degree() const;
  bool has_edge(RiskId i, RiskId j) const;

  /// Normalized likelihoods L as a dense vector.
  const Eigen::VectorXd& likelihoods() const { return likelihood_; }
  /// Symmetric 0/1 adjacency in compressed column form.
  const Eigen::SparseMatrix<double>& adjacency() const { return adjacency_; }

  /// Copy with risk i's normalized likelihood replaced.
  RiskNetwork with_likelihood(RiskId i, double likelihood) const;

  NetworkStats stats() const;

  bool operator==(const RiskNetwork& other) const {
    return risks_ == other.risks_ && edges_ == other.edges_;
  }

 private:
  void check_id(RiskId i) const;

  std::vector<Risk> risks_;
  std::vector<Edge> edges_;
  std::vector<std::vector<RiskId>> adjacency_list_;
  Eigen::VectorXd likelihood_;
  Eigen::SparseMatrix<double> adjacency_;
};

/// The three positive rate multipliers: internal activation, external
/// activation, and continuation.
struct ModelParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;

  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

using StateMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Binary risk-by-month activity history. Column t is the network state at
/// month t.
struct EventPanel {
  StateMatrix states;
  std::optional<std::string> start_label;

  int risks() const { return static_cast<int>(states.rows()); }
  int months() const { return static_cast<int>(states.cols()); }

  /// Throws DomainError unless every cell is 0/1 and dimensions fit `network`.
  void validate_for(const RiskNetwork& network, int min_months = 2) const;
  bool operator==(const EventPanel&) const = default;
};

}  // namespace carp
