#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace clickstream::sna {

using BitMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Undirected binary network: symmetric, zero diagonal.
struct Adjacency {
  BitMatrix bits;
  std::vector<std::string> labels;

  Eigen::Index size() const { return bits.rows(); }
  bool tie(Eigen::Index i, Eigen::Index j) const { return bits(i, j) != 0; }
  /// Undirected tie count.
  long ties() const;
  /// Throws std::invalid_argument unless square, symmetric, 0/1 with a zero
  /// diagonal and labels match the node count (or are empty).
  void validate() const;
};

/// Builds an adjacency from a predicate over node pairs i < j.
template <typename Pred>
Adjacency make_adjacency(Eigen::Index n, Pred linked, std::vector<std::string> labels = {}) {
  Adjacency a;
  a.bits = BitMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (linked(i, j)) a.bits(i, j) = a.bits(j, i) = 1;
  a.labels = std::move(labels);
  return a;
}

/// Tie iff two nodes share a value.
template <typename T>
Adjacency exact_match_matrix(std::span<const T> attribute, std::vector<std::string> labels = {}) {
  return make_adjacency(
      static_cast<Eigen::Index>(attribute.size()),
      [&](Eigen::Index i, Eigen::Index j) {
        return attribute[static_cast<std::size_t>(i)] == attribute[static_cast<std::size_t>(j)];
      },
      std::move(labels));
}

/// Tie iff two nodes share a cluster or category.
Adjacency comembership_network(std::span<const int> assignment, std::vector<std::string> labels = {});

/// Elementwise AND. Throws std::domain_error when the node sets differ.
Adjacency multiplex_and(const Adjacency& a, const Adjacency& b);

/// ties / (n(n-1)/2); 0 for fewer than two nodes.
double density(const Adjacency& a);

struct GroupDensity {
  int group = 0;
  long nodes = 0;
  long ties = 0;   // within-group ties
  long dyads = 0;  // within-group dyads
  double density = 0.0;
};

struct GroupDensityReport {
  std::vector<GroupDensity> groups;  // ascending group id
  long internal_ties = 0;
  long external_ties = 0;
};

GroupDensityReport density_by_group(const Adjacency& a, std::span<const int> partition);

/// (E - I) / (E + I); empty when the network has no ties.
std::optional<double> ei_index(const Adjacency& a, std::span<const int> partition);

/// Upper-triangle dyad values (i < j, row by row) after relabeling nodes by
/// perm: cell (i, j) of the result is a(perm[i], perm[j]).
Eigen::VectorXd dyad_vector(const Adjacency& a, std::span<const Eigen::Index> perm = {});

struct QapCorrelation {
  double r_observed = 0.0;
  double p = 1.0;
  int n_perm = 0;
  std::uint64_t seed = 0;
  bool undefined = false;  // a constant matrix: correlation has no value
  std::vector<double> permuted;  // r for each replicate
};

/// Pearson r over dyads with a joint row-column permutation test on b.
/// p = (#{|r_perm| >= |r_obs|} + 1) / (n_perm + 1). Replicate k draws from
/// CounterRng(seed, k).
QapCorrelation qap_correlation(const Adjacency& a, const Adjacency& b, int n_perm, std::uint64_t seed);

struct QapRegression {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  double r_squared = 0.0;
  double intercept_p = 1.0;
  Eigen::VectorXd p;  // per coefficient, add-one convention
  int n_perm = 0;
  std::uint64_t seed = 0;
};

/// Linear probability model over dyads, permuting y jointly by rows and
/// columns. Throws std::domain_error naming the pair when two predictors are
/// collinear, or naming a predictor that is constant.
QapRegression qap_regression(const Adjacency& y, std::span<const Adjacency> xs, int n_perm,
                             std::uint64_t seed, std::span<const std::string> names = {});

/// "source<TAB>target" per undirected tie, labels when present.
void write_edge_list(std::ostream& out, const Adjacency& a);

}  // namespace clickstream::sna
