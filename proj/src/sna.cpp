#include "clickstream/sna.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "clickstream/rng.hpp"
#include "clickstream/stats.hpp"
#include "clickstream/table.hpp"

namespace clickstream::sna {

namespace {

void require_same_nodes(const Adjacency& a, const Adjacency& b, const char* who) {
  if (a.size() != b.size()) throw std::domain_error(std::string(who) + ": node sets differ");
  if (!a.labels.empty() && !b.labels.empty() && a.labels != b.labels)
    throw std::domain_error(std::string(who) + ": node labels differ");
}

void require_partition(const Adjacency& a, std::span<const int> partition, const char* who) {
  if (static_cast<Eigen::Index>(partition.size()) != a.size())
    throw std::domain_error(std::string(who) + ": partition size does not match the network");
}

std::vector<Eigen::Index> random_permutation(Eigen::Index n, std::uint64_t seed, std::uint64_t k) {
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  CounterRng rng(seed, k);
  rng.shuffle(std::span<Eigen::Index>(perm));
  return perm;
}

std::string node_name(const Adjacency& a, Eigen::Index i) {
  return a.labels.empty() ? std::to_string(i) : a.labels[static_cast<std::size_t>(i)];
}

}  // namespace

long Adjacency::ties() const {
  long t = 0;
  for (Eigen::Index i = 0; i < size(); ++i)
    for (Eigen::Index j = i + 1; j < size(); ++j) t += bits(i, j) ? 1 : 0;
  return t;
}

void Adjacency::validate() const {
  if (bits.rows() != bits.cols()) throw std::invalid_argument("adjacency: not square");
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != size())
    throw std::invalid_argument("adjacency: label count does not match node count");
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (bits(i, i) != 0) throw std::invalid_argument("adjacency: self-tie");
    for (Eigen::Index j = i + 1; j < size(); ++j) {
      if (bits(i, j) > 1) throw std::invalid_argument("adjacency: non-binary cell");
      if (bits(i, j) != bits(j, i)) throw std::invalid_argument("adjacency: not symmetric");
    }
  }
}

Adjacency comembership_network(std::span<const int> assignment, std::vector<std::string> labels) {
  return exact_match_matrix<int>(assignment, std::move(labels));
}

Adjacency multiplex_and(const Adjacency& a, const Adjacency& b) {
  require_same_nodes(a, b, "multiplex_and");
  Adjacency out;
  out.bits = a.bits.cwiseMin(b.bits);
  out.labels = a.labels.empty() ? b.labels : a.labels;
  return out;
}

double density(const Adjacency& a) {
  const auto n = static_cast<double>(a.size());
  if (n < 2) return 0.0;
  return static_cast<double>(a.ties()) / (n * (n - 1) / 2.0);
}

GroupDensityReport density_by_group(const Adjacency& a, std::span<const int> partition) {
  require_partition(a, partition, "density_by_group");
  std::map<int, GroupDensity> groups;
  for (int g : partition) {
    auto& gd = groups[g];
    gd.group = g;
    ++gd.nodes;
  }
  GroupDensityReport rep;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = i + 1; j < a.size(); ++j) {
      if (!a.tie(i, j)) continue;
      const int gi = partition[static_cast<std::size_t>(i)];
      if (gi == partition[static_cast<std::size_t>(j)]) {
        ++groups[gi].ties;
        ++rep.internal_ties;
      } else {
        ++rep.external_ties;
      }
    }
  }
  for (auto& [g, gd] : groups) {
    gd.dyads = gd.nodes * (gd.nodes - 1) / 2;
    gd.density = gd.dyads > 0 ? static_cast<double>(gd.ties) / static_cast<double>(gd.dyads) : 0.0;
    rep.groups.push_back(gd);
  }
  return rep;
}

std::optional<double> ei_index(const Adjacency& a, std::span<const int> partition) {
  const auto rep = density_by_group(a, partition);
  const long total = rep.internal_ties + rep.external_ties;
  if (total == 0) return std::nullopt;
  return static_cast<double>(rep.external_ties - rep.internal_ties) / static_cast<double>(total);
}

Eigen::VectorXd dyad_vector(const Adjacency& a, std::span<const Eigen::Index> perm) {
  const auto n = a.size();
  Eigen::VectorXd v(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto pi = perm.empty() ? i : perm[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto pj = perm.empty() ? j : perm[static_cast<std::size_t>(j)];
      v(k++) = a.bits(pi, pj);
    }
  }
  return v;
}

QapCorrelation qap_correlation(const Adjacency& a, const Adjacency& b, int n_perm,
                               std::uint64_t seed) {
  require_same_nodes(a, b, "qap_correlation");
  if (n_perm < 1) throw std::domain_error("qap_correlation: n_perm must be >= 1");
  QapCorrelation q;
  q.n_perm = n_perm;
  q.seed = seed;
  const Eigen::VectorXd va = dyad_vector(a);
  q.r_observed = stats::pearson(va, dyad_vector(b));
  if (std::isnan(q.r_observed)) {
    q.undefined = true;
    return q;
  }
  int extreme = 0;
  q.permuted.reserve(static_cast<std::size_t>(n_perm));
  for (int k = 0; k < n_perm; ++k) {
    const auto perm = random_permutation(a.size(), seed, static_cast<std::uint64_t>(k));
    const double r = stats::pearson(va, dyad_vector(b, perm));
    q.permuted.push_back(r);
    if (std::abs(r) >= std::abs(q.r_observed) - 1e-12) ++extreme;
  }
  q.p = (extreme + 1.0) / (n_perm + 1.0);
  return q;
}

QapRegression qap_regression(const Adjacency& y, std::span<const Adjacency> xs, int n_perm,
                             std::uint64_t seed, std::span<const std::string> names) {
  if (n_perm < 1) throw std::domain_error("qap_regression: n_perm must be >= 1");
  if (xs.empty()) throw std::domain_error("qap_regression: no predictors");
  auto name = [&](std::size_t j) {
    return j < names.size() ? names[j] : "x" + std::to_string(j + 1);
  };
  const auto dyads = y.size() * (y.size() - 1) / 2;
  const auto p = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(dyads, p + 1);
  design.col(0).setOnes();
  for (std::size_t j = 0; j < xs.size(); ++j) {
    require_same_nodes(y, xs[j], "qap_regression");
    design.col(static_cast<Eigen::Index>(j) + 1) = dyad_vector(xs[j]);
  }
  for (Eigen::Index j = 1; j <= p; ++j) {
    const auto c = design.col(j);
    if ((c.array() == c(0)).all())
      throw std::domain_error("qap_regression: predictor " + name(static_cast<std::size_t>(j - 1)) +
                              " is constant");
    for (Eigen::Index k = 1; k < j; ++k) {
      const double r = stats::pearson(design.col(k), c);
      if (std::abs(r) > 1.0 - 1e-12)
        throw std::domain_error("qap_regression: predictors " + name(static_cast<std::size_t>(k - 1)) +
                                " and " + name(static_cast<std::size_t>(j - 1)) + " are collinear");
    }
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p + 1) throw std::domain_error("qap_regression: predictors are collinear");

  const Eigen::VectorXd yv = dyad_vector(y);
  const Eigen::VectorXd b = qr.solve(yv);
  QapRegression out;
  out.n_perm = n_perm;
  out.seed = seed;
  out.intercept = b(0);
  out.coefficients = b.tail(p);
  const double tss = (yv.array() - yv.mean()).square().sum();
  const double rss = (yv - design * b).squaredNorm();
  out.r_squared = tss > 0 ? 1.0 - rss / tss : 0.0;

  Eigen::VectorXd extreme = Eigen::VectorXd::Zero(p + 1);
  for (int k = 0; k < n_perm; ++k) {
    const auto perm = random_permutation(y.size(), seed, static_cast<std::uint64_t>(k));
    const Eigen::VectorXd bp = qr.solve(dyad_vector(y, perm));
    for (Eigen::Index j = 0; j <= p; ++j)
      if (std::abs(bp(j)) >= std::abs(b(j)) - 1e-12) extreme(j) += 1.0;
  }
  const Eigen::VectorXd pv = (extreme.array() + 1.0) / (n_perm + 1.0);
  out.intercept_p = pv(0);
  out.p = pv.tail(p);
  return out;
}

void write_edge_list(std::ostream& out, const Adjacency& a) {
  write_row(out, {"source", "target"});
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = i + 1; j < a.size(); ++j)
      if (a.tie(i, j)) write_row(out, {node_name(a, i), node_name(a, j)});
}

}  // namespace clickstream::sna
