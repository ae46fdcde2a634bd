#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "clickstream/rng.hpp"

namespace clickstream {

struct KMeansOptions {
  int k = 2;
  std::uint64_t seed = 0;
  int restarts = 10;
  int max_iter = 300;
};

template <typename Scalar>
struct KMeansResult {
  std::vector<int> assignment;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> centroids;  // k x d
  Scalar wcss = 0;
  std::vector<Scalar> wcss_trace;  // best run, one entry per assignment step
  int iterations = 0;
  int best_restart = 0;
};

namespace detail {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
DenseMatrix<Scalar> seed_plus_plus(const DenseMatrix<Scalar>& x, int k, CounterRng& rng) {
  const auto n = x.rows();
  DenseMatrix<Scalar> c(k, x.cols());
  c.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d2 =
      (x.rowwise() - c.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    const Scalar total = d2.sum();
    Eigen::Index pick = 0;
    if (total > Scalar(0)) {
      const Scalar target = static_cast<Scalar>(rng.uniform()) * total;
      Scalar acc = 0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target && d2(i) > Scalar(0)) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    c.row(j) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - c.row(j)).rowwise().squaredNorm());
  }
  return c;
}

/// Nearest centroid per row (ties -> lowest index); returns the WCSS.
template <typename Scalar>
Scalar assign(const DenseMatrix<Scalar>& x, const DenseMatrix<Scalar>& c, std::vector<int>& a,
              Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& dist) {
  Scalar wcss = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    const Scalar d = (c.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
    a[static_cast<std::size_t>(i)] = static_cast<int>(best);
    dist(i) = d;
    wcss += d;
  }
  return wcss;
}

template <typename Scalar>
KMeansResult<Scalar> lloyd(const DenseMatrix<Scalar>& x, DenseMatrix<Scalar> c, int max_iter) {
  const auto n = x.rows();
  const auto k = c.rows();
  KMeansResult<Scalar> r;
  r.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> prev;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dist(n);
  for (int it = 0; it < max_iter; ++it) {
    r.wcss = assign(x, c, r.assignment, dist);
    r.wcss_trace.push_back(r.wcss);
    r.iterations = it + 1;
    if (r.assignment == prev) break;
    prev = r.assignment;

    DenseMatrix<Scalar> sums = DenseMatrix<Scalar>::Zero(k, x.cols());
    std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto j = r.assignment[static_cast<std::size_t>(i)];
      sums.row(j) += x.row(i);
      ++sizes[static_cast<std::size_t>(j)];
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      if (sizes[static_cast<std::size_t>(j)] > 0) {
        c.row(j) = sums.row(j) / static_cast<Scalar>(sizes[static_cast<std::size_t>(j)]);
      } else {
        // Empty cluster: move it onto the point farthest from its centroid.
        Eigen::Index far = 0;
        dist.maxCoeff(&far);
        c.row(j) = x.row(far);
        dist(far) = 0;
      }
    }
  }
  r.centroids = std::move(c);
  return r;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` runs by WCSS.
/// Restart r draws from CounterRng(seed, r), so results depend only on the
/// options. Throws std::domain_error when k is not in [1, n].
template <typename Scalar>
KMeansResult<Scalar> kmeans(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& points,
                            const KMeansOptions& opt) {
  if (opt.k < 1 || opt.k > points.rows())
    throw std::domain_error("kmeans: k must be between 1 and the number of points");
  if (opt.restarts < 1 || opt.max_iter < 1)
    throw std::domain_error("kmeans: restarts and max_iter must be positive");
  KMeansResult<Scalar> best;
  best.wcss = std::numeric_limits<Scalar>::infinity();
  for (int r = 0; r < opt.restarts; ++r) {
    CounterRng rng(opt.seed, static_cast<std::uint64_t>(r));
    auto run = detail::lloyd(points, detail::seed_plus_plus(points, opt.k, rng), opt.max_iter);
    if (run.wcss < best.wcss) {
      best = std::move(run);
      best.best_restart = r;
    }
  }
  return best;
}

/// Adjusted Rand index between two labelings of the same items.
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: size mismatch");
  const auto n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double m) { return m * (m - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [key, m] : joint) index += c2(m);
  for (const auto& [key, m] : ra) sa += c2(m);
  for (const auto& [key, m] : rb) sb += c2(m);
  const double expected = sa * sb / c2(n);
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace clickstream
