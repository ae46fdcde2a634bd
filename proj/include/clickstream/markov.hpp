#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "clickstream/ingest.hpp"
#include "clickstream/kmeans.hpp"
#include "clickstream/tokens.hpp"

namespace clickstream::markov {

enum class Smoothing {
  UniformEmptyRows,  // unseen histories get a uniform row
  AddOne,            // Laplace: every cell count + 1
};

/// Order-m transition kernel over ClickOp. Rows index the 8^m histories
/// (oldest token most significant in base 8), columns the next token.
struct TransitionMatrix {
  Eigen::MatrixXd prob;    // 8^m x 8, row-stochastic
  Eigen::MatrixXd counts;  // raw window counts
  int order = 1;

  /// Row-major flattening (64 entries for order 1).
  Eigen::VectorXd flatten() const;
};

struct FitReport {
  double log_likelihood = 0.0;
  double parameters = 0.0;   // 8^m * 7
  double transitions = 0.0;  // number of (m+1)-windows
  double aic = 0.0;
  double bic = 0.0;
};

struct MarkovFit {
  TransitionMatrix matrix;
  FitReport report;
};

inline constexpr int kMaxOrder = 5;

/// Pools (m+1)-windows across all sequences and row-normalizes. Throws
/// std::domain_error if m is outside [1, 5] or no sequence is longer than m.
MarkovFit fit_markov(std::span<const TokenSeq> sequences, int order = 1,
                     Smoothing smoothing = Smoothing::UniformEmptyRows);

/// Sum over cells of counts * ln(prob); cells with zero count contribute 0.
double log_likelihood(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& prob);

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// aic = -2 ll + 2p, bic = -2 ll + p ln n. Throws std::domain_error if n < 1.
InformationCriteria information_criteria(double log_likelihood, double parameters, double n);

/// x * P^k for a square row-stochastic P. Throws std::domain_error if x is
/// not a distribution (sum off by more than 1e-9 or negative entries).
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> predict_distribution(
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& x,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& P, int k) {
  if (P.rows() != P.cols() || P.cols() != x.cols())
    throw std::domain_error("predict_distribution: need a square kernel matching x");
  if (k < 0) throw std::domain_error("predict_distribution: k must be >= 0");
  if (std::abs(x.sum() - Scalar(1)) > Scalar(1e-9) || (x.array() < Scalar(0)).any())
    throw std::domain_error("predict_distribution: x is not a probability distribution");
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> out = x;
  for (int step = 0; step < k; ++step) out = out * P;
  return out;
}

inline Eigen::RowVectorXd predict_distribution(const Eigen::RowVectorXd& x,
                                               const TransitionMatrix& P, int k) {
  if (P.order != 1) throw std::domain_error("predict_distribution: order-1 kernel required");
  return predict_distribution<double>(x, P.prob, k);
}

/// Left eigenvector of P for eigenvalue 1, normalized to sum 1.
Eigen::RowVectorXd stationary_distribution(const Eigen::MatrixXd& P);

/// k-means over flattened kernels (one row per student).
KMeansResult<double> cluster_transition_matrices(const Eigen::MatrixXd& flattened,
                                                 const KMeansOptions& options);

/// Per-Vwss summary: proportions of Pl, Pa, Sf(+SSf), Sb(+SSb), Rc(Rf+Rs),
/// then pause, seek-forward and seek-backward dwell seconds.
Eigen::Matrix<double, 8, 1> vwss_metrics(const ingest::Vwss& v);

/// Column z-scores; zero-variance columns become 0.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x);

struct VwssClustering {
  Eigen::MatrixXd metrics;  // n x 8, unstandardized
  KMeansResult<double> result;
};

VwssClustering cluster_vwss_metrics(std::span<const ingest::Vwss> rows, KMeansOptions options);

}  // namespace clickstream::markov
