#include "clickstream/markov.hpp"

#include <cmath>

namespace clickstream::markov {

Eigen::VectorXd TransitionMatrix::flatten() const {
  Eigen::VectorXd out(prob.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < prob.rows(); ++r)
    for (Eigen::Index c = 0; c < prob.cols(); ++c) out(k++) = prob(r, c);
  return out;
}

double log_likelihood(const Eigen::MatrixXd& counts, const Eigen::MatrixXd& prob) {
  double ll = 0.0;
  for (Eigen::Index r = 0; r < counts.rows(); ++r)
    for (Eigen::Index c = 0; c < counts.cols(); ++c)
      if (counts(r, c) > 0) ll += counts(r, c) * std::log(prob(r, c));
  return ll;
}

InformationCriteria information_criteria(double ll, double parameters, double n) {
  if (!(n >= 1.0)) throw std::domain_error("information_criteria: n must be >= 1");
  return {-2.0 * ll + 2.0 * parameters, -2.0 * ll + parameters * std::log(n)};
}

MarkovFit fit_markov(std::span<const TokenSeq> sequences, int order, Smoothing smoothing) {
  if (order < 1 || order > kMaxOrder) throw std::domain_error("fit_markov: order must be in [1, 5]");
  Eigen::Index histories = 1;
  for (int i = 0; i < order; ++i) histories *= kNumOps;

  MarkovFit fit;
  auto& tm = fit.matrix;
  tm.order = order;
  tm.counts = Eigen::MatrixXd::Zero(histories, kNumOps);
  const auto m = static_cast<std::size_t>(order);
  double windows = 0.0;
  for (const auto& seq : sequences) {
    for (std::size_t t = m; t < seq.size(); ++t) {
      Eigen::Index h = 0;
      for (std::size_t j = t - m; j < t; ++j) h = h * kNumOps + index_of(seq[j]);
      tm.counts(h, index_of(seq[t])) += 1.0;
      windows += 1.0;
    }
  }
  if (windows == 0.0)
    throw std::domain_error("fit_markov: every sequence is shorter than order + 1");

  tm.prob.resize(histories, kNumOps);
  for (Eigen::Index r = 0; r < histories; ++r) {
    if (smoothing == Smoothing::AddOne) {
      tm.prob.row(r) = (tm.counts.row(r).array() + 1.0) / (tm.counts.row(r).sum() + kNumOps);
    } else if (const double total = tm.counts.row(r).sum(); total > 0) {
      tm.prob.row(r) = tm.counts.row(r) / total;
    } else {
      tm.prob.row(r).setConstant(1.0 / kNumOps);
    }
  }

  auto& rep = fit.report;
  rep.log_likelihood = log_likelihood(tm.counts, tm.prob);
  rep.parameters = static_cast<double>(histories) * (kNumOps - 1);
  rep.transitions = windows;
  const auto ic = information_criteria(rep.log_likelihood, rep.parameters, windows);
  rep.aic = ic.aic;
  rep.bic = ic.bic;
  return fit;
}

Eigen::RowVectorXd stationary_distribution(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols()) throw std::domain_error("stationary_distribution: square kernel required");
  const auto n = P.rows();
  // Solve pi (P - I) = 0 with sum(pi) = 1 as a stacked least-squares system.
  Eigen::MatrixXd A(n + 1, n);
  A.topRows(n) = (P - Eigen::MatrixXd::Identity(n, n)).transpose();
  A.row(n).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;
  Eigen::VectorXd pi = A.colPivHouseholderQr().solve(b);
  return pi.transpose();
}

KMeansResult<double> cluster_transition_matrices(const Eigen::MatrixXd& flattened,
                                                 const KMeansOptions& options) {
  return kmeans<double>(flattened, options);
}

Eigen::Matrix<double, 8, 1> vwss_metrics(const ingest::Vwss& v) {
  Eigen::Matrix<double, 8, 1> m = Eigen::Matrix<double, 8, 1>::Zero();
  for (auto op : v.tokens) {
    switch (op) {
      case ClickOp::Pl: m(0) += 1; break;
      case ClickOp::Pa: m(1) += 1; break;
      case ClickOp::Sf:
      case ClickOp::SSf: m(2) += 1; break;
      case ClickOp::Sb:
      case ClickOp::SSb: m(3) += 1; break;
      case ClickOp::Rf:
      case ClickOp::Rs: m(4) += 1; break;
    }
  }
  if (!v.tokens.empty()) m.head<5>() /= static_cast<double>(v.tokens.size());
  const auto d = ingest::dwell_summary(v);
  m(5) = d.pause;
  m(6) = d.seek_forward;
  m(7) = d.seek_backward;
  return m;
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = x;
  if (x.rows() == 0) return z;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double mean = x.col(c).mean();
    const double var =
        x.rows() > 1 ? (x.col(c).array() - mean).square().sum() / static_cast<double>(x.rows() - 1) : 0.0;
    const double sd = std::sqrt(var);
    if (sd > 0)
      z.col(c) = (x.col(c).array() - mean) / sd;
    else
      z.col(c).setZero();
  }
  return z;
}

VwssClustering cluster_vwss_metrics(std::span<const ingest::Vwss> rows, KMeansOptions options) {
  VwssClustering out;
  out.metrics.resize(static_cast<Eigen::Index>(rows.size()), 8);
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.metrics.row(static_cast<Eigen::Index>(i)) = vwss_metrics(rows[i]).transpose();
  out.result = kmeans<double>(standardize_columns(out.metrics), options);
  return out;
}

}  // namespace clickstream::markov
