#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace clickstream::stats {

/// Pearson correlation of two equally sized vectors; NaN when either has
/// zero variance.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pearson(const Eigen::MatrixBase<DerivedA>& a,
                                  const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const auto ca = (a.array() - a.mean()).matrix();
  const auto cb = (b.array() - b.mean()).matrix();
  const Scalar den = std::sqrt(ca.squaredNorm() * cb.squaredNorm());
  if (!(den > Scalar(0))) return std::numeric_limits<Scalar>::quiet_NaN();
  return ca.dot(cb) / den;
}

/// Two-sided standard normal tail: P(|Z| >= |z|).
double normal_two_sided_p(double z);

struct ZTest {
  double abs_z = 0.0;
  double p = 1.0;
};

/// |x1 - x2| / (sigma sqrt(1/n1 + 1/n2)) with a known population sd.
ZTest two_sample_z(double mean1, double mean2, double sigma, std::size_t n1, std::size_t n2);

struct Anova {
  std::optional<double> f;  // empty when the within mean square is 0
  int df_between = 0;
  int df_within = 0;
  double ms_between = 0.0;
  double ms_within = 0.0;
  std::optional<double> p;
};

Anova one_way_anova(std::span<const std::vector<double>> groups);

/// Upper-alpha studentized range quantile q(alpha; g, df) from an embedded
/// table (alpha in {0.05, 0.01}, g in [2, 10]). Off-grid df round down to
/// the nearest tabulated df. Throws std::domain_error outside the table.
double studentized_range_q(double alpha, int groups, int df);

struct TukeyPair {
  int i = 0;
  int j = 0;
  double mean_diff = 0.0;  // mean_i - mean_j
  double critical = 0.0;   // q * sqrt(MS_within / n_h)
  bool significant = false;
};

/// Tukey HSD; unequal group sizes use the harmonic mean of the pair
/// (Tukey-Kramer).
std::vector<TukeyPair> tukey_hsd(std::span<const std::vector<double>> groups, double alpha);

struct ContingencyTable {
  Eigen::MatrixXd counts;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

struct ChiSquare {
  double statistic = 0.0;
  int df = 0;
  double p = 1.0;
  Eigen::MatrixXd expected;
  /// Continuity-corrected standardized residual (|O - E| - 0.5) / sqrt(E).
  Eigen::MatrixXd residuals;
};

ChiSquare chi_square(const Eigen::MatrixXd& counts);
inline ChiSquare chi_square(const ContingencyTable& t) { return chi_square(t.counts); }

enum class BinMode { EqualFrequency, EqualWidth };

struct Discretization {
  std::vector<int> labels;        // 0 .. bins-1
  std::vector<double> boundaries; // bins-1 interior cut points
  bool degenerate = false;        // equal width over a constant sample
};

/// EqualWidth: [min, max] in equal intervals, left-closed, last one closed.
/// EqualFrequency: cuts at linear-interpolation quantiles i/bins; a value
/// equal to a cut goes to the upper bin.
Discretization discretize(std::span<const double> values, BinMode mode, int bins);

struct TestRecord {
  std::string name;
  std::string statistic_name;
  double statistic = 0.0;
  std::string df;
  double p = 1.0;
};

/// Tab-separated records with decisions at 0.05 and 0.01.
void write_test_records(std::ostream& out, std::span<const TestRecord> records);

}  // namespace clickstream::stats
