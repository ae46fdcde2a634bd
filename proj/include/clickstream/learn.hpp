#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "clickstream/actions.hpp"
#include "clickstream/ingest.hpp"

namespace clickstream::learn {

/// Sparse named features. Names carry an extractor prefix:
/// ngram:, prop:, len:, action:, eng:, pat:, last:, tail:, traj:.
using FeatureMap = std::map<std::string, double>;

struct FeatureVector {
  FeatureMap values;
  int label = 0;
  std::string group_id;
};

struct FeatureConfig {
  std::vector<int> ngram_lengths{4, 5};
  bool length = true;
  bool proportions = true;
  bool action_levels = true;
  bool pattern_flags = false;  // presence of each catalog click group
  bool last_click = false;     // last:<op> and tail:seconds (in-video dropout)
  std::optional<std::size_t> prefix;  // only tokens [0, prefix) are used
  const actions::BehavioralCatalog* catalog = nullptr;  // default catalog when null
};

FeatureVector extract_features(const ingest::Vwss& v, const actions::BehavioralActionVector* actions,
                               const FeatureConfig& cfg,
                               std::optional<actions::Level> engagement = std::nullopt);

/// Contiguous symbol n-gram counts, keyed "<prefix><a,b,c,d>".
void add_ngrams(FeatureMap& out, std::span<const std::string> symbols, int n,
                std::string_view prefix);

// ---------------------------------------------------------------------------
// Trajectories

struct VideoMetrics {
  std::string student_id;
  std::string video_id;
  double order = 0.0;  // chronological key
  int week = 0;
  double engagement = 0.0;
  double play_proportion = 0.0;
  double ipi = 0.0;
};

struct Trajectory {
  std::string student_id;
  std::vector<std::string> videos;
  std::vector<int> weeks;
  std::vector<std::string> engagement;  // H / L
  std::vector<std::string> play_proportion;  // VL / L / H / VH
  std::vector<std::string> ipi;         // VL / L / H / VH
};

struct TrajectorySet {
  std::vector<Trajectory> trajectories;  // sorted by student id
  std::vector<std::string> diagnostics;
};

/// Engagement is split High/Low per video (equal frequency), play
/// proportion into 4 equal-width bins, IPI into 4 equal-frequency bins.
/// Students listed in `students` without any video are excluded with a
/// diagnostic.
TrajectorySet build_trajectories(std::span<const VideoMetrics> rows,
                                 std::span<const std::string> students = {});

/// proportion(symbol) over the sequence, keyed "<prefix><symbol>".
FeatureMap symbol_proportions(std::span<const std::string> symbols, std::string_view prefix);

/// Course-dropout features for the first `upto` videos: n-grams (4, 5) and
/// length over videos [0, upto-1), the symbols of video upto-1, and symbol
/// proportions.
FeatureMap trajectory_features(const Trajectory& t, std::size_t upto);

/// 1 on the last active week of a student who stopped before the final
/// course week, 0 otherwise.
constexpr int dropout_label(int week, int last_active_week, int final_course_week) {
  return week == last_active_week && last_active_week < final_course_week ? 1 : 0;
}

/// One row per (student, active week) with trajectory features up to the
/// end of that week.
std::vector<FeatureVector> course_dropout_rows(std::span<const Trajectory> trajectories,
                                               int final_course_week);

// ---------------------------------------------------------------------------
// Cross-validation and logistic regression

/// Fold per row; every group lands in one fold and fold sizes (in groups)
/// differ by at most one. Throws std::domain_error if k exceeds the number of
/// distinct groups.
std::vector<int> grouped_kfold(std::span<const std::string> group_ids, int k, std::uint64_t seed);

struct LogisticOptions {
  double lambda = 1.0;
  bool cost_sensitive = false;        // inverse class frequency weights
  std::map<int, double> class_costs;  // explicit costs override cost_sensitive
  int rare_threshold = 0;             // drop features present in fewer rows
  double tolerance = 1e-6;
  int max_iter = 20000;
};

using SparseDesign = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Cost-weighted negative log-likelihood plus (lambda/2)||W||^2 over a
/// sparse design. Binary problems use one coefficient row (sigmoid);
/// K > 2 classes use K rows (softmax). Intercepts are not penalized.
/// Parameters are packed as a (rows x (D+1)) matrix in column-major order,
/// intercept in the last column.
class LogisticObjective {
 public:
  LogisticObjective(SparseDesign x, std::vector<int> y, Eigen::VectorXd row_cost, int classes,
                    double lambda);

  Eigen::Index parameter_count() const { return rows() * (x_.cols() + 1); }
  Eigen::Index rows() const { return classes_ == 2 ? 1 : classes_; }

  double value(const Eigen::VectorXd& theta) const;
  double value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;
  /// value(theta + step) - value(theta), accurate even when the change is far
  /// below the rounding error of either value.
  double change(const Eigen::VectorXd& theta, const Eigen::VectorXd& step) const;

  /// Class probabilities for each row of x (n x K).
  Eigen::MatrixXd probabilities(const SparseDesign& x, const Eigen::VectorXd& theta) const;

 private:
  Eigen::MatrixXd logits(const SparseDesign& x, const Eigen::VectorXd& theta) const;

  SparseDesign x_;
  std::vector<int> y_;
  Eigen::VectorXd cost_;
  int classes_;
  double lambda_;
};

struct LogisticModel {
  std::vector<std::string> features;
  std::vector<int> classes;  // class labels, index = model class id
  Eigen::MatrixXd coef;      // rows x D
  Eigen::VectorXd intercept; // rows
  double final_gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_trace;     // initial loss, then one entry per accepted step
  std::vector<double> loss_decrease;  // exact loss change of each accepted step (< 0)

  Eigen::VectorXd probabilities(const FeatureMap& x) const;
  int predict(const FeatureMap& x) const;
  void dump(std::ostream& out) const;
};

/// Limited-memory quasi-Newton directions (10 pairs) with Armijo
/// backtracking on the exact loss change; every accepted step lowers
/// the loss. Stops when
/// ||grad|| < tolerance. Throws std::domain_error if fewer
/// than two classes are present.
LogisticModel train_logistic(std::span<const FeatureVector> rows, const LogisticOptions& options);

struct ConfusionSummary {
  std::vector<int> classes;
  Eigen::MatrixXi confusion;  // rows actual, columns predicted
  long tp = 0, fn = 0, fp = 0, tn = 0;  // one-vs-rest for the positive class
  double accuracy = 0.0;
  double kappa = 0.0;
  /// Reproduces the published worked example: actual-negative rows,
  /// fp / (fp + tn).
  double fnr = 0.0;
  /// fn / (fn + tp).
  double fnr_conventional = 0.0;
};

ConfusionSummary evaluate_metrics(std::span<const int> predictions, std::span<const int> labels,
                                  int positive_class);

struct CvReport {
  std::vector<ConfusionSummary> folds;
  ConfusionSummary pooled;
};

CvReport cross_validate(std::span<const FeatureVector> rows, int folds, std::uint64_t seed,
                        const LogisticOptions& options, int positive_class);

}  // namespace clickstream::learn
