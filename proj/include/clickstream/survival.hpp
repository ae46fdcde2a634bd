#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace clickstream::survival {

enum class CovariateKind {
  Numeric,  // z-scored by prepare_covariates
  Binary,   // low/high as 0/1, kept as is
  Ordinal,  // 0..3, kept as is
};

/// Column-oriented survival records: one row per student.
struct SurvivalData {
  std::vector<std::string> ids;
  Eigen::VectorXd duration;  // > 0
  Eigen::VectorXi event;     // 1 dropped out, 0 censored
  Eigen::MatrixXd x;         // n x p covariates
  std::vector<std::string> names;
  std::vector<CovariateKind> kinds;

  Eigen::Index size() const { return duration.size(); }
  /// Throws std::invalid_argument on shape mismatch, duration <= 0, event
  /// outside {0, 1} or non-finite covariates.
  void validate() const;
};

struct PreparedCovariates {
  SurvivalData data;
  std::vector<std::string> kept;
  std::vector<std::string> dropped;
  std::vector<std::string> diagnostics;
};

/// Z-scores numeric columns (sample sd), drops zero-variance columns, then
/// walks columns in declaration order and drops any whose |Pearson r| with
/// an already kept column is >= corr_threshold. Needs at least 2 records.
PreparedCovariates prepare_covariates(const SurvivalData& data, double corr_threshold = 0.5);

struct CoxOptions {
  int max_iter = 200;
  double tolerance = 1e-8;
};

struct HazardModel {
  std::vector<std::string> names;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd p;  // two-sided Wald
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> log_likelihood_trace;  // accepted iterates

  Eigen::VectorXd hazard_ratio() const { return beta.array().exp().matrix(); }
};

/// Breslow partial log-likelihood with optional gradient and observed
/// information (negative Hessian).
double cox_partial_log_likelihood(const Eigen::VectorXd& duration, const Eigen::VectorXi& event,
                                  const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                                  Eigen::VectorXd* gradient = nullptr,
                                  Eigen::MatrixXd* information = nullptr);

/// Cox proportional hazards by damped Newton iteration. Throws
/// std::domain_error without events; non-convergence is reported through
/// `converged`.
HazardModel fit_cox(const SurvivalData& data, const CoxOptions& options = {});

/// Discrete-time logistic hazard: each record expands into one row per
/// period 1..ceil(duration), with period dummies and an event indicator on
/// the last period. Coefficients are log odds ratios per period.
HazardModel fit_discrete_hazard(const SurvivalData& data, const CoxOptions& options = {});

/// "36.3% less likely", "25.0% more likely" or "no change".
std::string interpret_hazard_ratio(double hr);

/// covariate, beta, hazard_ratio, se, p, significance (*** p < 0.001,
/// ** p < 0.01, * p < 0.05).
void write_hazard_report(std::ostream& out, const HazardModel& model);

/// Tab-separated: student_id, duration, event, then one column per
/// covariate. Column kinds are inferred: values in {0, 1} are Binary,
/// integers in [0, 3] Ordinal, anything else Numeric.
SurvivalData read_survival_table(std::istream& in);
void write_survival_table(std::ostream& out, const SurvivalData& data);

}  // namespace clickstream::survival
