#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clickstream/rng.hpp"
#include "clickstream/survival.hpp"
#include "clickstream/tokens.hpp"

namespace clickstream::synth {

using Kernel = Eigen::Matrix<double, kNumOps, kNumOps>;

struct Archetype {
  std::string name;
  double fraction = 0.0;
  Kernel kernel = Kernel::Constant(1.0 / kNumOps);
  double mean_tokens = 20.0;  // per video
  double dwell_mu = 1.0;      // log-normal gap above the 1 s floor
  double dwell_sigma = 0.5;
  double watch_seconds = 40.0;  // mean extra gap while the video is playing
  double hazard_effect = 0.0;  // log-hazard shift for dropout
};

struct CohortSpec {
  int n_students = 0;
  int n_videos = 6;
  int n_weeks = 3;
  std::uint64_t seed = 0;
  double min_video_length = 300.0;
  double max_video_length = 900.0;
  double base_hazard = 0.15;    // per week
  double latent_effect = 0.5;   // log-hazard per sd of the latent trait
  std::vector<Archetype> archetypes;

  /// Throws std::domain_error for a non-stochastic kernel, fractions that
  /// do not sum to 1, or out-of-range sizes.
  void validate() const;
};

/// JSON spec file; see write_cohort_spec for the layout.
CohortSpec parse_cohort_spec(std::istream& in);
void write_cohort_spec(std::ostream& out, const CohortSpec& spec);

/// Skippers (Sf-heavy kernel, short dwell) vs rewatchers (Sb-heavy, long
/// dwell), half each.
CohortSpec two_archetype_spec(int n_students, std::uint64_t seed);

struct StudentTruth {
  std::string student_id;
  int archetype = 0;
  double latent = 0.0;
  int last_week = 0;
  int event = 0;  // 1 when last_week < n_weeks
};

struct SessionTruth {
  std::string student_id;
  std::string video_id;
  int week = 0;
  double video_length = 0.0;
  TokenSeq tokens;
};

struct Cohort {
  std::vector<std::string> log_lines;  // JSON lines, one event each
  std::vector<StudentTruth> students;
  std::vector<SessionTruth> sessions;
};

/// Fully determined by the spec: videos draw from CounterRng(seed, 0),
/// archetype assignment from stream 1 and student i from stream i + 2.
Cohort generate_cohort(const CohortSpec& spec);

/// Markov chain of length n starting at `start` (included).
TokenSeq sample_chain(const Kernel& kernel, ClickOp start, std::size_t n, CounterRng& rng);

void write_event_log(std::ostream& out, const Cohort& cohort);
void write_student_truth(std::ostream& out, const Cohort& cohort);
void write_session_truth(std::ostream& out, const Cohort& cohort);
void write_kernel_truth(std::ostream& out, const CohortSpec& spec);

struct SurvivalCohortSpec {
  int n = 2000;
  /// Log-hazards for ipi (N(0,1)), rewatch (0/1), playrate_transition (0/1),
  /// play_proportion (ordinal 0..3).
  std::array<double, 4> beta{-0.45, -0.40, 0.31, -0.46};
  double base_rate = 0.1;
  double horizon = 20.0;  // administrative censoring time
  std::uint64_t seed = 0;
};

/// Exponential event times with log-hazard linear in the covariates,
/// censored at the horizon.
survival::SurvivalData generate_survival_cohort(const SurvivalCohortSpec& spec);

}  // namespace clickstream::synth
