#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "clickstream/actions.hpp"
#include "clickstream/ingest.hpp"
#include "clickstream/ipi.hpp"
#include "clickstream/markov.hpp"

namespace clickstream::pipeline {

enum ExitCode : int { kOk = 0, kFlagged = 1, kMissingInput = 2, kSchemaError = 3 };

/// Run configuration. Every field has a default; a JSON config file may
/// override any subset (unknown keys are rejected).
struct PipelineConfig {
  std::string catalog_path;    // empty: built-in catalog
  std::string ipi_table_path;  // empty: built-in weights
  std::string cohort_spec_path;  // synth; empty: two-archetype cohort

  double scroll_window = 1.0;       // (0, 60]
  int rare_threshold = 2;           // >= 0
  double corr_threshold = 0.5;      // (0, 1]
  int markov_order = 1;             // [1, 5]
  int max_order_sweep = 3;          // [1, 5]
  int markov_k = 2;                 // transition-matrix clusters
  int vwss_k = 4;                   // metric clusters
  int restarts = 10;
  int folds = 10;                   // >= 2
  int permutations = 1000;          // >= 1
  double lambda = 1.0;              // >= 0
  bool cost_sensitive = true;
  std::uint64_t seed = 0;
  ingest::EngagementVariant variant = ingest::EngagementVariant::Full;
  std::string hazard_model = "cox";  // cox | discrete
  int final_week = 0;               // 0: last week present in the data
  int synth_students = 200;

  /// Throws std::invalid_argument naming the first out-of-range field.
  void validate() const;
};

PipelineConfig parse_config(std::istream& in);
void write_config(std::ostream& out, const PipelineConfig& cfg);
/// FNV-1a 64 of the canonical config JSON, as 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

/// Everything derived from one event log.
struct Corpus {
  std::vector<ingest::Vwss> vwss;  // sorted by (student, video)
  std::vector<ingest::Diagnostic> errors;
  std::vector<actions::RawWeights> raw;
  std::vector<actions::BehavioralActionVector> actions;
  std::vector<int> ipi;
  std::vector<double> engagement;
  std::vector<double> play_proportion;
  std::vector<std::string> notes;

  std::vector<std::string> students() const;  // sorted, unique
};

Corpus build_corpus(std::istream& events, const PipelineConfig& cfg,
                    const actions::BehavioralCatalog& catalog, const ipi::IpiWeightTable& table);

/// Subcommands: encode, actions, ipi, cluster, predict, survival, sna, stats,
/// synth, report, all. Reads `input` (an event log; for synth an optional
/// cohort spec), writes tab-separated reports into `out_dir`. Messages go to
/// `log`.
int run(const std::string& subcommand, const std::string& input, const std::string& out_dir,
        const PipelineConfig& cfg, std::ostream& log);

const std::vector<std::string>& subcommands();

}  // namespace clickstream::pipeline
