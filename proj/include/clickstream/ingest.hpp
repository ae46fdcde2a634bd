#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clickstream/tokens.hpp"

namespace clickstream::ingest {

enum class EventKind { Play, Pause, Seek, RateChange };

std::string_view kind_name(EventKind kind);

/// One raw player interaction.
struct ClickEvent {
  std::string student_id;
  std::string video_id;
  double wall_time = 0.0;
  EventKind kind = EventKind::Play;
  double pos_from = 0.0;  // seek only
  double pos_to = 0.0;    // seek only
  std::optional<double> rate;          // required on ratechange
  std::optional<double> video_length;  // optional extension field
  std::optional<int> week;             // optional extension field
  std::size_t line = 0;                // 1-based source line
};

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  /// Sorted by (student_id, video_id, wall_time, line).
  std::vector<ClickEvent> events;
  std::vector<Diagnostic> errors;
};

/// Parses JSON-lines event records. Blank lines are skipped; every
/// malformed record yields one diagnostic and is excluded.
ParseResult parse_event_log(std::span<const std::string> lines);
ParseResult parse_event_log(std::istream& in);

/// Contiguous runs of one (student, video) pair within sorted events.
std::vector<std::span<const ClickEvent>> group_by_pair(std::span<const ClickEvent> sorted);

/// Video watching state sequence for one student-video pair.
struct Vwss {
  std::string student_id;
  std::string video_id;
  TokenSeq tokens;
  std::vector<double> token_times;
  std::vector<double> token_rates;
  double video_length = 0.0;
  double played_seconds = 0.0;
  double start_time = 0.0;
  std::optional<int> week;
  int dropped_ratechanges = 0;
};

inline constexpr double kDefaultScrollWindow = 1.0;

/// Encodes one student-video group. Throws std::invalid_argument if the
/// events span several pairs or are not time-sorted.
Vwss encode_vwss(std::span<const ClickEvent> events,
                 double scroll_window = kDefaultScrollWindow);

/// Merges runs of two or more adjacent same-direction single seeks whose
/// successive gaps are below `scroll_window` into one scroll token stamped at
/// the first seek. Idempotent.
Vwss collapse_scrolls(const Vwss& v, double scroll_window = kDefaultScrollWindow);

/// Wall time from each token to the next one; the last token dwells 0.
std::vector<double> dwell_times(const Vwss& v);

struct DwellSummary {
  double pause = 0.0;
  double seek_forward = 0.0;   // Sf + SSf
  double seek_backward = 0.0;  // Sb + SSb
};
DwellSummary dwell_summary(const Vwss& v);

/// Mean of token_rates; 1.0 for an empty sequence.
double mean_rate(const Vwss& v);

enum class EngagementVariant { Full, PauseSeekOnly };

std::optional<EngagementVariant> parse_engagement_variant(std::string_view name);

/// Full: (played + pause + seek dwell) * mean rate.
/// PauseSeekOnly: (pause + seek dwell) * mean rate.
double compute_engagement(const Vwss& v, EngagementVariant variant = EngagementVariant::Full);

/// played / length * mean rate * 100. Throws std::domain_error if length <= 0.
double compute_play_proportion(const Vwss& v);

/// Tab-separated Vwss table; tokens and per-token values are comma-joined.
void write_vwss_table(std::ostream& out, std::span<const Vwss> rows);

}  // namespace clickstream::ingest
