#include "clickstream/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "clickstream/table.hpp"

namespace clickstream::ingest {

using nlohmann::json;

std::string_view kind_name(EventKind kind) {
  switch (kind) {
    case EventKind::Play: return "play";
    case EventKind::Pause: return "pause";
    case EventKind::Seek: return "seek";
    case EventKind::RateChange: return "ratechange";
  }
  return "?";
}

namespace {

struct FieldError {
  std::string message;
};

std::string text_field(const json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) throw FieldError{std::string("missing '") + key + "'"};
  if (it->is_string()) {
    auto s = it->get<std::string>();
    if (s.empty()) throw FieldError{std::string("empty '") + key + "'"};
    return s;
  }
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw FieldError{std::string("'") + key + "' must be text"};
}

std::optional<double> number_field(const json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  double v = 0.0;
  if (it->is_number()) {
    v = it->get<double>();
  } else if (it->is_string()) {
    const auto s = it->get<std::string>();
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw FieldError{std::string("'") + key + "' is not a decimal number"};
  } else {
    throw FieldError{std::string("'") + key + "' is not a decimal number"};
  }
  if (!std::isfinite(v)) throw FieldError{std::string("'") + key + "' is not finite"};
  return v;
}

double required_number(const json& rec, const char* key) {
  auto v = number_field(rec, key);
  if (!v) throw FieldError{std::string("missing '") + key + "'"};
  return *v;
}

ClickEvent parse_record(const std::string& line, std::size_t line_no) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FieldError{"malformed record: not a JSON object"};
  }
  if (!rec.is_object()) throw FieldError{"malformed record: not a JSON object"};

  ClickEvent ev;
  ev.line = line_no;
  ev.student_id = text_field(rec, "student_id");
  ev.video_id = text_field(rec, "video_id");
  ev.wall_time = required_number(rec, "t");

  const auto kind = text_field(rec, "event");
  if (kind == "play") {
    ev.kind = EventKind::Play;
  } else if (kind == "pause") {
    ev.kind = EventKind::Pause;
  } else if (kind == "seek") {
    ev.kind = EventKind::Seek;
    ev.pos_from = required_number(rec, "pos_from");
    ev.pos_to = required_number(rec, "pos_to");
  } else if (kind == "ratechange") {
    ev.kind = EventKind::RateChange;
  } else {
    throw FieldError{"unknown event '" + kind + "'"};
  }

  ev.rate = number_field(rec, "rate");
  if (ev.kind == EventKind::RateChange && !ev.rate) throw FieldError{"ratechange without 'rate'"};
  if (ev.rate && *ev.rate <= 0.0) throw FieldError{"'rate' must be positive"};

  ev.video_length = number_field(rec, "video_length");
  if (ev.video_length && *ev.video_length <= 0.0)
    throw FieldError{"'video_length' must be positive"};
  if (auto w = number_field(rec, "week")) {
    if (*w < 0 || *w != std::floor(*w)) throw FieldError{"'week' must be a nonnegative integer"};
    ev.week = static_cast<int>(*w);
  }
  return ev;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

ParseResult parse_event_log(std::span<const std::string> lines) {
  ParseResult out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    try {
      out.events.push_back(parse_record(lines[i], i + 1));
    } catch (const FieldError& e) {
      out.errors.push_back({i + 1, e.message});
    }
  }
  std::stable_sort(out.events.begin(), out.events.end(), [](const auto& a, const auto& b) {
    if (a.student_id != b.student_id) return a.student_id < b.student_id;
    if (a.video_id != b.video_id) return a.video_id < b.video_id;
    if (a.wall_time != b.wall_time) return a.wall_time < b.wall_time;
    return a.line < b.line;
  });
  return out;
}

ParseResult parse_event_log(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return parse_event_log(lines);
}

std::vector<std::span<const ClickEvent>> group_by_pair(std::span<const ClickEvent> sorted) {
  std::vector<std::span<const ClickEvent>> groups;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i == sorted.size() || sorted[i].student_id != sorted[start].student_id ||
        sorted[i].video_id != sorted[start].video_id) {
      if (i > start) groups.push_back(sorted.subspan(start, i - start));
      start = i;
    }
  }
  return groups;
}

Vwss encode_vwss(std::span<const ClickEvent> events, double scroll_window) {
  Vwss v;
  if (events.empty()) return v;
  v.student_id = events.front().student_id;
  v.video_id = events.front().video_id;
  v.start_time = events.front().wall_time;

  double rate = 1.0;
  bool playing = false;
  double play_since = 0.0;
  double max_pos = 0.0;
  std::optional<double> length;

  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    if (ev.student_id != v.student_id || ev.video_id != v.video_id)
      throw std::invalid_argument("encode_vwss: events span more than one student-video pair");
    if (i > 0 && ev.wall_time < events[i - 1].wall_time)
      throw std::invalid_argument("encode_vwss: events are not time-sorted");
    if (ev.video_length) length = std::max(length.value_or(0.0), *ev.video_length);
    if (ev.week && !v.week) v.week = ev.week;

    if (playing) {
      v.played_seconds += ev.wall_time - play_since;
      play_since = ev.wall_time;
    }

    std::optional<ClickOp> op;
    switch (ev.kind) {
      case EventKind::Play:
        op = ClickOp::Pl;
        playing = true;
        play_since = ev.wall_time;
        break;
      case EventKind::Pause:
        op = ClickOp::Pa;
        playing = false;
        break;
      case EventKind::Seek:
        op = ev.pos_to > ev.pos_from ? ClickOp::Sf : ClickOp::Sb;
        max_pos = std::max({max_pos, ev.pos_from, ev.pos_to});
        break;
      case EventKind::RateChange: {
        const double next = *ev.rate;
        if (next > rate) {
          op = ClickOp::Rf;
        } else if (next < rate) {
          op = ClickOp::Rs;
        } else {
          ++v.dropped_ratechanges;
        }
        rate = next;
        break;
      }
    }
    if (op) {
      v.tokens.push_back(*op);
      v.token_times.push_back(ev.wall_time);
      v.token_rates.push_back(rate);
    }
  }
  v.video_length = length.value_or(std::max(max_pos, v.played_seconds));
  return collapse_scrolls(v, scroll_window);
}

Vwss collapse_scrolls(const Vwss& v, double scroll_window) {
  Vwss out = v;
  out.tokens.clear();
  out.token_times.clear();
  out.token_rates.clear();
  const auto n = v.tokens.size();
  std::size_t i = 0;
  while (i < n) {
    const auto op = v.tokens[i];
    std::size_t j = i + 1;
    if (op == ClickOp::Sf || op == ClickOp::Sb) {
      while (j < n && v.tokens[j] == op && v.token_times[j] - v.token_times[j - 1] < scroll_window)
        ++j;
    }
    if (j - i >= 2) {
      out.tokens.push_back(op == ClickOp::Sf ? ClickOp::SSf : ClickOp::SSb);
    } else {
      out.tokens.push_back(op);
    }
    out.token_times.push_back(v.token_times[i]);
    out.token_rates.push_back(v.token_rates[j - 1]);
    i = j;
  }
  return out;
}

std::vector<double> dwell_times(const Vwss& v) {
  std::vector<double> d(v.tokens.size(), 0.0);
  for (std::size_t i = 0; i + 1 < v.tokens.size(); ++i)
    d[i] = v.token_times[i + 1] - v.token_times[i];
  return d;
}

DwellSummary dwell_summary(const Vwss& v) {
  DwellSummary s;
  const auto d = dwell_times(v);
  for (std::size_t i = 0; i < d.size(); ++i) {
    switch (v.tokens[i]) {
      case ClickOp::Pa: s.pause += d[i]; break;
      case ClickOp::Sf:
      case ClickOp::SSf: s.seek_forward += d[i]; break;
      case ClickOp::Sb:
      case ClickOp::SSb: s.seek_backward += d[i]; break;
      default: break;
    }
  }
  return s;
}

double mean_rate(const Vwss& v) {
  if (v.token_rates.empty()) return 1.0;
  return std::accumulate(v.token_rates.begin(), v.token_rates.end(), 0.0) /
         static_cast<double>(v.token_rates.size());
}

std::optional<EngagementVariant> parse_engagement_variant(std::string_view name) {
  if (name == "full") return EngagementVariant::Full;
  if (name == "pause_seek_only") return EngagementVariant::PauseSeekOnly;
  return std::nullopt;
}

double compute_engagement(const Vwss& v, EngagementVariant variant) {
  if (v.tokens.empty()) return 0.0;
  const auto d = dwell_summary(v);
  double base = d.pause + d.seek_forward + d.seek_backward;
  if (variant == EngagementVariant::Full) base += v.played_seconds;
  return std::max(0.0, base * mean_rate(v));
}

double compute_play_proportion(const Vwss& v) {
  if (!(v.video_length > 0.0))
    throw std::domain_error("compute_play_proportion: video_length must be positive");
  return v.played_seconds / v.video_length * mean_rate(v) * 100.0;
}

void write_vwss_table(std::ostream& out, std::span<const Vwss> rows) {
  write_row(out, {"student_id", "video_id", "week", "video_length", "played_seconds",
                  "n_tokens", "tokens", "token_times", "token_rates"});
  for (const auto& v : rows) {
    write_row(out, {v.student_id, v.video_id, v.week ? std::to_string(*v.week) : "",
                    fmt_num(v.video_length), fmt_num(v.played_seconds),
                    std::to_string(v.tokens.size()), join_tokens(v.tokens),
                    join_mapped(v.token_times, ",", fmt_num),
                    join_mapped(v.token_rates, ",", fmt_num)});
  }
}

}  // namespace clickstream::ingest
