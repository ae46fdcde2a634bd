#include "doctest.h"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "clickstream/ingest.hpp"

using namespace clickstream;
using namespace clickstream::ingest;

namespace {

ClickEvent ev(double t, EventKind kind, double from = 0, double to = 0, std::optional<double> rate = {}) {
  ClickEvent e;
  e.student_id = "s1";
  e.video_id = "v1";
  e.wall_time = t;
  e.kind = kind;
  e.pos_from = from;
  e.pos_to = to;
  e.rate = rate;
  return e;
}

Vwss collapsed(const std::vector<ClickEvent>& events) {
  return collapse_scrolls(encode_vwss(events));
}

}  // namespace

TEST_CASE("well formed play record parses") {
  std::vector<std::string> lines{R"({"student_id":"a","video_id":"v","t":3.5,"event":"play"})"};
  const auto r = parse_event_log(lines);
  REQUIRE(r.events.size() == 1);
  CHECK(r.errors.empty());
  CHECK(r.events[0].kind == EventKind::Play);
  CHECK(r.events[0].wall_time == 3.5);
  CHECK(r.events[0].line == 1);
}

TEST_CASE("ratechange without rate is excluded with a diagnostic") {
  std::vector<std::string> lines{R"({"student_id":"a","video_id":"v","t":1,"event":"play"})",
                                 R"({"student_id":"a","video_id":"v","t":2,"event":"ratechange"})"};
  const auto r = parse_event_log(lines);
  CHECK(r.events.size() == 1);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].line == 2);
}

TEST_CASE("malformed and incomplete records are diagnosed") {
  std::vector<std::string> lines{"not json", R"({"student_id":"a","t":1,"event":"play"})",
                                 R"({"student_id":"a","video_id":"v","t":1,"event":"jump"})",
                                 R"({"student_id":"a","video_id":"v","t":1,"event":"seek","pos_from":3})"};
  const auto r = parse_event_log(lines);
  CHECK(r.events.empty());
  CHECK(r.errors.size() == 4);
}

TEST_CASE("close seeks stay separate events until encoding") {
  std::vector<std::string> lines{
      R"({"student_id":"a","video_id":"v","t":5,"event":"seek","pos_from":10,"pos_to":40})",
      R"({"student_id":"a","video_id":"v","t":5.4,"event":"seek","pos_from":40,"pos_to":70})"};
  const auto r = parse_event_log(lines);
  CHECK(r.events.size() == 2);
}

TEST_CASE("same direction seeks inside the window collapse to a scroll") {
  const auto v = collapsed({ev(5, EventKind::Seek, 10, 40), ev(5.6, EventKind::Seek, 40, 70)});
  CHECK(v.tokens == TokenSeq{ClickOp::SSf});
}

TEST_CASE("opposite seeks never collapse") {
  const auto v = collapsed({ev(5, EventKind::Seek, 40, 10), ev(5.5, EventKind::Seek, 70, 90)});
  CHECK(v.tokens == TokenSeq{ClickOp::Sb, ClickOp::Sf});
}

TEST_CASE("rate changes become Rf and Rs") {
  const auto v = collapsed({ev(0, EventKind::Play), ev(10, EventKind::RateChange, 0, 0, 1.5),
                            ev(20, EventKind::RateChange, 0, 0, 1.0)});
  CHECK(v.tokens == TokenSeq{ClickOp::Pl, ClickOp::Rf, ClickOp::Rs});
  CHECK(v.token_rates == std::vector<double>{1.0, 1.5, 1.0});
}

TEST_CASE("encoding keeps times non-decreasing and arrays aligned") {
  const auto v = collapsed({ev(0, EventKind::Play), ev(30, EventKind::Pause), ev(40, EventKind::Play),
                            ev(41, EventKind::Seek, 100, 20), ev(41.3, EventKind::Seek, 20, 5),
                            ev(60, EventKind::Pause)});
  CHECK(v.tokens.size() == v.token_times.size());
  CHECK(v.tokens.size() == v.token_rates.size());
  CHECK(std::is_sorted(v.token_times.begin(), v.token_times.end()));
  CHECK(v.played_seconds == doctest::Approx(50.0));
  CHECK(v.tokens == TokenSeq{ClickOp::Pl, ClickOp::Pa, ClickOp::Pl, ClickOp::SSb, ClickOp::Pa});
  CHECK(collapse_scrolls(v).tokens == v.tokens);
}

TEST_CASE("engagement worked example") {
  Vwss v;
  v.tokens = {ClickOp::Pl, ClickOp::Pa, ClickOp::Pl, ClickOp::Pa, ClickOp::Pl};
  v.token_times = {0, 350, 450, 800, 900};
  v.token_rates = {1.5, 1.5, 1.5, 1.5, 1.5};
  v.played_seconds = 700;
  CHECK(compute_engagement(v) == doctest::Approx(1350.0).epsilon(1e-12));
  CHECK(compute_engagement(v, EngagementVariant::PauseSeekOnly) == doctest::Approx(300.0));
}

TEST_CASE("engagement edge cases") {
  CHECK(compute_engagement(Vwss{}) == 0.0);
  Vwss v;
  v.tokens = {ClickOp::Pa, ClickOp::Pl};
  v.token_times = {0, 50};
  v.token_rates = {1.0, 1.0};
  CHECK(compute_engagement(v, EngagementVariant::PauseSeekOnly) == doctest::Approx(50.0));
}

TEST_CASE("play proportion") {
  Vwss v;
  v.tokens = {ClickOp::Pl};
  v.token_times = {0};
  v.token_rates = {1.0};
  v.video_length = 1000;
  v.played_seconds = 500;
  CHECK(compute_play_proportion(v) == doctest::Approx(50.0));
  v.played_seconds = 1000;
  v.token_rates = {1.6};
  CHECK(compute_play_proportion(v) == doctest::Approx(160.0));
  v.played_seconds = 0;
  CHECK(compute_play_proportion(v) == 0.0);
  v.video_length = 0;
  CHECK_THROWS_AS(compute_play_proportion(v), std::domain_error);
}

TEST_CASE("grouping splits by student and video") {
  std::vector<ClickEvent> events{ev(0, EventKind::Play), ev(1, EventKind::Pause)};
  auto other = ev(0.5, EventKind::Play);
  other.video_id = "v2";
  events.push_back(other);
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return std::tie(a.student_id, a.video_id, a.wall_time) < std::tie(b.student_id, b.video_id, b.wall_time);
  });
  const auto groups = group_by_pair(events);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].size() == 2);
  CHECK(groups[1].size() == 1);
}

TEST_CASE("engagement variant names") {
  CHECK(parse_engagement_variant("full") == EngagementVariant::Full);
  CHECK(parse_engagement_variant("pause_seek_only") == EngagementVariant::PauseSeekOnly);
  CHECK_FALSE(parse_engagement_variant("other"));
}
