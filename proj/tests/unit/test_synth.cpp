#include "doctest.h"

#include <algorithm>
#include <map>
#include <tuple>
#include <sstream>

#include "clickstream/ingest.hpp"
#include "clickstream/synth.hpp"

using namespace clickstream;
using namespace clickstream::synth;

TEST_CASE("two archetype spec is valid") {
  const auto spec = two_archetype_spec(40, 3);
  spec.validate();
  REQUIRE(spec.archetypes.size() == 2);
  for (const auto& a : spec.archetypes)
    for (int r = 0; r < kNumOps; ++r) CHECK(a.kernel.row(r).sum() == doctest::Approx(1.0));
  auto bad = spec;
  bad.archetypes[0].fraction = 0.9;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = spec;
  bad.archetypes[1].kernel(0, 0) += 0.2;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("spec json round trip") {
  const auto spec = two_archetype_spec(10, 99);
  std::stringstream a;
  write_cohort_spec(a, spec);
  const auto back = parse_cohort_spec(a);
  std::stringstream b;
  write_cohort_spec(b, back);
  CHECK(a.str() == b.str());
  std::istringstream junk("{\"n_students\": \"many\"}");
  CHECK_THROWS(parse_cohort_spec(junk));
}

TEST_CASE("empty cohort has an empty log") {
  const auto c = generate_cohort(two_archetype_spec(0, 1));
  CHECK(c.log_lines.empty());
  CHECK(c.students.empty());
}

TEST_CASE("same seed gives the same log") {
  const auto a = generate_cohort(two_archetype_spec(15, 5));
  const auto b = generate_cohort(two_archetype_spec(15, 5));
  CHECK(a.log_lines == b.log_lines);
  const auto c = generate_cohort(two_archetype_spec(15, 6));
  CHECK(a.log_lines != c.log_lines);
}

TEST_CASE("archetype counts are exact") {
  const auto c = generate_cohort(two_archetype_spec(31, 2));
  int first = 0;
  for (const auto& s : c.students) first += s.archetype == 0;
  CHECK((first == 15 || first == 16));
}

TEST_CASE("encoded log reproduces the planted token streams") {
  const auto spec = two_archetype_spec(20, 8);
  const auto c = generate_cohort(spec);
  const auto parsed = ingest::parse_event_log(std::span<const std::string>(c.log_lines));
  CHECK(parsed.errors.empty());
  auto events = parsed.events;
  std::stable_sort(events.begin(), events.end(), [](const auto& x, const auto& y) {
    return std::tie(x.student_id, x.video_id, x.wall_time) < std::tie(y.student_id, y.video_id, y.wall_time);
  });
  std::map<std::pair<std::string, std::string>, TokenSeq> encoded;
  for (auto g : ingest::group_by_pair(events)) {
    const auto v = ingest::collapse_scrolls(ingest::encode_vwss(g));
    encoded[{v.student_id, v.video_id}] = v.tokens;
  }
  CHECK(encoded.size() == c.sessions.size());
  for (const auto& s : c.sessions) {
    const auto it = encoded.find({s.student_id, s.video_id});
    REQUIRE(it != encoded.end());
    CHECK(it->second == s.tokens);
  }
  for (const auto& st : c.students) {
    CHECK(st.last_week >= 1);
    CHECK(st.last_week <= spec.n_weeks);
    CHECK(st.event == (st.last_week < spec.n_weeks ? 1 : 0));
  }
}

TEST_CASE("chain sampler follows the kernel") {
  Kernel k = Kernel::Zero();
  for (int i = 0; i < kNumOps; ++i) k(i, (i + 1) % kNumOps) = 1.0;
  CounterRng rng(1);
  const auto s = sample_chain(k, ClickOp::Sf, 10, rng);
  REQUIRE(s.size() == 10);
  CHECK(s[0] == ClickOp::Sf);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(index_of(s[i]) == (index_of(s[i - 1]) + 1) % kNumOps);
}

TEST_CASE("survival cohort") {
  SurvivalCohortSpec spec;
  spec.n = 200;
  spec.seed = 3;
  const auto d = generate_survival_cohort(spec);
  d.validate();
  CHECK(d.size() == 200);
  CHECK(d.names.size() == 4);
  CHECK((d.duration.array() <= spec.horizon).all());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d.event(i) == 0) CHECK(d.duration(i) == spec.horizon);
    CHECK((d.x(i, 1) == 0 || d.x(i, 1) == 1));
    CHECK((d.x(i, 3) >= 0 && d.x(i, 3) <= 3));
  }
  const auto again = generate_survival_cohort(spec);
  CHECK(again.duration == d.duration);
}
