#include "clickstream/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "clickstream/table.hpp"

namespace clickstream::synth {

namespace {

using json = nlohmann::ordered_json;

constexpr double kRateStep = 1.25;
constexpr double kDay = 86400.0;

std::string padded(const char* prefix, int i, int width) {
  auto digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width)
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

int digits(int n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

Kernel kernel_from_json(const json& j) {
  if (!j.is_array() || j.size() != kNumOps) throw std::domain_error("cohort spec: kernel must be 8x8");
  Kernel k;
  for (int r = 0; r < kNumOps; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != kNumOps) throw std::domain_error("cohort spec: kernel must be 8x8");
    for (int c = 0; c < kNumOps; ++c) k(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return k;
}

// Emits the raw events of one session.
struct SessionWriter {
  const std::string& student;
  const std::string& video;
  double length;
  int week;
  std::vector<std::string>& lines;

  void emit(json rec) {
    json out;
    out["student_id"] = student;
    out["video_id"] = video;
    for (auto& [k, v] : rec.items()) out[k] = v;
    out["video_length"] = length;
    out["week"] = week;
    lines.push_back(out.dump());
  }
};

}  // namespace

void CohortSpec::validate() const {
  if (n_students < 0) throw std::domain_error("cohort spec: n_students must be >= 0");
  if (n_videos < 1 || n_weeks < 1 || n_weeks > n_videos)
    throw std::domain_error("cohort spec: need 1 <= n_weeks <= n_videos");
  if (!(min_video_length > 0) || !(max_video_length >= min_video_length))
    throw std::domain_error("cohort spec: bad video length range");
  if (!(base_hazard > 0)) throw std::domain_error("cohort spec: base_hazard must be positive");
  if (archetypes.empty()) throw std::domain_error("cohort spec: no archetypes");
  double total = 0.0;
  for (const auto& a : archetypes) {
    if (!(a.fraction >= 0)) throw std::domain_error("cohort spec: negative fraction for " + a.name);
    total += a.fraction;
    if ((a.kernel.array() < 0).any() ||
        ((a.kernel.rowwise().sum().array() - 1.0).abs() > 1e-9).any())
      throw std::domain_error("cohort spec: kernel of " + a.name + " is not row-stochastic");
    if (!(a.mean_tokens >= 1)) throw std::domain_error("cohort spec: mean_tokens must be >= 1");
    if (!(a.dwell_sigma >= 0)) throw std::domain_error("cohort spec: dwell_sigma must be >= 0");
    if (!(a.watch_seconds >= 0)) throw std::domain_error("cohort spec: watch_seconds must be >= 0");
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::domain_error("cohort spec: fractions must sum to 1");
}

CohortSpec parse_cohort_spec(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("cohort spec: ") + e.what());
  }
  CohortSpec s;
  try {
    s.n_students = j.value("n_students", s.n_students);
    s.n_videos = j.value("n_videos", s.n_videos);
    s.n_weeks = j.value("n_weeks", s.n_weeks);
    s.seed = j.value("seed", s.seed);
    s.min_video_length = j.value("min_video_length", s.min_video_length);
    s.max_video_length = j.value("max_video_length", s.max_video_length);
    s.base_hazard = j.value("base_hazard", s.base_hazard);
    s.latent_effect = j.value("latent_effect", s.latent_effect);
    for (const auto& a : j.at("archetypes")) {
      Archetype arch;
      arch.name = a.at("name").get<std::string>();
      arch.fraction = a.at("fraction").get<double>();
      arch.kernel = kernel_from_json(a.at("kernel"));
      arch.mean_tokens = a.value("mean_tokens", arch.mean_tokens);
      arch.dwell_mu = a.value("dwell_mu", arch.dwell_mu);
      arch.dwell_sigma = a.value("dwell_sigma", arch.dwell_sigma);
      arch.watch_seconds = a.value("watch_seconds", arch.watch_seconds);
      arch.hazard_effect = a.value("hazard_effect", arch.hazard_effect);
      s.archetypes.push_back(std::move(arch));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("cohort spec: ") + e.what());
  }
  s.validate();
  return s;
}

void write_cohort_spec(std::ostream& out, const CohortSpec& s) {
  json j;
  j["n_students"] = s.n_students;
  j["n_videos"] = s.n_videos;
  j["n_weeks"] = s.n_weeks;
  j["seed"] = s.seed;
  j["min_video_length"] = s.min_video_length;
  j["max_video_length"] = s.max_video_length;
  j["base_hazard"] = s.base_hazard;
  j["latent_effect"] = s.latent_effect;
  j["archetypes"] = json::array();
  for (const auto& a : s.archetypes) {
    json k = json::array();
    for (int r = 0; r < kNumOps; ++r) {
      json row = json::array();
      for (int c = 0; c < kNumOps; ++c) row.push_back(a.kernel(r, c));
      k.push_back(row);
    }
    j["archetypes"].push_back({{"name", a.name},
                               {"fraction", a.fraction},
                               {"kernel", k},
                               {"mean_tokens", a.mean_tokens},
                               {"dwell_mu", a.dwell_mu},
                               {"dwell_sigma", a.dwell_sigma},
                               {"watch_seconds", a.watch_seconds},
                               {"hazard_effect", a.hazard_effect}});
  }
  out << j.dump(2) << '\n';
}

CohortSpec two_archetype_spec(int n_students, std::uint64_t seed) {
  CohortSpec s;
  s.n_students = n_students;
  s.seed = seed;
  auto build = [](std::array<double, kNumOps> base) {
    Kernel k;
    for (int r = 0; r < kNumOps; ++r) {
      Eigen::Matrix<double, 1, kNumOps> row;
      for (int c = 0; c < kNumOps; ++c) row(c) = 0.8 * base[static_cast<std::size_t>(c)];
      row((r + 1) % kNumOps) += 0.2;
      k.row(r) = row;
    }
    return k;
  };
  //                  Pl    Pa    Sf    SSf   Sb    SSb   Rf    Rs
  Archetype skip{"skipper", 0.5, build({0.22, 0.13, 0.32, 0.12, 0.05, 0.03, 0.08, 0.05}),
                 24.0, 0.3, 0.5, 30.0, 0.4};
  Archetype rewatch{"rewatcher", 0.5, build({0.22, 0.13, 0.05, 0.03, 0.32, 0.12, 0.05, 0.08}),
                    24.0, 2.0, 0.5, 60.0, -0.4};
  s.archetypes = {skip, rewatch};
  return s;
}

TokenSeq sample_chain(const Kernel& kernel, ClickOp start, std::size_t n, CounterRng& rng) {
  TokenSeq out;
  if (n == 0) return out;
  out.reserve(n);
  out.push_back(start);
  while (out.size() < n) {
    const auto row = kernel.row(index_of(out.back()));
    const double u = rng.uniform();
    double acc = 0.0;
    int pick = kNumOps - 1;
    for (int c = 0; c < kNumOps; ++c) {
      acc += row(c);
      if (u < acc && row(c) > 0) {
        pick = c;
        break;
      }
    }
    out.push_back(kAllOps[static_cast<std::size_t>(pick)]);
  }
  return out;
}

Cohort generate_cohort(const CohortSpec& spec) {
  spec.validate();
  Cohort cohort;

  CounterRng video_rng(spec.seed, 0);
  std::vector<double> lengths;
  std::vector<int> weeks;
  std::vector<std::string> video_ids;
  const int vwidth = digits(spec.n_videos);
  for (int v = 0; v < spec.n_videos; ++v) {
    lengths.push_back(std::round(video_rng.uniform(spec.min_video_length, spec.max_video_length)));
    weeks.push_back(1 + v * spec.n_weeks / spec.n_videos);
    video_ids.push_back(padded("v", v + 1, vwidth));
  }

  // Exact archetype counts by largest remainder, then shuffled.
  std::vector<int> archetype_of;
  {
    const auto k = spec.archetypes.size();
    std::vector<int> counts(k);
    std::vector<std::pair<double, std::size_t>> rem;
    int assigned = 0;
    for (std::size_t a = 0; a < k; ++a) {
      const double exact = spec.archetypes[a].fraction * spec.n_students;
      counts[a] = static_cast<int>(std::floor(exact));
      assigned += counts[a];
      rem.emplace_back(-(exact - counts[a]), a);
    }
    std::sort(rem.begin(), rem.end());
    for (int i = 0; assigned < spec.n_students; ++i, ++assigned) ++counts[rem[static_cast<std::size_t>(i) % k].second];
    for (std::size_t a = 0; a < k; ++a) archetype_of.insert(archetype_of.end(), static_cast<std::size_t>(counts[a]), static_cast<int>(a));
    CounterRng assign_rng(spec.seed, 1);
    assign_rng.shuffle(std::span<int>(archetype_of));
  }

  const int swidth = digits(std::max(1, spec.n_students));
  for (int i = 0; i < spec.n_students; ++i) {
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(i) + 2);
    const auto& arch = spec.archetypes[static_cast<std::size_t>(archetype_of[static_cast<std::size_t>(i)])];
    StudentTruth st;
    st.student_id = padded("s", i + 1, swidth);
    st.archetype = archetype_of[static_cast<std::size_t>(i)];
    st.latent = rng.normal();
    const double hazard = spec.base_hazard * std::exp(arch.hazard_effect + spec.latent_effect * st.latent);
    const int dropout = static_cast<int>(std::ceil(rng.exponential(hazard)));
    st.event = dropout < spec.n_weeks ? 1 : 0;
    st.last_week = std::clamp(dropout, 1, spec.n_weeks);

    for (int v = 0; v < spec.n_videos; ++v) {
      if (weeks[static_cast<std::size_t>(v)] > st.last_week) break;
      SessionTruth sess{st.student_id, video_ids[static_cast<std::size_t>(v)],
                        weeks[static_cast<std::size_t>(v)], lengths[static_cast<std::size_t>(v)], {}};
      const auto n_tokens = static_cast<std::size_t>(
          std::max(2.0, std::round(rng.normal(arch.mean_tokens, 0.3 * arch.mean_tokens))));
      sess.tokens = sample_chain(arch.kernel, ClickOp::Pl, n_tokens, rng);

      SessionWriter w{st.student_id, sess.video_id, sess.video_length, sess.week, cohort.log_lines};
      const double L = sess.video_length;
      double t = (sess.week - 1) * 7 * kDay + v * 7200.0 + rng.uniform(0.0, 3600.0);
      double pos = 0.01 * L;
      double rate = 1.0;
      bool playing = false;
      auto seek = [&](bool forward) {
        const double to = forward ? pos + (L - pos) * rng.uniform(0.1, 0.9) : pos * rng.uniform(0.1, 0.9);
        w.emit({{"t", t}, {"event", "seek"}, {"pos_from", pos}, {"pos_to", to}});
        pos = to;
      };
      for (auto op : sess.tokens) {
        switch (op) {
          case ClickOp::Pl:
            w.emit({{"t", t}, {"event", "play"}});
            playing = true;
            break;
          case ClickOp::Pa:
            w.emit({{"t", t}, {"event", "pause"}});
            playing = false;
            break;
          case ClickOp::Sf:
          case ClickOp::Sb:
            seek(op == ClickOp::Sf);
            break;
          case ClickOp::SSf:
          case ClickOp::SSb: {
            const int n = 2 + static_cast<int>(rng.below(2));
            for (int s = 0; s < n; ++s) {
              if (s) t += rng.uniform(0.2, 0.6);
              seek(op == ClickOp::SSf);
            }
            break;
          }
          case ClickOp::Rf:
          case ClickOp::Rs:
            rate = op == ClickOp::Rf ? rate * kRateStep : rate / kRateStep;
            w.emit({{"t", t}, {"event", "ratechange"}, {"rate", rate}});
            break;
        }
        double gap = 1.0 + rng.lognormal(arch.dwell_mu, arch.dwell_sigma);
        if (playing && arch.watch_seconds > 0) gap += rng.exponential(1.0 / arch.watch_seconds);
        t += gap;
        if (playing) pos = std::min(pos + gap * rate, 0.999 * L);
      }
      cohort.sessions.push_back(std::move(sess));
    }
    cohort.students.push_back(std::move(st));
  }
  return cohort;
}

void write_event_log(std::ostream& out, const Cohort& cohort) {
  for (const auto& l : cohort.log_lines) out << l << '\n';
}

void write_student_truth(std::ostream& out, const Cohort& cohort) {
  write_row(out, {"student_id", "archetype", "latent", "last_week", "event"});
  for (const auto& s : cohort.students)
    write_row(out, {s.student_id, std::to_string(s.archetype), fmt_num(s.latent),
                    std::to_string(s.last_week), std::to_string(s.event)});
}

void write_session_truth(std::ostream& out, const Cohort& cohort) {
  write_row(out, {"student_id", "video_id", "week", "video_length", "tokens"});
  for (const auto& s : cohort.sessions)
    write_row(out, {s.student_id, s.video_id, std::to_string(s.week), fmt_num(s.video_length),
                    join_tokens(s.tokens)});
}

void write_kernel_truth(std::ostream& out, const CohortSpec& spec) {
  write_row(out, {"archetype", "from", "to", "p"});
  for (const auto& a : spec.archetypes)
    for (int r = 0; r < kNumOps; ++r)
      for (int c = 0; c < kNumOps; ++c)
        write_row(out, {a.name, std::string(op_name(kAllOps[static_cast<std::size_t>(r)])),
                        std::string(op_name(kAllOps[static_cast<std::size_t>(c)])), fmt_num(a.kernel(r, c))});
}

survival::SurvivalData generate_survival_cohort(const SurvivalCohortSpec& spec) {
  if (spec.n < 0) throw std::domain_error("survival cohort: n must be >= 0");
  if (!(spec.base_rate > 0) || !(spec.horizon > 0))
    throw std::domain_error("survival cohort: base_rate and horizon must be positive");
  survival::SurvivalData d;
  d.names = {"ipi", "rewatch", "playrate_transition", "play_proportion"};
  d.kinds = {survival::CovariateKind::Numeric, survival::CovariateKind::Binary,
             survival::CovariateKind::Binary, survival::CovariateKind::Ordinal};
  d.duration.resize(spec.n);
  d.event.resize(spec.n);
  d.x.resize(spec.n, 4);
  const Eigen::Map<const Eigen::Vector4d> beta(spec.beta.data());
  const int width = digits(std::max(1, spec.n));
  for (int i = 0; i < spec.n; ++i) {
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(i));
    Eigen::RowVector4d x;
    x << rng.normal(), rng.bernoulli(0.5) ? 1.0 : 0.0, rng.bernoulli(0.5) ? 1.0 : 0.0,
        static_cast<double>(rng.below(4));
    const double t = rng.exponential(spec.base_rate * std::exp(x.dot(beta)));
    d.ids.push_back(padded("s", i + 1, width));
    d.x.row(i) = x;
    d.duration(i) = std::min(t, spec.horizon);
    d.event(i) = t < spec.horizon ? 1 : 0;
  }
  return d;
}

}  // namespace clickstream::synth
