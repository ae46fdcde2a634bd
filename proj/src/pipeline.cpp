#include "clickstream/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "clickstream/learn.hpp"
#include "clickstream/rng.hpp"
#include "clickstream/sna.hpp"
#include "clickstream/stats.hpp"
#include "clickstream/survival.hpp"
#include "clickstream/synth.hpp"
#include "clickstream/table.hpp"

namespace clickstream::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json to_json(const PipelineConfig& c) {
  json j;
  j["catalog_path"] = c.catalog_path;
  j["ipi_table_path"] = c.ipi_table_path;
  j["cohort_spec_path"] = c.cohort_spec_path;
  j["scroll_window"] = c.scroll_window;
  j["rare_threshold"] = c.rare_threshold;
  j["corr_threshold"] = c.corr_threshold;
  j["markov_order"] = c.markov_order;
  j["max_order_sweep"] = c.max_order_sweep;
  j["markov_k"] = c.markov_k;
  j["vwss_k"] = c.vwss_k;
  j["restarts"] = c.restarts;
  j["folds"] = c.folds;
  j["permutations"] = c.permutations;
  j["lambda"] = c.lambda;
  j["cost_sensitive"] = c.cost_sensitive;
  j["seed"] = c.seed;
  j["variant"] = c.variant == ingest::EngagementVariant::Full ? "full" : "pause_seek_only";
  j["hazard_model"] = c.hazard_model;
  j["final_week"] = c.final_week;
  j["synth_students"] = c.synth_students;
  return j;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingInput("cannot open input file: " + path);
  return in;
}

/// Report file with a provenance line.
class Report {
 public:
  Report(const fs::path& dir, const std::string& name, const std::string& hash)
      : path_(dir / name), out_(path_) {
    if (!out_) throw std::runtime_error("cannot write " + path_.string());
    out_ << "# config_hash " << hash << '\n';
  }
  std::ostream& stream() { return out_; }
  void row(const std::vector<std::string>& cells) { write_row(out_, cells); }

 private:
  fs::path path_;
  std::ofstream out_;
};

struct Context {
  const PipelineConfig& cfg;
  fs::path out;
  std::string hash;
  std::ostream& log;
  Corpus corpus;
  actions::BehavioralCatalog catalog;
  ipi::IpiWeightTable table;
};

std::string level_symbol(std::optional<actions::Level> l) {
  return l ? std::string(actions::level_name(*l)) : "NA";
}

int final_week(const Context& ctx) {
  if (ctx.cfg.final_week > 0) return ctx.cfg.final_week;
  int w = 0;
  for (const auto& v : ctx.corpus.vwss)
    if (v.week) w = std::max(w, *v.week);
  return w;
}

std::map<std::string, std::vector<std::size_t>> rows_by_student(const Corpus& c) {
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < c.vwss.size(); ++i) out[c.vwss[i].student_id].push_back(i);
  return out;
}

/// Engagement High/Low per video by median split (ties High).
std::vector<actions::Level> engagement_levels(const Corpus& c) {
  std::vector<actions::Level> out(c.vwss.size(), actions::Level::High);
  std::map<std::string, std::vector<std::size_t>> by_video;
  for (std::size_t i = 0; i < c.vwss.size(); ++i) by_video[c.vwss[i].video_id].push_back(i);
  for (const auto& [video, idx] : by_video) {
    if (idx.size() < 2) continue;
    std::vector<double> vals;
    for (auto i : idx) vals.push_back(c.engagement[i]);
    const auto levels = actions::median_split(vals);
    for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] = levels[j];
  }
  return out;
}

struct StudentClusters {
  std::vector<std::string> students;
  std::vector<int> cluster;  // per student
  std::vector<markov::MarkovFit> fits;
  KMeansResult<double> result;
  std::vector<std::string> excluded;
};

StudentClusters transition_clusters(const Context& ctx) {
  StudentClusters sc;
  const auto by_student = rows_by_student(ctx.corpus);
  std::vector<Eigen::VectorXd> rows;
  for (const auto& [student, idx] : by_student) {
    std::vector<TokenSeq> seqs;
    for (auto i : idx) seqs.push_back(ctx.corpus.vwss[i].tokens);
    try {
      sc.fits.push_back(markov::fit_markov(seqs, 1));
    } catch (const std::domain_error&) {
      sc.excluded.push_back(student);
      continue;
    }
    sc.students.push_back(student);
    rows.push_back(sc.fits.back().matrix.flatten());
  }
  if (rows.empty()) return sc;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  KMeansOptions opt;
  opt.k = std::min<int>(ctx.cfg.markov_k, static_cast<int>(rows.size()));
  opt.seed = ctx.cfg.seed;
  opt.restarts = ctx.cfg.restarts;
  sc.result = markov::cluster_transition_matrices(x, opt);
  sc.cluster = sc.result.assignment;
  return sc;
}

// ---------------------------------------------------------------------------
// Stages

int stage_encode(Context& ctx) {
  Report r(ctx.out, "vwss.tsv", ctx.hash);
  ingest::write_vwss_table(r.stream(), ctx.corpus.vwss);
  Report m(ctx.out, "measures.tsv", ctx.hash);
  m.row({"student_id", "video_id", "engagement", "play_proportion", "dropped_ratechanges"});
  for (std::size_t i = 0; i < ctx.corpus.vwss.size(); ++i) {
    const auto& v = ctx.corpus.vwss[i];
    m.row({v.student_id, v.video_id, fmt_fixed(ctx.corpus.engagement[i], 6),
           fmt_fixed(ctx.corpus.play_proportion[i], 6), std::to_string(v.dropped_ratechanges)});
  }
  return kOk;
}

int stage_actions(Context& ctx) {
  Report r(ctx.out, "actions.tsv", ctx.hash);
  std::vector<std::string> header{"student_id", "video_id"};
  for (auto c : actions::kAllCategories) header.emplace_back("raw_" + std::string(actions::category_name(c)));
  for (auto c : actions::kAllCategories) header.emplace_back("level_" + std::string(actions::category_name(c)));
  r.row(header);
  const auto& cor = ctx.corpus;
  for (std::size_t i = 0; i < cor.vwss.size(); ++i) {
    std::vector<std::string> row{cor.vwss[i].student_id, cor.vwss[i].video_id};
    for (double w : cor.raw[i]) row.push_back(fmt_fixed(w, 6));
    for (auto c : actions::kAllCategories) row.push_back(level_symbol(cor.actions[i].at(c)));
    r.row(row);
  }

  std::vector<TokenSeq> corpus;
  for (const auto& v : cor.vwss) corpus.push_back(v.tokens);
  Report g(ctx.out, "top_ngrams.tsv", ctx.hash);
  g.row({"rank", "gram", "count"});
  if (!corpus.empty()) {
    int rank = 0;
    for (const auto& n : actions::mine_top_ngrams(corpus, 4, 100))
      g.row({std::to_string(++rank), join_tokens(n.gram), std::to_string(n.count)});
  }
  return kOk;
}

int stage_ipi(Context& ctx) {
  Report r(ctx.out, "ipi.tsv", ctx.hash);
  r.row({"student_id", "video_id", "week", "ipi", "processing"});
  const auto& cor = ctx.corpus;
  for (std::size_t i = 0; i < cor.vwss.size(); ++i) {
    const auto& v = cor.vwss[i];
    r.row({v.student_id, v.video_id, v.week ? std::to_string(*v.week) : "NA", std::to_string(cor.ipi[i]),
           std::string(ipi::processing_name(ipi::interpret(cor.ipi[i])))});
  }
  return kOk;
}

int stage_cluster(Context& ctx) {
  const auto& cor = ctx.corpus;
  if (cor.vwss.empty()) {
    ctx.log << "cluster: no sequences\n";
    return kFlagged;
  }
  const auto sc = transition_clusters(ctx);
  for (const auto& s : sc.excluded) ctx.log << "cluster: student " << s << " has no transitions, excluded\n";

  Report fits(ctx.out, "markov_fits.tsv", ctx.hash);
  fits.row({"scope", "order", "log_likelihood", "parameters", "transitions", "aic", "bic"});
  auto fit_row = [&](const std::string& scope, int order, const markov::FitReport& f) {
    fits.row({scope, std::to_string(order), fmt_fixed(f.log_likelihood, 6), fmt_num(f.parameters),
              fmt_num(f.transitions), fmt_fixed(f.aic, 6), fmt_fixed(f.bic, 6)});
  };
  for (std::size_t i = 0; i < sc.students.size(); ++i) fit_row(sc.students[i], 1, sc.fits[i].report);
  std::vector<TokenSeq> all;
  for (const auto& v : cor.vwss) all.push_back(v.tokens);
  for (int m = 1; m <= ctx.cfg.max_order_sweep; ++m) {
    try {
      fit_row("pooled", m, markov::fit_markov(all, m).report);
    } catch (const std::domain_error& e) {
      ctx.log << "cluster: order " << m << " skipped: " << e.what() << '\n';
    }
  }

  Report a(ctx.out, "transition_clusters.tsv", ctx.hash);
  a.row({"student_id", "cluster"});
  for (std::size_t i = 0; i < sc.students.size(); ++i) a.row({sc.students[i], std::to_string(sc.cluster[i])});

  Report t(ctx.out, "transition_centroids.tsv", ctx.hash);
  t.row({"cluster", "from", "to", "p"});
  for (Eigen::Index c = 0; c < sc.result.centroids.rows(); ++c)
    for (int f = 0; f < kNumOps; ++f)
      for (int to = 0; to < kNumOps; ++to)
        t.row({std::to_string(c), std::string(op_name(kAllOps[static_cast<std::size_t>(f)])),
               std::string(op_name(kAllOps[static_cast<std::size_t>(to)])),
               fmt_fixed(sc.result.centroids(c, f * kNumOps + to), 6)});

  // Per-cluster mean click proportions and dwell.
  const auto by_student = rows_by_student(cor);
  std::map<int, std::pair<Eigen::Matrix<double, 8, 1>, int>> profile;
  for (std::size_t i = 0; i < sc.students.size(); ++i) {
    auto& [sum, n] = profile[sc.cluster[i]];
    if (n == 0) sum.setZero();
    for (auto r : by_student.at(sc.students[i])) {
      sum += markov::vwss_metrics(cor.vwss[r]);
      ++n;
    }
  }
  const std::vector<std::string> metric_names{"Pl", "Pa", "Sf", "Sb", "Rc", "pause_s", "seek_fw_s", "seek_bw_s"};
  Report p(ctx.out, "cluster_profiles.tsv", ctx.hash);
  std::vector<std::string> header{"cluster", "n_vwss"};
  header.insert(header.end(), metric_names.begin(), metric_names.end());
  p.row(header);
  for (const auto& [c, sn] : profile) {
    std::vector<std::string> row{std::to_string(c), std::to_string(sn.second)};
    for (int k = 0; k < 8; ++k) row.push_back(fmt_fixed(sn.first(k) / sn.second, 6));
    p.row(row);
  }

  KMeansOptions opt;
  opt.k = std::min<int>(ctx.cfg.vwss_k, static_cast<int>(cor.vwss.size()));
  opt.seed = ctx.cfg.seed;
  opt.restarts = ctx.cfg.restarts;
  const auto vc = markov::cluster_vwss_metrics(cor.vwss, opt);
  Report v(ctx.out, "vwss_clusters.tsv", ctx.hash);
  header = {"student_id", "video_id", "cluster"};
  header.insert(header.end(), metric_names.begin(), metric_names.end());
  v.row(header);
  for (std::size_t i = 0; i < cor.vwss.size(); ++i) {
    std::vector<std::string> row{cor.vwss[i].student_id, cor.vwss[i].video_id,
                                 std::to_string(vc.result.assignment[i])};
    for (int k = 0; k < 8; ++k) row.push_back(fmt_fixed(vc.metrics(static_cast<Eigen::Index>(i), k), 6));
    v.row(row);
  }
  Report w(ctx.out, "kmeans_trace.tsv", ctx.hash);
  w.row({"clustering", "iteration", "wcss"});
  for (std::size_t i = 0; i < sc.result.wcss_trace.size(); ++i)
    w.row({"transition", std::to_string(i + 1), fmt_fixed(sc.result.wcss_trace[i], 6)});
  for (std::size_t i = 0; i < vc.result.wcss_trace.size(); ++i)
    w.row({"vwss_metrics", std::to_string(i + 1), fmt_fixed(vc.result.wcss_trace[i], 6)});
  return kOk;
}

void write_cv(Report& r, const std::string& task, const learn::CvReport& cv) {
  auto row = [&](const std::string& scope, const learn::ConfusionSummary& s) {
    r.row({task, scope, std::to_string(s.tp + s.fn + s.fp + s.tn), fmt_fixed(s.accuracy, 6),
           fmt_fixed(s.kappa, 6), fmt_fixed(s.fnr, 6), fmt_fixed(s.fnr_conventional, 6),
           std::to_string(s.tp), std::to_string(s.fn), std::to_string(s.fp), std::to_string(s.tn)});
  };
  for (std::size_t f = 0; f < cv.folds.size(); ++f) row("fold" + std::to_string(f + 1), cv.folds[f]);
  row("pooled", cv.pooled);
}

int stage_predict(Context& ctx) {
  const auto& cor = ctx.corpus;
  int status = kOk;
  learn::LogisticOptions lo;
  lo.lambda = ctx.cfg.lambda;
  lo.cost_sensitive = ctx.cfg.cost_sensitive;
  lo.rare_threshold = ctx.cfg.rare_threshold;

  const auto eng = engagement_levels(cor);
  Report r(ctx.out, "predict_report.tsv", ctx.hash);
  r.row({"task", "scope", "n", "accuracy", "kappa", "fnr", "fnr_conventional", "tp", "fn", "fp", "tn"});

  auto run_task = [&](const std::string& task, const std::vector<learn::FeatureVector>& rows, int positive) {
    std::set<std::string> groups;
    std::set<int> labels;
    for (const auto& fv : rows) {
      groups.insert(fv.group_id);
      labels.insert(fv.label);
    }
    if (labels.size() < 2 || groups.size() < 2) {
      ctx.log << "predict: " << task << " skipped (needs two classes and two students)\n";
      return;
    }
    const int folds = std::min<int>(ctx.cfg.folds, static_cast<int>(groups.size()));
    try {
      write_cv(r, task, learn::cross_validate(rows, folds, ctx.cfg.seed, lo, positive));
      const auto model = learn::train_logistic(rows, lo);
      if (!model.converged)
        ctx.log << "predict: " << task << " stopped at gradient norm " << fmt_num(model.final_gradient_norm) << '\n';
      Report m(ctx.out, "model_" + task + ".tsv", ctx.hash);
      model.dump(m.stream());
    } catch (const std::domain_error& e) {
      ctx.log << "predict: " << task << " failed: " << e.what() << '\n';
      status = kFlagged;
    }
  };

  learn::FeatureConfig fc;
  fc.pattern_flags = true;
  fc.catalog = &ctx.catalog;

  std::vector<learn::FeatureVector> rq1, rq2, rq3;
  for (std::size_t i = 0; i < cor.vwss.size(); ++i) {
    const auto& v = cor.vwss[i];
    auto a = learn::extract_features(v, &cor.actions[i], fc);
    a.label = eng[i] == actions::Level::High ? 1 : 0;
    rq1.push_back(std::move(a));

    if (v.tokens.size() >= 2) {
      CounterRng rng(ctx.cfg.seed, i);
      const auto pos = 1 + static_cast<std::size_t>(rng.below(v.tokens.size() - 1));
      auto c = fc;
      c.prefix = pos;
      c.action_levels = false;
      auto b = learn::extract_features(v, nullptr, c, eng[i]);
      b.label = index_of(v.tokens[pos]);
      rq2.push_back(std::move(b));
    }

    auto c = fc;
    c.last_click = true;
    auto d = learn::extract_features(v, &cor.actions[i], c, eng[i]);
    d.label = cor.play_proportion[i] < 90.0 ? 1 : 0;
    rq3.push_back(std::move(d));
  }
  run_task("rq1_engagement", rq1, 1);
  run_task("rq2_next_click", rq2, 0);
  run_task("rq3_in_video_dropout", rq3, 1);

  const int fw = final_week(ctx);
  if (fw == 0) {
    ctx.log << "predict: course dropout skipped (no week information)\n";
  } else {
    std::vector<learn::VideoMetrics> vm;
    for (std::size_t i = 0; i < cor.vwss.size(); ++i) {
      const auto& v = cor.vwss[i];
      vm.push_back({v.student_id, v.video_id, v.start_time, v.week.value_or(0), cor.engagement[i],
                    cor.play_proportion[i], static_cast<double>(cor.ipi[i])});
    }
    const auto ts = learn::build_trajectories(vm);
    for (const auto& d : ts.diagnostics) ctx.log << "predict: " << d << '\n';
    Report t(ctx.out, "trajectories.tsv", ctx.hash);
    t.row({"student_id", "videos", "engagement", "play_proportion", "ipi"});
    for (const auto& tr : ts.trajectories)
      t.row({tr.student_id, std::to_string(tr.videos.size()), join_mapped(tr.engagement, " ", std::identity{}),
             join_mapped(tr.play_proportion, " ", std::identity{}), join_mapped(tr.ipi, " ", std::identity{})});
    run_task("course_dropout", learn::course_dropout_rows(ts.trajectories, fw), 1);
  }
  return status;
}

struct StudentCovariates {
  survival::SurvivalData data;
  std::vector<std::string> notes;
};

StudentCovariates student_covariates(const Context& ctx) {
  StudentCovariates sc;
  const auto& cor = ctx.corpus;
  const int fw = final_week(ctx);
  const auto by_student = rows_by_student(cor);
  const auto n = static_cast<Eigen::Index>(by_student.size());
  auto& d = sc.data;
  d.names = {"ipi"};
  d.kinds = {survival::CovariateKind::Numeric};
  for (auto c : actions::kAllCategories) {
    d.names.push_back(std::string(actions::category_name(c)));
    d.kinds.push_back(survival::CovariateKind::Binary);
  }
  for (const char* name : {"engagement", "play_proportion"}) d.names.emplace_back(name);
  d.kinds.push_back(survival::CovariateKind::Binary);
  d.kinds.push_back(survival::CovariateKind::Ordinal);
  for (const char* name : {"jumped_forward_s", "jumped_backward_s", "engagement_s"}) {
    d.names.emplace_back(name);
    d.kinds.push_back(survival::CovariateKind::Numeric);
  }
  d.duration.resize(n);
  d.event.resize(n);
  d.x.resize(n, static_cast<Eigen::Index>(d.names.size()));

  std::vector<double> mean_eng, mean_vpp;
  Eigen::Index i = 0;
  for (const auto& [student, idx] : by_student) {
    double ipi_sum = 0, fw_s = 0, bw_s = 0, eng_s = 0, vpp_s = 0;
    std::array<double, actions::kNumCategories> high{};
    int last = 0;
    for (auto r : idx) {
      const auto& v = cor.vwss[r];
      ipi_sum += cor.ipi[r];
      const auto dw = ingest::dwell_summary(v);
      fw_s += dw.seek_forward;
      bw_s += dw.seek_backward;
      eng_s += cor.engagement[r];
      vpp_s += cor.play_proportion[r];
      for (auto c : actions::kAllCategories)
        if (cor.actions[r].at(c) == actions::Level::High) high[static_cast<std::size_t>(c)] += 1;
      last = std::max(last, v.week.value_or(1));
    }
    const double k = static_cast<double>(idx.size());
    d.ids.push_back(student);
    d.duration(i) = std::max(1, last);
    d.event(i) = last < fw ? 1 : 0;
    Eigen::Index col = 0;
    d.x(i, col++) = ipi_sum / k;
    for (double h : high) d.x(i, col++) = h / k >= 0.5 ? 1.0 : 0.0;
    d.x(i, col++) = 0.0;  // engagement level, filled below
    d.x(i, col++) = 0.0;  // play proportion ordinal, filled below
    d.x(i, col++) = fw_s / k;
    d.x(i, col++) = bw_s / k;
    d.x(i, col++) = eng_s / k;
    mean_eng.push_back(eng_s / k);
    mean_vpp.push_back(vpp_s / k);
    ++i;
  }
  const Eigen::Index eng_col = 1 + actions::kNumCategories;
  if (n >= 2) {
    const auto levels = actions::median_split(mean_eng);
    const auto bins = stats::discretize(mean_vpp, stats::BinMode::EqualWidth, 4);
    if (bins.degenerate) sc.notes.push_back("student play proportion has no spread");
    for (Eigen::Index r = 0; r < n; ++r) {
      d.x(r, eng_col) = levels[static_cast<std::size_t>(r)] == actions::Level::High ? 1.0 : 0.0;
      d.x(r, eng_col + 1) = bins.labels[static_cast<std::size_t>(r)];
    }
  }
  return sc;
}

int stage_survival(Context& ctx) {
  if (final_week(ctx) == 0) {
    ctx.log << "survival: no week information in the event log\n";
    return kFlagged;
  }
  auto sc = student_covariates(ctx);
  for (const auto& note : sc.notes) ctx.log << "survival: " << note << '\n';
  {
    Report r(ctx.out, "survival_records.tsv", ctx.hash);
    survival::write_survival_table(r.stream(), sc.data);
  }
  if (sc.data.size() < 2) {
    ctx.log << "survival: need at least two students\n";
    return kFlagged;
  }
  const auto prep = survival::prepare_covariates(sc.data, ctx.cfg.corr_threshold);
  Report cov(ctx.out, "survival_covariates.tsv", ctx.hash);
  cov.row({"covariate", "status"});
  for (const auto& k : prep.kept) cov.row({k, "kept"});
  for (const auto& msg : prep.diagnostics) cov.row({msg, "dropped"});
  if (prep.data.event.sum() == 0) {
    ctx.log << "survival: no dropout events\n";
    return kFlagged;
  }
  const auto model = ctx.cfg.hazard_model == "discrete" ? survival::fit_discrete_hazard(prep.data)
                                                        : survival::fit_cox(prep.data);
  Report r(ctx.out, "hazard_report.tsv", ctx.hash);
  survival::write_hazard_report(r.stream(), model);
  if (!model.converged) {
    ctx.log << "survival: fit did not converge (gradient norm " << fmt_num(model.gradient_norm) << ")\n";
    return kFlagged;
  }
  return kOk;
}

int stage_sna(Context& ctx) {
  const auto sc = transition_clusters(ctx);
  if (sc.students.size() < 3) {
    ctx.log << "sna: need at least three students with transitions\n";
    return kFlagged;
  }
  const auto covs = student_covariates(ctx);
  std::map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < covs.data.ids.size(); ++i) row_of[covs.data.ids[i]] = static_cast<Eigen::Index>(i);
  const Eigen::Index eng_col = 1 + actions::kNumCategories;

  std::vector<int> eng_level, processing, vpp_bin;
  for (const auto& s : sc.students) {
    const auto r = row_of.at(s);
    eng_level.push_back(static_cast<int>(covs.data.x(r, eng_col)));
    vpp_bin.push_back(static_cast<int>(covs.data.x(r, eng_col + 1)));
    processing.push_back(static_cast<int>(ipi::interpret(static_cast<int>(std::lround(covs.data.x(r, 0))))));
  }
  const auto vwss_net = sna::comembership_network(sc.cluster, sc.students);
  const auto eng_net = sna::exact_match_matrix<int>(eng_level, sc.students);
  const auto ipi_net = sna::exact_match_matrix<int>(processing, sc.students);
  const auto vpp_net = sna::exact_match_matrix<int>(vpp_bin, sc.students);
  const auto multiplex = sna::multiplex_and(vwss_net, eng_net);

  {
    Report e(ctx.out, "edges_vwss_similarity.tsv", ctx.hash);
    sna::write_edge_list(e.stream(), vwss_net);
  }
  Report d(ctx.out, "sna_density.tsv", ctx.hash);
  d.row({"network", "group", "nodes", "ties", "dyads", "density"});
  auto dens = [&](const std::string& name, const sna::Adjacency& a) {
    d.row({name, "all", std::to_string(a.size()), std::to_string(a.ties()),
           std::to_string(a.size() * (a.size() - 1) / 2), fmt_fixed(sna::density(a), 6)});
    for (const auto& g : sna::density_by_group(a, eng_level).groups)
      d.row({name, "engagement=" + std::to_string(g.group), std::to_string(g.nodes), std::to_string(g.ties),
             std::to_string(g.dyads), fmt_fixed(g.density, 6)});
  };
  dens("vwss_similarity", vwss_net);
  dens("vwss_and_engagement", multiplex);

  Report q(ctx.out, "qap_report.tsv", ctx.hash);
  q.row({"analysis", "term", "observed", "p", "n_perm", "seed"});
  const auto ei = sna::ei_index(vwss_net, eng_level);
  q.row({"ei_index", "engagement", ei ? fmt_fixed(*ei, 6) : "NA", "NA", "NA", "NA"});
  const auto qc = sna::qap_correlation(vwss_net, eng_net, ctx.cfg.permutations, ctx.cfg.seed);
  q.row({"qap_correlation", "engagement", qc.undefined ? "NA" : fmt_fixed(qc.r_observed, 6),
         qc.undefined ? "NA" : fmt_num(qc.p), std::to_string(qc.n_perm), std::to_string(qc.seed)});
  if (qc.undefined) ctx.log << "sna: QAP correlation undefined (constant matrix)\n";

  std::vector<sna::Adjacency> xs;
  std::vector<std::string> names;
  for (auto [name, net] : {std::pair<const char*, const sna::Adjacency*>{"engagement", &eng_net},
                           {"processing", &ipi_net}, {"play_proportion", &vpp_net}}) {
    const auto v = sna::dyad_vector(*net);
    if ((v.array() == v(0)).all()) {
      ctx.log << "sna: predictor " << name << " is constant, left out\n";
      continue;
    }
    xs.push_back(*net);
    names.emplace_back(name);
  }
  if (xs.empty()) return kOk;
  try {
    const auto reg = sna::qap_regression(vwss_net, xs, ctx.cfg.permutations, ctx.cfg.seed, names);
    q.row({"qap_regression", "intercept", fmt_fixed(reg.intercept, 6), fmt_num(reg.intercept_p),
           std::to_string(reg.n_perm), std::to_string(reg.seed)});
    for (std::size_t j = 0; j < names.size(); ++j)
      q.row({"qap_regression", names[j], fmt_fixed(reg.coefficients(static_cast<Eigen::Index>(j)), 6),
             fmt_num(reg.p(static_cast<Eigen::Index>(j))), std::to_string(reg.n_perm), std::to_string(reg.seed)});
    q.row({"qap_regression", "r_squared", fmt_fixed(reg.r_squared, 6), "NA", "NA", "NA"});
  } catch (const std::domain_error& e) {
    ctx.log << "sna: " << e.what() << '\n';
    return kFlagged;
  }
  return kOk;
}

int stage_stats(Context& ctx) {
  const auto sc = transition_clusters(ctx);
  if (sc.students.size() < 2) {
    ctx.log << "stats: need at least two clustered students\n";
    return kFlagged;
  }
  const auto by_student = rows_by_student(ctx.corpus);
  const int k = static_cast<int>(sc.result.centroids.rows());
  std::vector<std::vector<double>> ipi_groups(static_cast<std::size_t>(k));
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(k, 3);
  for (std::size_t i = 0; i < sc.students.size(); ++i) {
    for (auto r : by_student.at(sc.students[i])) {
      const int v = ctx.corpus.ipi[r];
      ipi_groups[static_cast<std::size_t>(sc.cluster[i])].push_back(v);
      table(sc.cluster[i], static_cast<int>(ipi::interpret(v))) += 1;
    }
  }
  std::vector<stats::TestRecord> records;
  int status = kOk;
  const auto anova = stats::one_way_anova(ipi_groups);
  records.push_back({"anova_ipi_by_cluster", "F", anova.f.value_or(std::nan("")),
                     std::to_string(anova.df_between) + "," + std::to_string(anova.df_within),
                     anova.p.value_or(std::nan(""))});

  Report t(ctx.out, "tukey.tsv", ctx.hash);
  t.row({"group_i", "group_j", "mean_diff", "critical", "significant"});
  if (anova.f && k <= 10) {
    for (const auto& p : stats::tukey_hsd(ipi_groups, 0.05))
      t.row({std::to_string(p.i), std::to_string(p.j), fmt_fixed(p.mean_diff, 6), fmt_fixed(p.critical, 6),
             p.significant ? "yes" : "no"});
  }

  // Drop empty processing columns before the contingency test.
  std::vector<Eigen::Index> cols;
  for (Eigen::Index c = 0; c < 3; ++c)
    if (table.col(c).sum() > 0) cols.push_back(c);
  Report res(ctx.out, "chi_square_residuals.tsv", ctx.hash);
  res.row({"cluster", "processing", "observed", "expected", "residual"});
  if (cols.size() >= 2 && k >= 2) {
    Eigen::MatrixXd sub(k, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = table.col(cols[c]);
    try {
      const auto chi = stats::chi_square(sub);
      records.push_back({"chi_square_cluster_by_processing", "chi2", chi.statistic, std::to_string(chi.df), chi.p});
      for (Eigen::Index r = 0; r < k; ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) {
          const auto cc = static_cast<Eigen::Index>(c);
          res.row({std::to_string(r),
                   std::string(ipi::processing_name(static_cast<ipi::Processing>(cols[c]))),
                   fmt_num(sub(r, cc)), fmt_fixed(chi.expected(r, cc), 6), fmt_fixed(chi.residuals(r, cc), 6)});
        }
    } catch (const std::domain_error& e) {
      ctx.log << "stats: " << e.what() << '\n';
      status = kFlagged;
    }
  }

  // Engagement of students who dropped out vs completers.
  if (final_week(ctx) > 0) {
    const auto covs = student_covariates(ctx);
    const Eigen::Index col = covs.data.x.cols() - 1;
    std::vector<double> drop, stay;
    for (Eigen::Index r = 0; r < covs.data.size(); ++r)
      (covs.data.event(r) ? drop : stay).push_back(covs.data.x(r, col));
    const Eigen::VectorXd all = covs.data.x.col(col);
    const double sd = all.size() > 1
                          ? std::sqrt((all.array() - all.mean()).square().sum() / static_cast<double>(all.size() - 1))
                          : 0.0;
    if (!drop.empty() && !stay.empty() && sd > 0) {
      auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
      const auto z = stats::two_sample_z(mean(drop), mean(stay), sd, drop.size(), stay.size());
      records.push_back({"z_engagement_dropout_vs_completer", "|z|", z.abs_z, "NA", z.p});
    }
  }
  Report r(ctx.out, "stats_tests.tsv", ctx.hash);
  stats::write_test_records(r.stream(), records);
  return status;
}

int stage_report(Context& ctx) {
  const auto& cor = ctx.corpus;
  auto summarize = [&](const std::string& file, const std::string& key_name,
                       const std::function<std::string(std::size_t)>& key) {
    std::map<std::string, std::vector<int>> groups;
    for (std::size_t i = 0; i < cor.vwss.size(); ++i) groups[key(i)].push_back(cor.ipi[i]);
    Report r(ctx.out, file, ctx.hash);
    r.row({key_name, "n", "mean_ipi", "sd_ipi", "share_high", "share_neutral", "share_low"});
    for (const auto& [k, v] : groups) {
      const double n = static_cast<double>(v.size());
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
      double ss = 0;
      std::array<double, 3> share{};
      for (int x : v) {
        ss += (x - mean) * (x - mean);
        share[static_cast<std::size_t>(ipi::interpret(x))] += 1.0 / n;
      }
      r.row({k, std::to_string(v.size()), fmt_fixed(mean, 6), v.size() > 1 ? fmt_fixed(std::sqrt(ss / (n - 1)), 6) : "NA",
             fmt_fixed(share[2], 6), fmt_fixed(share[1], 6), fmt_fixed(share[0], 6)});
    }
  };
  summarize("ipi_by_video.tsv", "video_id", [&](std::size_t i) { return cor.vwss[i].video_id; });
  summarize("ipi_by_week.tsv", "week", [&](std::size_t i) {
    return cor.vwss[i].week ? std::to_string(*cor.vwss[i].week) : std::string("NA");
  });
  summarize("ipi_by_student.tsv", "student_id", [&](std::size_t i) { return cor.vwss[i].student_id; });
  const auto eng = engagement_levels(cor);
  summarize("ipi_by_engagement.tsv", "engagement",
            [&](std::size_t i) { return std::string(actions::level_name(eng[i])); });
  return kOk;
}

int stage_synth(const PipelineConfig& cfg, const std::string& input, const fs::path& out,
                const std::string& hash) {
  synth::CohortSpec spec;
  const std::string spec_path = !input.empty() ? input : cfg.cohort_spec_path;
  if (!spec_path.empty()) {
    auto in = open_input(spec_path);
    try {
      spec = synth::parse_cohort_spec(in);
    } catch (const std::exception& e) {
      throw SchemaError(e.what());
    }
  } else {
    spec = synth::two_archetype_spec(cfg.synth_students, cfg.seed);
  }
  const auto cohort = synth::generate_cohort(spec);
  {
    std::ofstream f(out / "events.jsonl");
    synth::write_event_log(f, cohort);
  }
  {
    std::ofstream f(out / "cohort_spec.json");
    synth::write_cohort_spec(f, spec);
  }
  Report s(out, "truth_students.tsv", hash);
  synth::write_student_truth(s.stream(), cohort);
  Report v(out, "truth_sessions.tsv", hash);
  synth::write_session_truth(v.stream(), cohort);
  Report k(out, "truth_kernels.tsv", hash);
  synth::write_kernel_truth(k.stream(), spec);
  return kOk;
}

}  // namespace

// ---------------------------------------------------------------------------

void PipelineConfig::validate() const {
  auto bad = [](const std::string& field) { throw std::invalid_argument("config: " + field + " out of range"); };
  if (!(scroll_window > 0 && scroll_window <= 60)) bad("scroll_window");
  if (rare_threshold < 0) bad("rare_threshold");
  if (!(corr_threshold > 0 && corr_threshold <= 1)) bad("corr_threshold");
  if (markov_order < 1 || markov_order > markov::kMaxOrder) bad("markov_order");
  if (max_order_sweep < 1 || max_order_sweep > markov::kMaxOrder) bad("max_order_sweep");
  if (markov_k < 1) bad("markov_k");
  if (vwss_k < 1) bad("vwss_k");
  if (restarts < 1) bad("restarts");
  if (folds < 2) bad("folds");
  if (permutations < 1) bad("permutations");
  if (!(lambda >= 0)) bad("lambda");
  if (hazard_model != "cox" && hazard_model != "discrete") bad("hazard_model");
  if (final_week < 0) bad("final_week");
  if (synth_students < 0) bad("synth_students");
}

PipelineConfig parse_config(std::istream& in) {
  PipelineConfig c;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  const json defaults = to_json(c);
  for (const auto& [key, value] : j.items())
    if (!defaults.contains(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  try {
    c.catalog_path = j.value("catalog_path", c.catalog_path);
    c.ipi_table_path = j.value("ipi_table_path", c.ipi_table_path);
    c.cohort_spec_path = j.value("cohort_spec_path", c.cohort_spec_path);
    c.scroll_window = j.value("scroll_window", c.scroll_window);
    c.rare_threshold = j.value("rare_threshold", c.rare_threshold);
    c.corr_threshold = j.value("corr_threshold", c.corr_threshold);
    c.markov_order = j.value("markov_order", c.markov_order);
    c.max_order_sweep = j.value("max_order_sweep", c.max_order_sweep);
    c.markov_k = j.value("markov_k", c.markov_k);
    c.vwss_k = j.value("vwss_k", c.vwss_k);
    c.restarts = j.value("restarts", c.restarts);
    c.folds = j.value("folds", c.folds);
    c.permutations = j.value("permutations", c.permutations);
    c.lambda = j.value("lambda", c.lambda);
    c.cost_sensitive = j.value("cost_sensitive", c.cost_sensitive);
    c.seed = j.value("seed", c.seed);
    if (j.contains("variant")) {
      const auto v = ingest::parse_engagement_variant(j.at("variant").get<std::string>());
      if (!v) throw std::invalid_argument("config: variant must be full or pause_seek_only");
      c.variant = *v;
    }
    c.hazard_model = j.value("hazard_model", c.hazard_model);
    c.final_week = j.value("final_week", c.final_week);
    c.synth_students = j.value("synth_students", c.synth_students);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

void write_config(std::ostream& out, const PipelineConfig& cfg) { out << to_json(cfg).dump(2) << '\n'; }

std::string config_hash(const PipelineConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(cfg).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = hex[h & 0xF];
  return s;
}

std::vector<std::string> Corpus::students() const {
  std::set<std::string> s;
  for (const auto& v : vwss) s.insert(v.student_id);
  return {s.begin(), s.end()};
}

Corpus build_corpus(std::istream& events, const PipelineConfig& cfg,
                    const actions::BehavioralCatalog& catalog, const ipi::IpiWeightTable& table) {
  Corpus c;
  auto parsed = ingest::parse_event_log(events);
  c.errors = std::move(parsed.errors);
  for (auto group : ingest::group_by_pair(parsed.events))
    c.vwss.push_back(ingest::encode_vwss(group, cfg.scroll_window));
  for (const auto& v : c.vwss) {
    c.raw.push_back(actions::raw_weights(v.tokens, catalog));
    c.engagement.push_back(ingest::compute_engagement(v, cfg.variant));
    if (v.video_length > 0) {
      c.play_proportion.push_back(ingest::compute_play_proportion(v));
    } else {
      c.play_proportion.push_back(0.0);
      c.notes.push_back(v.student_id + "/" + v.video_id + ": unknown video length, play proportion 0");
    }
  }
  if (c.vwss.size() >= 2) {
    c.actions = actions::summarize_actions(c.raw);
  } else {
    for (const auto& r : c.raw) {
      actions::BehavioralActionVector b;
      b.raw = r;
      b.level.fill(actions::Level::High);
      c.actions.push_back(b);
    }
    if (!c.vwss.empty()) c.notes.push_back("single sequence: every action level set High");
  }
  for (const auto& a : c.actions) c.ipi.push_back(ipi::compute_ipi(a, table));
  return c;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"encode", "actions", "ipi",   "cluster", "predict", "survival",
                                              "sna",    "stats",   "synth", "report",  "all"};
  return names;
}

int run(const std::string& subcommand, const std::string& input, const std::string& out_dir,
        const PipelineConfig& cfg, std::ostream& log) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
    log << "unknown subcommand: " << subcommand << '\n';
    return kFlagged;
  }
  try {
    cfg.validate();
    const fs::path out(out_dir.empty() ? "." : out_dir);
    fs::create_directories(out);
    const auto hash = config_hash(cfg);
    if (subcommand == "synth") return stage_synth(cfg, input, out, hash);

    actions::BehavioralCatalog catalog = actions::default_catalog();
    if (!cfg.catalog_path.empty()) {
      auto in = open_input(cfg.catalog_path);
      try {
        catalog = actions::parse_catalog(in);
      } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("catalog: ") + e.what());
      }
    }
    ipi::IpiWeightTable table = ipi::default_weight_table();
    if (!cfg.ipi_table_path.empty()) {
      auto in = open_input(cfg.ipi_table_path);
      try {
        table = ipi::parse_weight_table(in);
      } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("ipi table: ") + e.what());
      }
    }
    if (input.empty()) throw MissingInput("no input event log given");
    auto in = open_input(input);
    Context ctx{cfg, out, hash, log, build_corpus(in, cfg, catalog, table), catalog, table};
    for (const auto& n : ctx.corpus.notes) log << "note: " << n << '\n';

    std::map<std::string, std::function<int(Context&)>> stages{
        {"encode", stage_encode},   {"actions", stage_actions}, {"ipi", stage_ipi},
        {"cluster", stage_cluster}, {"predict", stage_predict}, {"survival", stage_survival},
        {"sna", stage_sna},         {"stats", stage_stats},     {"report", stage_report}};
    int status = kOk;
    if (subcommand == "all") {
      for (const char* s : {"encode", "actions", "ipi", "cluster", "predict", "survival", "sna", "stats", "report"})
        status = std::max(status, stages.at(s)(ctx) == kOk ? kOk : static_cast<int>(kFlagged));
    } else {
      status = stages.at(subcommand)(ctx);
    }
    if (!ctx.corpus.errors.empty()) {
      Report d(out, "diagnostics.tsv", hash);
      d.row({"line", "message"});
      for (const auto& e : ctx.corpus.errors) {
        d.row({std::to_string(e.line), e.message});
        log << "line " << e.line << ": " << e.message << '\n';
      }
      return kSchemaError;
    }
    return status;
  } catch (const MissingInput& e) {
    log << e.what() << '\n';
    return kMissingInput;
  } catch (const SchemaError& e) {
    log << e.what() << '\n';
    return kSchemaError;
  } catch (const std::exception& e) {
    log << subcommand << ": " << e.what() << '\n';
    return kFlagged;
  }
}

}  // namespace clickstream::pipeline
