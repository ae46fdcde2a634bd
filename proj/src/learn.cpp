#include "clickstream/learn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "clickstream/rng.hpp"
#include "clickstream/stats.hpp"
#include "clickstream/table.hpp"

namespace clickstream::learn {

namespace {

std::string join_symbols(std::span<const std::string> s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += s[i];
  }
  return out;
}

bool contains_run(const TokenSeq& s, const TokenSeq& g) {
  if (g.empty() || g.size() > s.size()) return false;
  return std::search(s.begin(), s.end(), g.begin(), g.end()) != s.end();
}

constexpr const char* kFourLevels[] = {"VL", "L", "H", "VH"};

bool has_two_distinct(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) != v.end();
}

}  // namespace

void add_ngrams(FeatureMap& out, std::span<const std::string> symbols, int n,
                std::string_view prefix) {
  if (n < 1) throw std::domain_error("add_ngrams: n must be >= 1");
  const auto m = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + m <= symbols.size(); ++i)
    out[std::string(prefix) + join_symbols(symbols.subspan(i, m))] += 1.0;
}

FeatureVector extract_features(const ingest::Vwss& v, const actions::BehavioralActionVector* acts,
                               const FeatureConfig& cfg, std::optional<actions::Level> engagement) {
  FeatureVector fv;
  fv.group_id = v.student_id;
  const std::size_t len =
      cfg.prefix ? std::min(*cfg.prefix, v.tokens.size()) : v.tokens.size();
  const TokenSeq tokens(v.tokens.begin(), v.tokens.begin() + static_cast<std::ptrdiff_t>(len));
  std::vector<std::string> names;
  names.reserve(tokens.size());
  for (auto op : tokens) names.emplace_back(op_name(op));

  auto& f = fv.values;
  for (int n : cfg.ngram_lengths) add_ngrams(f, names, n, "ngram:");
  if (cfg.length) f["len:tokens"] = static_cast<double>(tokens.size());
  if (cfg.proportions) {
    std::array<double, kNumOps> counts{};
    for (auto op : tokens) counts[index_of(op)] += 1.0;
    const double total = std::max<double>(1.0, static_cast<double>(tokens.size()));
    for (auto op : kAllOps) f["prop:" + std::string(op_name(op))] = counts[index_of(op)] / total;
  }
  if (cfg.action_levels && acts) {
    for (auto c : actions::kAllCategories)
      if (auto l = acts->at(c))
        f["action:" + std::string(actions::category_name(c))] = *l == actions::Level::High ? 1.0 : 0.0;
  }
  if (engagement) f["eng:high"] = *engagement == actions::Level::High ? 1.0 : 0.0;
  if (cfg.pattern_flags) {
    const auto& catalog = cfg.catalog ? *cfg.catalog : actions::default_catalog();
    for (auto c : actions::kAllCategories)
      for (const auto& g : catalog.of(c))
        if (contains_run(tokens, g))
          f["pat:" + std::string(actions::category_name(c)) + ":" + join_tokens(g)] = 1.0;
  }
  if (cfg.last_click) {
    if (!tokens.empty()) f["last:" + std::string(op_name(tokens.back()))] = 1.0;
    f["tail:seconds"] =
        std::max(0.0, v.video_length - v.played_seconds * ingest::mean_rate(v));
  }
  return fv;
}

TrajectorySet build_trajectories(std::span<const VideoMetrics> rows,
                                 std::span<const std::string> students) {
  TrajectorySet out;
  const auto n = rows.size();
  std::vector<std::string> eng(n), vpp(n), ipi(n);

  if (n > 0) {
    std::map<std::string, std::vector<std::size_t>> by_video;
    for (std::size_t i = 0; i < n; ++i) by_video[rows[i].video_id].push_back(i);
    for (const auto& [video, idx] : by_video) {
      std::vector<double> vals;
      for (auto i : idx) vals.push_back(rows[i].engagement);
      if (!has_two_distinct(vals)) {
        out.diagnostics.push_back("video " + video + ": engagement has no spread, all rows High");
        for (auto i : idx) eng[i] = "H";
        continue;
      }
      const auto d = stats::discretize(vals, stats::BinMode::EqualFrequency, 2);
      for (std::size_t j = 0; j < idx.size(); ++j) eng[idx[j]] = d.labels[j] ? "H" : "L";
    }

    std::vector<double> all_vpp, all_ipi;
    for (const auto& r : rows) {
      all_vpp.push_back(r.play_proportion);
      all_ipi.push_back(r.ipi);
    }
    const auto dv = stats::discretize(all_vpp, stats::BinMode::EqualWidth, 4);
    if (dv.degenerate) out.diagnostics.push_back("play proportion has no spread, all rows VL");
    for (std::size_t i = 0; i < n; ++i) vpp[i] = kFourLevels[dv.labels[i]];
    if (has_two_distinct(all_ipi)) {
      const auto di = stats::discretize(all_ipi, stats::BinMode::EqualFrequency, 4);
      for (std::size_t i = 0; i < n; ++i) ipi[i] = kFourLevels[di.labels[i]];
    } else {
      out.diagnostics.push_back("IPI has no spread, all rows VH");
      for (std::size_t i = 0; i < n; ++i) ipi[i] = "VH";
    }
  }

  std::map<std::string, std::vector<std::size_t>> by_student;
  for (std::size_t i = 0; i < n; ++i) by_student[rows[i].student_id].push_back(i);
  for (const auto& s : students)
    if (!by_student.contains(s))
      out.diagnostics.push_back("student " + s + ": no videos, excluded");

  for (auto& [student, idx] : by_student) {
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (rows[a].order != rows[b].order) return rows[a].order < rows[b].order;
      return rows[a].video_id < rows[b].video_id;
    });
    Trajectory t;
    t.student_id = student;
    for (auto i : idx) {
      t.videos.push_back(rows[i].video_id);
      t.weeks.push_back(rows[i].week);
      t.engagement.push_back(eng[i]);
      t.play_proportion.push_back(vpp[i]);
      t.ipi.push_back(ipi[i]);
    }
    out.trajectories.push_back(std::move(t));
  }
  return out;
}

FeatureMap symbol_proportions(std::span<const std::string> symbols, std::string_view prefix) {
  FeatureMap out;
  if (symbols.empty()) return out;
  for (const auto& s : symbols) out[std::string(prefix) + s] += 1.0;
  for (auto& [k, v] : out) v /= static_cast<double>(symbols.size());
  return out;
}

FeatureMap trajectory_features(const Trajectory& t, std::size_t upto) {
  if (upto < 1 || upto > t.videos.size())
    throw std::domain_error("trajectory_features: upto must be in [1, videos]");
  FeatureMap f;
  const std::pair<const char*, const std::vector<std::string>*> attrs[] = {
      {"eng", &t.engagement}, {"vpp", &t.play_proportion}, {"ipi", &t.ipi}};
  for (const auto& [name, seq] : attrs) {
    const std::span<const std::string> all(*seq);
    const auto history = all.first(upto - 1);
    const std::string key(name);
    for (int n : {4, 5}) add_ngrams(f, history, n, "traj:" + key + ":");
    f["cur:" + key + ":" + all[upto - 1]] = 1.0;
    for (const auto& [k, v] : symbol_proportions(all.first(upto), "prop:" + key + ":")) f[k] = v;
  }
  f["len:videos"] = static_cast<double>(upto - 1);
  return f;
}

std::vector<FeatureVector> course_dropout_rows(std::span<const Trajectory> trajectories,
                                               int final_course_week) {
  std::vector<FeatureVector> out;
  for (const auto& t : trajectories) {
    if (t.videos.empty()) continue;
    const std::set<int> weeks(t.weeks.begin(), t.weeks.end());
    const int last = *weeks.rbegin();
    for (int w : weeks) {
      const auto upto = static_cast<std::size_t>(
          std::count_if(t.weeks.begin(), t.weeks.end(), [w](int x) { return x <= w; }));
      FeatureVector fv;
      fv.values = trajectory_features(t, upto);
      fv.label = dropout_label(w, last, final_course_week);
      fv.group_id = t.student_id;
      out.push_back(std::move(fv));
    }
  }
  return out;
}

std::vector<int> grouped_kfold(std::span<const std::string> group_ids, int k, std::uint64_t seed) {
  std::vector<std::string> groups(group_ids.begin(), group_ids.end());
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  if (k < 2) throw std::domain_error("grouped_kfold: k must be >= 2");
  if (static_cast<std::size_t>(k) > groups.size())
    throw std::domain_error("grouped_kfold: k exceeds the number of groups");
  CounterRng rng(seed, 0);
  rng.shuffle(std::span<std::string>(groups));
  std::map<std::string, int> fold_of;
  for (std::size_t i = 0; i < groups.size(); ++i)
    fold_of[groups[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  std::vector<int> out;
  out.reserve(group_ids.size());
  for (const auto& g : group_ids) out.push_back(fold_of.at(g));
  return out;
}

// ---------------------------------------------------------------------------

LogisticObjective::LogisticObjective(SparseDesign x, std::vector<int> y,
                                     Eigen::VectorXd row_cost, int classes, double lambda)
    : x_(std::move(x)), y_(std::move(y)), cost_(std::move(row_cost)), classes_(classes),
      lambda_(lambda) {
  if (classes_ < 2) throw std::domain_error("LogisticObjective: need at least two classes");
  if (static_cast<Eigen::Index>(y_.size()) != x_.rows() || cost_.size() != x_.rows())
    throw std::invalid_argument("LogisticObjective: size mismatch");
  if (lambda_ < 0) throw std::domain_error("LogisticObjective: lambda must be >= 0");
}

namespace {
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
}  // namespace

Eigen::MatrixXd LogisticObjective::logits(const SparseDesign& x,
                                          const Eigen::VectorXd& theta) const {
  const auto d = x_.cols();
  Eigen::Map<const Eigen::MatrixXd> th(theta.data(), rows(), d + 1);
  Eigen::MatrixXd z = x * th.leftCols(d).transpose();
  z.rowwise() += th.col(d).transpose();
  return z;
}

double LogisticObjective::change(const Eigen::VectorXd& theta, const Eigen::VectorXd& step) const {
  const auto d = x_.cols();
  const auto n = x_.rows();
  const Eigen::MatrixXd z = logits(x_, theta);
  const Eigen::MatrixXd dz = logits(x_, step);
  long double delta = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int yi = y_[static_cast<std::size_t>(i)];
    double term = 0.0;
    if (classes_ == 2) {
      const double zi = z(i, 0), di = dz(i, 0);
      if (std::abs(di) > 1.0) {
        term = softplus(zi + di) - softplus(zi);
      } else {
        // log(1 + p (e^d - 1)) keeps full relative precision for tiny d
        const double p = zi >= 0 ? 1.0 / (1.0 + std::exp(-zi)) : std::exp(zi) / (1.0 + std::exp(zi));
        term = std::log1p(p * std::expm1(di));
      }
      if (yi == 1) term -= di;
    } else {
      const double mx = z.row(i).maxCoeff();
      const Eigen::RowVectorXd e = (z.row(i).array() - mx).exp().matrix();
      const Eigen::RowVectorXd p = e / e.sum();
      if (dz.row(i).cwiseAbs().maxCoeff() > 1.0) {
        const Eigen::RowVectorXd z2 = z.row(i) + dz.row(i);
        const double mx2 = z2.maxCoeff();
        term = mx2 + std::log((z2.array() - mx2).exp().sum()) - mx - std::log(e.sum());
      } else {
        double acc = 0.0;
        for (Eigen::Index c = 0; c < dz.cols(); ++c) acc += p(c) * std::expm1(dz(i, c));
        term = std::log1p(acc);
      }
      term -= dz(i, yi);
    }
    delta += static_cast<long double>(cost_(i)) * term;
  }
  Eigen::Map<const Eigen::MatrixXd> th(theta.data(), rows(), d + 1);
  Eigen::Map<const Eigen::MatrixXd> st(step.data(), rows(), d + 1);
  const auto w = th.leftCols(d);
  const auto sw = st.leftCols(d);
  delta += static_cast<long double>(lambda_) *
           (static_cast<long double>(w.cwiseProduct(sw).sum()) + 0.5L * sw.squaredNorm());
  return static_cast<double>(delta);
}

double LogisticObjective::value(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd g;
  return value_and_gradient(theta, g);
}

double LogisticObjective::value_and_gradient(const Eigen::VectorXd& theta,
                                             Eigen::VectorXd& grad) const {
  const auto d = x_.cols();
  const auto n = x_.rows();
  const Eigen::MatrixXd z = logits(x_, theta);
  Eigen::Map<const Eigen::MatrixXd> th(theta.data(), rows(), d + 1);
  Eigen::MatrixXd resid(n, rows());
  long double loss = 0.0L;  // extended accumulator keeps late line-search decreases visible
  if (classes_ == 2) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double zi = z(i, 0);
      const double yi = y_[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
      loss += cost_(i) * (softplus(zi) - yi * zi);
      const double p = zi >= 0 ? 1.0 / (1.0 + std::exp(-zi)) : std::exp(zi) / (1.0 + std::exp(zi));
      resid(i, 0) = cost_(i) * (p - yi);
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mx = z.row(i).maxCoeff();
      const Eigen::RowVectorXd e = (z.row(i).array() - mx).exp().matrix();
      const double s = e.sum();
      const int yi = y_[static_cast<std::size_t>(i)];
      loss += cost_(i) * (mx + std::log(s) - z(i, yi));
      resid.row(i) = cost_(i) * (e / s);
      resid(i, yi) -= cost_(i);
    }
  }
  const auto w = th.leftCols(d);
  loss += 0.5L * lambda_ * static_cast<long double>(w.squaredNorm());

  grad.resize(parameter_count());
  Eigen::Map<Eigen::MatrixXd> g(grad.data(), rows(), d + 1);
  g.leftCols(d) = (x_.transpose() * resid).transpose() + lambda_ * w;
  g.col(d) = resid.colwise().sum().transpose();
  return static_cast<double>(loss);
}

Eigen::MatrixXd LogisticObjective::probabilities(const SparseDesign& x,
                                                 const Eigen::VectorXd& theta) const {
  const Eigen::MatrixXd z = logits(x, theta);
  Eigen::MatrixXd p(x.rows(), classes_);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (classes_ == 2) {
      const double p1 = 1.0 / (1.0 + std::exp(-z(i, 0)));
      p(i, 0) = 1.0 - p1;
      p(i, 1) = p1;
    } else {
      const Eigen::RowVectorXd e = (z.row(i).array() - z.row(i).maxCoeff()).exp().matrix();
      p.row(i) = e / e.sum();
    }
  }
  return p;
}

Eigen::VectorXd LogisticModel::probabilities(const FeatureMap& x) const {
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(features.size()));
  for (std::size_t j = 0; j < features.size(); ++j)
    if (auto it = x.find(features[j]); it != x.end()) row(static_cast<Eigen::Index>(j)) = it->second;
  const Eigen::VectorXd z = coef * row.transpose() + intercept;
  const auto k = static_cast<Eigen::Index>(classes.size());
  Eigen::VectorXd p(k);
  if (k == 2) {
    p(1) = 1.0 / (1.0 + std::exp(-z(0)));
    p(0) = 1.0 - p(1);
  } else {
    p = (z.array() - z.maxCoeff()).exp().matrix();
    p /= p.sum();
  }
  return p;
}

int LogisticModel::predict(const FeatureMap& x) const {
  Eigen::Index best = 0;
  probabilities(x).maxCoeff(&best);
  return classes[static_cast<std::size_t>(best)];
}

void LogisticModel::dump(std::ostream& out) const {
  write_row(out, {"class", "feature", "weight"});
  for (Eigen::Index r = 0; r < coef.rows(); ++r) {
    const auto label = std::to_string(classes[static_cast<std::size_t>(classes.size() == 2 ? 1 : r)]);
    write_row(out, {label, "(intercept)", fmt_num(intercept(r))});
    for (std::size_t j = 0; j < features.size(); ++j)
      write_row(out, {label, features[j], fmt_num(coef(r, static_cast<Eigen::Index>(j)))});
  }
}

LogisticModel train_logistic(std::span<const FeatureVector> rows, const LogisticOptions& options) {
  LogisticModel model;
  std::map<int, std::size_t> class_count;
  for (const auto& r : rows) ++class_count[r.label];
  if (class_count.size() < 2) throw std::domain_error("train_logistic: need at least two classes");
  for (const auto& [c, n] : class_count) model.classes.push_back(c);

  std::map<std::string, int> presence;
  for (const auto& r : rows)
    for (const auto& [name, v] : r.values)
      if (v != 0.0) ++presence[name];
  for (const auto& [name, count] : presence)
    if (count >= options.rare_threshold) model.features.push_back(name);

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(model.features.size());
  const auto k = static_cast<int>(model.classes.size());
  std::map<std::string, Eigen::Index> column;
  for (Eigen::Index j = 0; j < d; ++j) column[model.features[static_cast<std::size_t>(j)]] = j;
  std::map<int, int> class_index;
  for (int c = 0; c < k; ++c) class_index[model.classes[static_cast<std::size_t>(c)]] = c;

  std::vector<Eigen::Triplet<double>> cells;
  std::vector<int> y(rows.size());
  Eigen::VectorXd cost(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (const auto& [name, v] : r.values)
      if (auto it = column.find(name); it != column.end() && v != 0.0) cells.emplace_back(i, it->second, v);
    y[static_cast<std::size_t>(i)] = class_index.at(r.label);
    double c = 1.0;
    if (!options.class_costs.empty()) {
      if (auto it = options.class_costs.find(r.label); it != options.class_costs.end()) c = it->second;
    } else if (options.cost_sensitive) {
      c = static_cast<double>(n) / (k * static_cast<double>(class_count.at(r.label)));
    }
    cost(i) = c;
  }

  SparseDesign x(n, d);
  x.setFromTriplets(cells.begin(), cells.end());
  const LogisticObjective obj(std::move(x), std::move(y), std::move(cost), k, options.lambda);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(obj.parameter_count());
  Eigen::VectorXd grad, grad_new;
  double f = obj.value_and_gradient(theta, grad);
  model.loss_trace.push_back(f);
  // Limited-memory curvature pairs (s, y) shape the descent direction.
  constexpr std::size_t kMemory = 10;
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  int it = 0;
  for (; it < options.max_iter; ++it) {
    if (grad.norm() < options.tolerance) {
      model.converged = true;
      break;
    }
    Eigen::VectorXd dir = -grad;
    if (pairs.empty()) {
      dir /= std::max(1.0, grad.norm());
    } else {
      std::vector<double> alpha(pairs.size());
      for (std::size_t j = pairs.size(); j-- > 0;) {
        const auto& [sv, yv] = pairs[j];
        alpha[j] = sv.dot(dir) / yv.dot(sv);
        dir -= alpha[j] * yv;
      }
      const auto& [s_last, y_last] = pairs.back();
      dir *= s_last.dot(y_last) / y_last.squaredNorm();
      for (std::size_t j = 0; j < pairs.size(); ++j) {
        const auto& [sv, yv] = pairs[j];
        const double beta = yv.dot(dir) / yv.dot(sv);
        dir += (alpha[j] - beta) * sv;
      }
    }
    double slope = grad.dot(dir);
    if (!(slope < 0)) {
      pairs.clear();
      dir = -grad / std::max(1.0, grad.norm());
      slope = grad.dot(dir);
    }
    double step = 1.0;
    double drop = obj.change(theta, dir);
    while (!(drop <= 1e-4 * step * slope) && step > 1e-20) {
      step *= 0.5;
      drop = obj.change(theta, step * dir);
    }
    if (!(drop < 0)) break;  // no measurable descent left
    Eigen::VectorXd trial = theta + step * dir;
    const double f_new = obj.value_and_gradient(trial, grad_new);
    Eigen::VectorXd sv = trial - theta;
    Eigen::VectorXd yv = grad_new - grad;
    if (sv.dot(yv) > 1e-12 * yv.squaredNorm()) {
      pairs.emplace_back(std::move(sv), std::move(yv));
      if (pairs.size() > kMemory) pairs.pop_front();
    }
    model.loss_decrease.push_back(drop);
    theta = std::move(trial);
    grad = grad_new;
    f = f_new;
    model.loss_trace.push_back(f);
  }
  if (!model.converged && grad.norm() < options.tolerance) model.converged = true;
  model.iterations = it;
  model.final_gradient_norm = grad.norm();

  Eigen::Map<const Eigen::MatrixXd> th(theta.data(), obj.rows(), d + 1);
  model.coef = th.leftCols(d);
  model.intercept = th.col(d);
  return model;
}

ConfusionSummary evaluate_metrics(std::span<const int> predictions, std::span<const int> labels,
                                  int positive_class) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("evaluate_metrics: size mismatch");
  if (labels.empty()) throw std::domain_error("evaluate_metrics: no rows");
  ConfusionSummary s;
  std::set<int> all(labels.begin(), labels.end());
  all.insert(predictions.begin(), predictions.end());
  all.insert(positive_class);
  s.classes.assign(all.begin(), all.end());
  const auto k = static_cast<Eigen::Index>(s.classes.size());
  auto idx = [&](int c) {
    return static_cast<Eigen::Index>(std::lower_bound(s.classes.begin(), s.classes.end(), c) -
                                     s.classes.begin());
  };
  s.confusion = Eigen::MatrixXi::Zero(k, k);
  for (std::size_t i = 0; i < labels.size(); ++i) ++s.confusion(idx(labels[i]), idx(predictions[i]));

  const double total = static_cast<double>(labels.size());
  const double p0 = s.confusion.trace() / total;
  double pe = 0.0;
  for (Eigen::Index c = 0; c < k; ++c)
    pe += (s.confusion.row(c).sum() / total) * (s.confusion.col(c).sum() / total);
  s.accuracy = p0;
  s.kappa = pe == 1.0 ? (p0 == 1.0 ? 1.0 : 0.0) : (p0 - pe) / (1.0 - pe);

  const auto p = idx(positive_class);
  s.tp = s.confusion(p, p);
  s.fn = s.confusion.row(p).sum() - s.tp;
  s.fp = s.confusion.col(p).sum() - s.tp;
  s.tn = static_cast<long>(labels.size()) - s.tp - s.fn - s.fp;
  s.fnr = s.fp + s.tn > 0 ? static_cast<double>(s.fp) / static_cast<double>(s.fp + s.tn) : 0.0;
  s.fnr_conventional =
      s.fn + s.tp > 0 ? static_cast<double>(s.fn) / static_cast<double>(s.fn + s.tp) : 0.0;
  return s;
}

CvReport cross_validate(std::span<const FeatureVector> rows, int folds, std::uint64_t seed,
                        const LogisticOptions& options, int positive_class) {
  std::vector<std::string> groups;
  groups.reserve(rows.size());
  for (const auto& r : rows) groups.push_back(r.group_id);
  const auto fold = grouped_kfold(groups, folds, seed);

  CvReport report;
  std::vector<int> all_pred, all_label;
  for (int f = 0; f < folds; ++f) {
    std::vector<FeatureVector> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (fold[i] == f)
        test.push_back(i);
      else
        train.push_back(rows[i]);
    }
    const auto model = train_logistic(train, options);
    std::vector<int> pred, label;
    for (auto i : test) {
      pred.push_back(model.predict(rows[i].values));
      label.push_back(rows[i].label);
    }
    report.folds.push_back(evaluate_metrics(pred, label, positive_class));
    all_pred.insert(all_pred.end(), pred.begin(), pred.end());
    all_label.insert(all_label.end(), label.begin(), label.end());
  }
  report.pooled = evaluate_metrics(all_pred, all_label, positive_class);
  return report;
}

}  // namespace clickstream::learn
