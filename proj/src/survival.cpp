#include "clickstream/survival.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "clickstream/stats.hpp"
#include "clickstream/table.hpp"

namespace clickstream::survival {

void SurvivalData::validate() const {
  const auto n = duration.size();
  if (event.size() != n || x.rows() != n || static_cast<Eigen::Index>(ids.size()) != n)
    throw std::invalid_argument("survival data: row count mismatch");
  if (static_cast<Eigen::Index>(names.size()) != x.cols() ||
      static_cast<Eigen::Index>(kinds.size()) != x.cols())
    throw std::invalid_argument("survival data: covariate name/kind count mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(duration(i) > 0) || !std::isfinite(duration(i)))
      throw std::invalid_argument("survival data: duration must be positive (" + ids[static_cast<std::size_t>(i)] + ")");
    if (event(i) != 0 && event(i) != 1)
      throw std::invalid_argument("survival data: event must be 0 or 1 (" + ids[static_cast<std::size_t>(i)] + ")");
  }
  if (!x.allFinite()) throw std::invalid_argument("survival data: non-finite covariate");
}

namespace {

SurvivalData select_columns(const SurvivalData& d, const std::vector<Eigen::Index>& cols) {
  SurvivalData out;
  out.ids = d.ids;
  out.duration = d.duration;
  out.event = d.event;
  out.x.resize(d.x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.x.col(static_cast<Eigen::Index>(j)) = d.x.col(cols[j]);
    out.names.push_back(d.names[static_cast<std::size_t>(cols[j])]);
    out.kinds.push_back(d.kinds[static_cast<std::size_t>(cols[j])]);
  }
  return out;
}

using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*, Eigen::MatrixXd*)>;

// Damped Newton ascent on a concave log-likelihood.
HazardModel newton_ascent(const Objective& f, Eigen::Index p, const CoxOptions& opt) {
  HazardModel m;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd g;
  Eigen::MatrixXd info;
  double ll = f(beta, &g, &info);
  m.log_likelihood_trace.push_back(ll);
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    if (g.norm() < opt.tolerance) {
      m.converged = true;
      break;
    }
    Eigen::VectorXd step = info.ldlt().solve(g);
    if (!step.allFinite()) step = g;
    const double biggest = step.cwiseAbs().maxCoeff();
    if (biggest > 5.0) step *= 5.0 / biggest;
    double scale = 1.0;
    Eigen::VectorXd trial = beta + step;
    double ll_new = f(trial, nullptr, nullptr);
    while (!(ll_new >= ll) && scale > 1e-10) {
      scale *= 0.5;
      trial = beta + scale * step;
      ll_new = f(trial, nullptr, nullptr);
    }
    if (!(ll_new >= ll)) break;
    beta = std::move(trial);
    ll = f(beta, &g, &info);
    m.log_likelihood_trace.push_back(ll);
  }
  if (!m.converged && g.norm() < opt.tolerance) m.converged = true;
  m.iterations = it;
  m.beta = beta;
  m.log_likelihood = ll;
  m.gradient_norm = g.norm();
  const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  m.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  m.p.resize(p);
  for (Eigen::Index j = 0; j < p; ++j)
    m.p(j) = m.se(j) > 0 ? stats::normal_two_sided_p(m.beta(j) / m.se(j)) : 1.0;
  return m;
}

}  // namespace

PreparedCovariates prepare_covariates(const SurvivalData& data, double corr_threshold) {
  data.validate();
  if (data.size() < 2) throw std::domain_error("prepare_covariates: need at least 2 records");
  PreparedCovariates out;
  SurvivalData z = data;
  std::vector<Eigen::Index> live;
  const double n = static_cast<double>(data.size());
  for (Eigen::Index j = 0; j < z.x.cols(); ++j) {
    const auto name = data.names[static_cast<std::size_t>(j)];
    const double mean = z.x.col(j).mean();
    const double sd = std::sqrt((z.x.col(j).array() - mean).square().sum() / (n - 1.0));
    if (!(sd > 0)) {
      out.dropped.push_back(name);
      out.diagnostics.push_back("covariate " + name + ": zero variance, dropped");
      continue;
    }
    if (data.kinds[static_cast<std::size_t>(j)] == CovariateKind::Numeric)
      z.x.col(j) = (z.x.col(j).array() - mean) / sd;
    live.push_back(j);
  }

  std::vector<Eigen::Index> kept;
  for (auto j : live) {
    bool keep = true;
    for (auto k : kept) {
      const double r = stats::pearson(z.x.col(j), z.x.col(k));
      if (std::abs(r) >= corr_threshold) {
        keep = false;
        const auto& name = data.names[static_cast<std::size_t>(j)];
        out.dropped.push_back(name);
        out.diagnostics.push_back("covariate " + name + ": |r| = " + fmt_fixed(std::abs(r), 3) +
                                  " with " + data.names[static_cast<std::size_t>(k)] + ", dropped");
        break;
      }
    }
    if (keep) kept.push_back(j);
  }
  out.data = select_columns(z, kept);
  out.kept = out.data.names;
  return out;
}

double cox_partial_log_likelihood(const Eigen::VectorXd& duration, const Eigen::VectorXi& event,
                                  const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                                  Eigen::VectorXd* gradient, Eigen::MatrixXd* information) {
  const auto n = x.rows();
  const auto p = x.cols();
  const Eigen::VectorXd eta = x * beta;
  const double shift = n > 0 ? eta.maxCoeff() : 0.0;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return duration(a) > duration(b); });

  double ll = 0.0;
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
  if (gradient) gradient->setZero(p);
  if (information) information->setZero(p, p);

  std::size_t i = 0;
  while (i < order.size()) {
    const double t = duration(order[i]);
    std::size_t end = i;
    // Add the whole tie group to the risk set before scoring its events.
    while (end < order.size() && duration(order[end]) == t) {
      const auto r = order[end];
      const double w = std::exp(eta(r) - shift);
      s0 += w;
      s1 += w * x.row(r).transpose();
      if (information) s2 += w * x.row(r).transpose() * x.row(r);
      ++end;
    }
    double deaths = 0.0;
    Eigen::VectorXd xsum = Eigen::VectorXd::Zero(p);
    for (std::size_t k = i; k < end; ++k) {
      const auto r = order[k];
      if (event(r) == 1) {
        deaths += 1.0;
        ll += eta(r);
        xsum += x.row(r).transpose();
      }
    }
    if (deaths > 0) {
      ll -= deaths * (std::log(s0) + shift);
      const Eigen::VectorXd mean = s1 / s0;
      if (gradient) *gradient += xsum - deaths * mean;
      if (information) *information += deaths * (s2 / s0 - mean * mean.transpose());
    }
    i = end;
  }
  return ll;
}

HazardModel fit_cox(const SurvivalData& data, const CoxOptions& options) {
  data.validate();
  if (data.event.sum() == 0) throw std::domain_error("fit_cox: no events");
  auto f = [&](const Eigen::VectorXd& b, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    return cox_partial_log_likelihood(data.duration, data.event, data.x, b, g, h);
  };
  HazardModel m = newton_ascent(f, data.x.cols(), options);
  m.names = data.names;
  return m;
}

HazardModel fit_discrete_hazard(const SurvivalData& data, const CoxOptions& options) {
  data.validate();
  if (data.event.sum() == 0) throw std::domain_error("fit_discrete_hazard: no events");
  const auto n = data.size();
  const auto p = data.x.cols();
  int periods = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    periods = std::max(periods, static_cast<int>(std::ceil(data.duration(i))));

  std::vector<std::pair<Eigen::Index, int>> rows;  // (record, period index)
  std::vector<double> y;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int last = static_cast<int>(std::ceil(data.duration(i)));
    for (int t = 1; t <= last; ++t) {
      rows.emplace_back(i, t - 1);
      y.push_back(t == last && data.event(i) == 1 ? 1.0 : 0.0);
    }
  }
  const auto m_rows = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(m_rows, p + periods);
  for (Eigen::Index r = 0; r < m_rows; ++r) {
    design.row(r).head(p) = data.x.row(rows[static_cast<std::size_t>(r)].first);
    design(r, p + rows[static_cast<std::size_t>(r)].second) = 1.0;
  }
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), m_rows);
  // Tiny ridge keeps period dummies finite when a period has no events.
  constexpr double ridge = 1e-6;

  auto f = [&](const Eigen::VectorXd& b, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
    const Eigen::VectorXd z = design * b;
    double ll = -0.5 * ridge * b.squaredNorm();
    Eigen::VectorXd mu(m_rows);
    for (Eigen::Index r = 0; r < m_rows; ++r) {
      const double zr = z(r);
      const double softplus = zr > 0 ? zr + std::log1p(std::exp(-zr)) : std::log1p(std::exp(zr));
      ll += yv(r) * zr - softplus;
      mu(r) = 1.0 / (1.0 + std::exp(-zr));
    }
    if (g) *g = design.transpose() * (yv - mu) - ridge * b;
    if (h) {
      const Eigen::VectorXd w = (mu.array() * (1.0 - mu.array())).matrix();
      *h = design.transpose() * w.asDiagonal() * design;
      h->diagonal().array() += ridge;
    }
    return ll;
  };
  HazardModel full = newton_ascent(f, p + periods, options);
  HazardModel m = full;
  m.names = data.names;
  m.beta = full.beta.head(p);
  m.se = full.se.head(p);
  m.p = full.p.head(p);
  return m;
}

std::string interpret_hazard_ratio(double hr) {
  if (hr == 1.0) return "no change";
  if (hr < 1.0) return fmt_fixed((1.0 - hr) * 100.0, 1) + "% less likely";
  return fmt_fixed((hr - 1.0) * 100.0, 1) + "% more likely";
}

void write_hazard_report(std::ostream& out, const HazardModel& model) {
  write_row(out, {"covariate", "beta", "hazard_ratio", "se", "p", "significance", "interpretation"});
  const Eigen::VectorXd hr = model.hazard_ratio();
  for (std::size_t j = 0; j < model.names.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    const double p = model.p(k);
    const char* stars = p < 0.001 ? "***" : p < 0.01 ? "**" : p < 0.05 ? "*" : "";
    write_row(out, {model.names[j], fmt_fixed(model.beta(k), 4), fmt_fixed(hr(k), 4),
                    fmt_fixed(model.se(k), 4), fmt_num(p), stars, interpret_hazard_ratio(hr(k))});
  }
}

SurvivalData read_survival_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("survival table: missing header");
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string c;
    while (std::getline(ss, c, '\t')) cells.push_back(c);
    return cells;
  };
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "student_id" || header[1] != "duration" || header[2] != "event")
    throw std::invalid_argument("survival table: header must start with student_id, duration, event");
  const std::size_t p = header.size() - 3;
  std::vector<std::string> ids;
  std::vector<double> dur, vals;
  std::vector<int> ev;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw std::invalid_argument("survival table line " + std::to_string(lineno) + ": wrong column count");
    try {
      ids.push_back(cells[0]);
      dur.push_back(std::stod(cells[1]));
      ev.push_back(std::stoi(cells[2]));
      for (std::size_t j = 0; j < p; ++j) vals.push_back(std::stod(cells[3 + j]));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("survival table line " + std::to_string(lineno) + ": bad number");
    }
  }
  SurvivalData d;
  const auto n = static_cast<Eigen::Index>(ids.size());
  d.ids = std::move(ids);
  d.duration = Eigen::Map<Eigen::VectorXd>(dur.data(), n);
  d.event = Eigen::Map<Eigen::VectorXi>(ev.data(), n);
  d.x = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      vals.data(), n, static_cast<Eigen::Index>(p));
  d.names.assign(header.begin() + 3, header.end());
  for (Eigen::Index j = 0; j < d.x.cols(); ++j) {
    const auto col = d.x.col(j).array();
    const bool integral = (col == col.round()).all();
    if (integral && (col == 0.0 || col == 1.0).all())
      d.kinds.push_back(CovariateKind::Binary);
    else if (integral && (col >= 0.0).all() && (col <= 3.0).all())
      d.kinds.push_back(CovariateKind::Ordinal);
    else
      d.kinds.push_back(CovariateKind::Numeric);
  }
  d.validate();
  return d;
}

void write_survival_table(std::ostream& out, const SurvivalData& data) {
  std::vector<std::string> header{"student_id", "duration", "event"};
  header.insert(header.end(), data.names.begin(), data.names.end());
  write_row(out, header);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    std::vector<std::string> row{data.ids[static_cast<std::size_t>(i)], fmt_num(data.duration(i)),
                                 std::to_string(data.event(i))};
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) row.push_back(fmt_num(data.x(i, j)));
    write_row(out, row);
  }
}

}  // namespace clickstream::survival
