#include "clickstream/strdist.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace clickstream::strdist {

QgramProfile QgramProfile::of(const TokenSeq& seq, int q) {
  if (q < 1) throw std::domain_error("q-gram length must be positive");
  QgramProfile p;
  p.q = q;
  const auto len = static_cast<std::size_t>(q);
  for (std::size_t i = 0; i + len <= seq.size(); ++i)
    ++p.counts[TokenSeq(seq.begin() + static_cast<std::ptrdiff_t>(i),
                        seq.begin() + static_cast<std::ptrdiff_t>(i + len))];
  return p;
}

double QgramProfile::norm() const {
  double ss = 0.0;
  for (const auto& [gram, c] : counts) ss += static_cast<double>(c) * c;
  return std::sqrt(ss);
}

double QgramProfile::dot(const QgramProfile& other) const {
  const auto& small = counts.size() <= other.counts.size() ? counts : other.counts;
  const auto& large = counts.size() <= other.counts.size() ? other.counts : counts;
  double acc = 0.0;
  for (const auto& [gram, c] : small)
    if (auto it = large.find(gram); it != large.end()) acc += static_cast<double>(c) * it->second;
  return acc;
}

double qgram_cosine_distance(const TokenSeq& s, const TokenSeq& t, int q) {
  if (q < 1) throw std::domain_error("qgram_cosine_distance: q must be >= 1");
  const auto ps = QgramProfile::of(s, q);
  const auto pt = QgramProfile::of(t, q);
  if (ps.empty() || pt.empty()) return s == t ? 0.0 : 1.0;
  const double d = 1.0 - ps.dot(pt) / (ps.norm() * pt.norm());
  return std::clamp(d, 0.0, 1.0);
}

Eigen::MatrixXd levenshtein_table(const TokenSeq& s, const TokenSeq& t, const EditWeights& w) {
  if (w.w_del < 0 || w.w_ins < 0 || w.w_sub < 0)
    throw std::domain_error("edit weights must be nonnegative");
  const auto m = static_cast<Eigen::Index>(s.size());
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd d(m + 1, n + 1);
  d(0, 0) = 0.0;
  for (Eigen::Index j = 1; j <= n; ++j) d(0, j) = d(0, j - 1) + w.w_del;
  for (Eigen::Index i = 1; i <= m; ++i) d(i, 0) = d(i - 1, 0) + w.w_ins;
  for (Eigen::Index i = 1; i <= m; ++i) {
    for (Eigen::Index j = 1; j <= n; ++j) {
      const double sub = s[static_cast<std::size_t>(i - 1)] == t[static_cast<std::size_t>(j - 1)]
                             ? 0.0
                             : w.w_sub;
      d(i, j) = std::min({d(i, j - 1) + w.w_del, d(i - 1, j) + w.w_ins, d(i - 1, j - 1) + sub});
    }
  }
  return d;
}

double weighted_levenshtein(const TokenSeq& s, const TokenSeq& t, const EditWeights& w) {
  if (w.w_del < 0 || w.w_ins < 0 || w.w_sub < 0)
    throw std::domain_error("edit weights must be nonnegative");
  // Two-row version of levenshtein_table.
  std::vector<double> prev(t.size() + 1), cur(t.size() + 1);
  for (std::size_t j = 1; j <= t.size(); ++j) prev[j] = prev[j - 1] + w.w_del;
  for (std::size_t i = 1; i <= s.size(); ++i) {
    cur[0] = prev[0] + w.w_ins;
    for (std::size_t j = 1; j <= t.size(); ++j) {
      const double sub = s[i - 1] == t[j - 1] ? 0.0 : w.w_sub;
      cur[j] = std::min({cur[j - 1] + w.w_del, prev[j] + w.w_ins, prev[j - 1] + sub});
    }
    std::swap(prev, cur);
  }
  return prev[t.size()];
}

MatchCase classify_match(const TokenSeq& pattern, const TokenSeq& s) {
  if (!pattern.empty() && std::search(s.begin(), s.end(), pattern.begin(), pattern.end()) != s.end())
    return MatchCase::Full;
  std::array<bool, kNumOps> in_s{};
  for (auto op : s) in_s[index_of(op)] = true;
  for (auto op : pattern)
    if (in_s[index_of(op)]) return MatchCase::Partial;
  return MatchCase::None;
}

double fuzzy_pattern_weight(const TokenSeq& pattern, const TokenSeq& s) {
  if (pattern.size() != kPatternLength)
    throw std::domain_error("fuzzy_pattern_weight: pattern must have 4 tokens");
  switch (classify_match(pattern, s)) {
    case MatchCase::Full: return 1.0 - qgram_cosine_distance(pattern, s, kPatternLength);
    case MatchCase::None: return 1.0 - weighted_levenshtein(pattern, s, kNoMatchWeights);
    case MatchCase::Partial: return 1.0 - weighted_levenshtein(pattern, s, kPartialMatchWeights);
  }
  return 0.0;
}

}  // namespace clickstream::strdist
