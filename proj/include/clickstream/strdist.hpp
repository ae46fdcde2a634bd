#pragma once

#include <map>

#include <Eigen/Dense>

#include "clickstream/tokens.hpp"

namespace clickstream::strdist {

/// Occurrence counts of every contiguous q-token window.
struct QgramProfile {
  int q = 1;
  std::map<TokenSeq, int> counts;

  static QgramProfile of(const TokenSeq& seq, int q);
  bool empty() const { return counts.empty(); }
  double norm() const;
  double dot(const QgramProfile& other) const;
};

/// Costs for turning t into s: deleting a token of t, inserting a token of
/// s, substituting a mismatched token.
struct EditWeights {
  double w_del = 1.0;
  double w_ins = 1.0;
  double w_sub = 1.0;
};

/// 1 - cos(v(s;q), v(t;q)), clamped to [0, 1]. When either profile is empty
/// the distance is 0 for identical sequences and 1 otherwise.
double qgram_cosine_distance(const TokenSeq& s, const TokenSeq& t, int q);

/// Full DP table D with D(i, j) the cost between s[0..i) and t[0..j).
Eigen::MatrixXd levenshtein_table(const TokenSeq& s, const TokenSeq& t, const EditWeights& w);

double weighted_levenshtein(const TokenSeq& s, const TokenSeq& t, const EditWeights& w);

inline constexpr int kPatternLength = 4;
inline constexpr EditWeights kNoMatchWeights{0.0, 1.0, 1.0};
inline constexpr EditWeights kPartialMatchWeights{0.1, 1.0, 1.0};

enum class MatchCase { Full, None, Partial };

/// Contiguous occurrence -> Full; no shared token -> None; otherwise Partial.
MatchCase classify_match(const TokenSeq& pattern, const TokenSeq& s);

/// Similarity of a 4-token click group to a whole sequence:
///   Full    -> 1 - qgram_cosine_distance(p, s, 4)
///   None    -> 1 - weighted_levenshtein(p, s, {0, 1, 1})
///   Partial -> 1 - weighted_levenshtein(p, s, {0.1, 1, 1})
/// Unnormalized, so long mismatching sequences score well below zero.
double fuzzy_pattern_weight(const TokenSeq& pattern, const TokenSeq& s);

}  // namespace clickstream::strdist
