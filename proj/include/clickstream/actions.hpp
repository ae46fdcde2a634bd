#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clickstream/tokens.hpp"

namespace clickstream::actions {

enum class Category {
  Rewatch,
  Skipping,
  FastWatching,
  SlowWatching,
  ClearConcept,
  CheckbackReference,
  PlayrateTransition
};

inline constexpr int kNumCategories = 7;

inline constexpr std::array<Category, kNumCategories> kAllCategories = {
    Category::Rewatch,      Category::Skipping,           Category::FastWatching,
    Category::SlowWatching, Category::ClearConcept,       Category::CheckbackReference,
    Category::PlayrateTransition};

std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view name);

enum class Level { Low, High };
std::string_view level_name(Level l);

/// Click groups (4 tokens each) per behavioral category.
struct BehavioralCatalog {
  std::array<std::vector<TokenSeq>, kNumCategories> groups;

  const std::vector<TokenSeq>& of(Category c) const { return groups[static_cast<int>(c)]; }
};

/// The seven categories with their published click groups.
const BehavioralCatalog& default_catalog();

/// Stanza format:
///   [Rewatch]
///   Pl,Pa,Sb,Pl
///   ...
/// '#' starts a comment. All seven categories must be present; every group
/// must have 4 tokens. Throws std::invalid_argument with a line number.
BehavioralCatalog parse_catalog(std::istream& in);
void write_catalog(std::ostream& out, const BehavioralCatalog& catalog);

struct NgramCount {
  TokenSeq gram;
  int count = 0;
};

/// Most frequent contiguous n-grams across the corpus, skipping grams made
/// only of Pl/Pa. Ties break lexicographically by token names.
std::vector<NgramCount> mine_top_ngrams(std::span<const TokenSeq> corpus, int n = 4, int k = 100);

/// Sum of fuzzy pattern weights of the category's groups against `tokens`.
double category_raw_weight(const TokenSeq& tokens, Category category,
                           const BehavioralCatalog& catalog = default_catalog());
double category_raw_weight(const TokenSeq& tokens, std::string_view category,
                           const BehavioralCatalog& catalog = default_catalog());

using RawWeights = std::array<double, kNumCategories>;

RawWeights raw_weights(const TokenSeq& tokens, const BehavioralCatalog& catalog = default_catalog());

struct BehavioralActionVector {
  RawWeights raw{};
  std::array<std::optional<Level>, kNumCategories> level{};

  std::optional<Level> at(Category c) const { return level[static_cast<int>(c)]; }
};

/// High iff value >= median; requires at least two values.
std::vector<Level> median_split(std::span<const double> values);

/// Corpus-level High/Low dichotomization per category.
std::vector<BehavioralActionVector> summarize_actions(std::span<const RawWeights> corpus_weights);

}  // namespace clickstream::actions
