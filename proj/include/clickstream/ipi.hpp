#pragma once

#include <array>
#include <iosfwd>
#include <string_view>

#include "clickstream/actions.hpp"

namespace clickstream::ipi {

using actions::Category;
using actions::Level;

/// Signed weight contributed by each category when its level is High; the
/// Low level contributes the negation.
struct IpiWeightTable {
  std::array<int, actions::kNumCategories> high_weight{};

  int operator[](Category c) const { return high_weight[static_cast<int>(c)]; }
  int& operator[](Category c) { return high_weight[static_cast<int>(c)]; }

  /// Sum of |weight|, the largest attainable |IPI|.
  int max_abs() const;

  /// Throws std::invalid_argument unless the sign constraints hold:
  /// PlayrateTransition 0, Skipping -3, Rewatch/ClearConcept/SlowWatching
  /// positive, FastWatching/CheckbackReference negative.
  void validate() const;
};

/// ClearConcept +3, Rewatch +2, SlowWatching +1, PlayrateTransition 0,
/// FastWatching -1, CheckbackReference -2, Skipping -3.
///
/// Only Skipping = -3 and PlayrateTransition = 0 are fixed by the published
/// hierarchy; the other magnitudes grade each category by its position in
/// it. Load a different table from config if needed.
IpiWeightTable default_weight_table();

/// "Category = weight" lines; '#' comments. Unlisted categories keep their
/// default. The result is validated.
IpiWeightTable parse_weight_table(std::istream& in);

int weight_assign(Category category, Level level, const IpiWeightTable& table);
int weight_assign(std::string_view category, Level level, const IpiWeightTable& table);

/// Sum over all seven categories of weight_assign. Throws std::domain_error
/// if any level is missing.
int compute_ipi(const actions::BehavioralActionVector& v,
                const IpiWeightTable& table = default_weight_table());

enum class Processing { Low, Neutral, High };

constexpr Processing interpret(int ipi) {
  return ipi > 0 ? Processing::High : ipi < 0 ? Processing::Low : Processing::Neutral;
}

std::string_view processing_name(Processing p);

}  // namespace clickstream::ipi
