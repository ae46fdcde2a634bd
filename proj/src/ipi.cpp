#include "clickstream/ipi.hpp"

#include <cstdlib>
#include <istream>
#include <stdexcept>
#include <string>

namespace clickstream::ipi {

int IpiWeightTable::max_abs() const {
  int s = 0;
  for (int w : high_weight) s += std::abs(w);
  return s;
}

void IpiWeightTable::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("IPI weight table: ") + what);
  };
  const auto& t = *this;
  require(t[Category::PlayrateTransition] == 0, "PlayrateTransition must be 0");
  require(t[Category::Skipping] == -3, "Skipping must be -3");
  require(t[Category::Rewatch] > 0, "Rewatch must be positive");
  require(t[Category::ClearConcept] > 0, "ClearConcept must be positive");
  require(t[Category::SlowWatching] > 0, "SlowWatching must be positive");
  require(t[Category::FastWatching] < 0, "FastWatching must be negative");
  require(t[Category::CheckbackReference] < 0, "CheckbackReference must be negative");
}

IpiWeightTable default_weight_table() {
  IpiWeightTable t;
  t[Category::ClearConcept] = 3;
  t[Category::Rewatch] = 2;
  t[Category::SlowWatching] = 1;
  t[Category::PlayrateTransition] = 0;
  t[Category::FastWatching] = -1;
  t[Category::CheckbackReference] = -2;
  t[Category::Skipping] = -3;
  return t;
}

IpiWeightTable parse_weight_table(std::istream& in) {
  auto table = default_weight_table();
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    if (eq == std::string::npos)
      throw std::invalid_argument("weight table line " + std::to_string(line_no) + ": expected 'Category = weight'");
    const auto name = strip(line.substr(0, eq));
    const auto cat = actions::parse_category(name);
    if (!cat)
      throw std::invalid_argument("weight table line " + std::to_string(line_no) +
                                  ": unknown category '" + name + "'");
    try {
      std::size_t used = 0;
      const auto value = strip(line.substr(eq + 1));
      table[*cat] = std::stoi(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw std::invalid_argument("weight table line " + std::to_string(line_no) +
                                  ": weight must be an integer");
    }
  }
  table.validate();
  return table;
}

int weight_assign(Category category, Level level, const IpiWeightTable& table) {
  return level == Level::High ? table[category] : -table[category];
}

int weight_assign(std::string_view category, Level level, const IpiWeightTable& table) {
  auto c = actions::parse_category(category);
  if (!c) throw std::domain_error("unknown behavioral category '" + std::string(category) + "'");
  return weight_assign(*c, level, table);
}

int compute_ipi(const actions::BehavioralActionVector& v, const IpiWeightTable& table) {
  int sum = 0;
  for (auto c : actions::kAllCategories) {
    const auto level = v.at(c);
    if (!level)
      throw std::domain_error("compute_ipi: missing level for " +
                              std::string(actions::category_name(c)));
    sum += weight_assign(c, *level, table);
  }
  return sum;
}

std::string_view processing_name(Processing p) {
  switch (p) {
    case Processing::High: return "high";
    case Processing::Low: return "low";
    case Processing::Neutral: return "neutral";
  }
  return "?";
}

}  // namespace clickstream::ipi
