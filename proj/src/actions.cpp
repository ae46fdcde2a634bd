#include "clickstream/actions.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "clickstream/strdist.hpp"

namespace clickstream::actions {

namespace {

constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "Rewatch",      "Skipping",           "FastWatching",      "SlowWatching",
    "ClearConcept", "CheckbackReference", "PlayrateTransition"};

BehavioralCatalog build_default() {
  const std::array<std::vector<std::string_view>, kNumCategories> raw = {{
      {"PlPaSbPl", "PlSbPaPl", "PaSbPlSb", "SbSbPaPl", "SbPaPlPa", "PaPlSbPa"},
      {"SfSfSfSf", "PaPlSfSf", "PlSfSfSf", "SfSfSfPa", "SfSfPaPl", "SfSfSfSSf", "SfSfSSfSf",
       "SfPaPlPa", "PlPaPlSf"},
      {"PaPlRfRf", "RfPaPlPa", "RfRfPaPl", "RsPaPlRf", "PlPaPlRf"},
      {"RsRsPaPl", "RsPaPlPa", "PaPlRsRs", "PlPaPlRs", "PaPlRsPa", "PlRsPaPl"},
      {"PaSbPlSSb", "SSbSbPaPl", "PaPlSSbSb", "PlSSbSbPa"},
      {"SbSbSbSb", "PlSbSbSb", "SbSbSbPa", "SbSbSbSf", "SfSbSbSb", "SbPlSbSb", "SSbSbSbSb"},
      {"RfRfRsRs", "RfRfRfRs", "RfRsRsRs", "RsRsRsRf", "RsRsRfRf", "RfRfRfRf"},
  }};
  BehavioralCatalog cat;
  for (int c = 0; c < kNumCategories; ++c)
    for (auto g : raw[c]) cat.groups[c].push_back(parse_concatenated(g));
  return cat;
}

bool names_less(const TokenSeq& a, const TokenSeq& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](ClickOp x, ClickOp y) { return op_name(x) < op_name(y); });
}

std::string trim(std::string s) {
  auto hash = s.find('#');
  if (hash != std::string::npos) s.erase(hash);
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

std::string_view category_name(Category c) { return kCategoryNames[static_cast<int>(c)]; }

std::optional<Category> parse_category(std::string_view name) {
  for (int i = 0; i < kNumCategories; ++i)
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  return std::nullopt;
}

std::string_view level_name(Level l) { return l == Level::High ? "High" : "Low"; }

const BehavioralCatalog& default_catalog() {
  static const BehavioralCatalog cat = build_default();
  return cat;
}

BehavioralCatalog parse_catalog(std::istream& in) {
  BehavioralCatalog cat;
  std::array<bool, kNumCategories> seen{};
  std::optional<Category> current;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("catalog line " + std::to_string(line_no) + ": " + msg);
  };
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated stanza header");
      current = parse_category(line.substr(1, line.size() - 2));
      if (!current) fail("unknown category '" + line + "'");
      if (seen[static_cast<int>(*current)]) fail("duplicate category '" + line + "'");
      seen[static_cast<int>(*current)] = true;
      continue;
    }
    if (!current) fail("click group outside a category stanza");
    TokenSeq group;
    try {
      group = parse_token_list(line);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    if (group.size() != strdist::kPatternLength) fail("click group must have 4 tokens");
    cat.groups[static_cast<int>(*current)].push_back(std::move(group));
  }
  for (int c = 0; c < kNumCategories; ++c) {
    if (!seen[c] || cat.groups[c].empty())
      throw std::invalid_argument("catalog: category '" + std::string(kCategoryNames[c]) +
                                  "' missing or empty");
  }
  return cat;
}

void write_catalog(std::ostream& out, const BehavioralCatalog& catalog) {
  for (int c = 0; c < kNumCategories; ++c) {
    if (c) out << '\n';
    out << '[' << kCategoryNames[c] << "]\n";
    for (const auto& g : catalog.groups[c]) out << join_tokens(g) << '\n';
  }
}

std::vector<NgramCount> mine_top_ngrams(std::span<const TokenSeq> corpus, int n, int k) {
  if (n < 1 || k < 1) throw std::domain_error("mine_top_ngrams: n and k must be >= 1");
  std::map<TokenSeq, int> counts;
  const auto len = static_cast<std::size_t>(n);
  for (const auto& seq : corpus) {
    for (std::size_t i = 0; i + len <= seq.size(); ++i) {
      const auto first = seq.begin() + static_cast<std::ptrdiff_t>(i);
      const bool play_pause_only = std::all_of(first, first + n, [](ClickOp op) {
        return op == ClickOp::Pl || op == ClickOp::Pa;
      });
      if (!play_pause_only) ++counts[TokenSeq(first, first + n)];
    }
  }
  std::vector<NgramCount> ranked;
  ranked.reserve(counts.size());
  for (auto& [gram, c] : counts) ranked.push_back({gram, c});
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.count != b.count) return a.count > b.count;
    return names_less(a.gram, b.gram);
  });
  if (ranked.size() > static_cast<std::size_t>(k)) ranked.resize(static_cast<std::size_t>(k));
  return ranked;
}

double category_raw_weight(const TokenSeq& tokens, Category category,
                           const BehavioralCatalog& catalog) {
  double sum = 0.0;
  for (const auto& g : catalog.of(category)) sum += strdist::fuzzy_pattern_weight(g, tokens);
  return sum;
}

double category_raw_weight(const TokenSeq& tokens, std::string_view category,
                           const BehavioralCatalog& catalog) {
  auto c = parse_category(category);
  if (!c) throw std::domain_error("unknown behavioral category '" + std::string(category) + "'");
  return category_raw_weight(tokens, *c, catalog);
}

RawWeights raw_weights(const TokenSeq& tokens, const BehavioralCatalog& catalog) {
  RawWeights w{};
  for (auto c : kAllCategories) w[static_cast<int>(c)] = category_raw_weight(tokens, c, catalog);
  return w;
}

std::vector<Level> median_split(std::span<const double> values) {
  if (values.size() < 2) throw std::domain_error("median split needs at least two values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  const double median =
      n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::vector<Level> out;
  out.reserve(n);
  for (double v : values) out.push_back(v >= median ? Level::High : Level::Low);
  return out;
}

std::vector<BehavioralActionVector> summarize_actions(std::span<const RawWeights> corpus_weights) {
  if (corpus_weights.size() < 2)
    throw std::domain_error("summarize_actions: need at least two students");
  std::vector<BehavioralActionVector> out(corpus_weights.size());
  std::vector<double> column(corpus_weights.size());
  for (int c = 0; c < kNumCategories; ++c) {
    for (std::size_t i = 0; i < corpus_weights.size(); ++i) {
      out[i].raw[c] = corpus_weights[i][c];
      column[i] = corpus_weights[i][c];
    }
    const auto levels = median_split(column);
    for (std::size_t i = 0; i < levels.size(); ++i) out[i].level[c] = levels[i];
  }
  return out;
}

}  // namespace clickstream::actions
