#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "clickstream/pipeline.hpp"
#include "clickstream/strdist.hpp"
#include "clickstream/table.hpp"

namespace cs = clickstream;
namespace pl = clickstream::pipeline;

namespace {

cs::TokenSeq read_tokens(const std::string& text) {
  return text.find(',') != std::string::npos ? cs::parse_token_list(text) : cs::parse_concatenated(text);
}

int print_levenshtein(const std::string& s, const std::string& t, double w_del, double w_ins, double w_sub) {
  const auto a = read_tokens(s);
  const auto b = read_tokens(t);
  const auto table = cs::strdist::levenshtein_table(a, b, {w_del, w_ins, w_sub});
  std::vector<std::string> header{""};
  header.push_back("-");
  for (auto op : b) header.emplace_back(cs::op_name(op));
  cs::write_row(std::cout, header);
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    std::vector<std::string> row{i == 0 ? "-" : std::string(cs::op_name(a[static_cast<std::size_t>(i - 1)]))};
    for (Eigen::Index j = 0; j < table.cols(); ++j) row.push_back(cs::fmt_num(table(i, j)));
    cs::write_row(std::cout, row);
  }
  std::cout << "distance\t" << cs::fmt_num(table(table.rows() - 1, table.cols() - 1)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clickstream analysis of video interaction logs"};
  app.require_subcommand(1);

  std::string input, config_path, out_dir = ".", variant;
  std::optional<std::uint64_t> seed;
  std::optional<int> k, folds, permutations;

  for (const auto& name : pl::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--input", input, name == "synth" ? "Cohort spec (JSON); default two-archetype cohort"
                                                      : "Event log, one JSON record per line");
    sub->add_option("--config", config_path, "Pipeline config (JSON)");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--out-dir", out_dir, "Output directory");
    sub->add_option("--variant", variant, "Engagement definition: full | pause_seek_only");
    sub->add_option("--k", k, "Cluster count for transition-matrix k-means");
    sub->add_option("--folds", folds, "Cross-validation folds");
    sub->add_option("--permutations", permutations, "QAP permutations");
  }

  std::string lev_s, lev_t;
  double w_del = 0.1, w_ins = 1.0, w_sub = 1.0;
  auto* lev = app.add_subcommand("lev", "Print a weighted Levenshtein table");
  lev->add_option("source", lev_s)->required();
  lev->add_option("target", lev_t)->required();
  lev->add_option("--w-del", w_del);
  lev->add_option("--w-ins", w_ins);
  lev->add_option("--w-sub", w_sub);

  CLI11_PARSE(app, argc, argv);

  if (lev->parsed()) {
    try {
      return print_levenshtein(lev_s, lev_t, w_del, w_ins, w_sub);
    } catch (const std::exception& e) {
      std::cerr << e.what() << '\n';
      return pl::kFlagged;
    }
  }

  pl::PipelineConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open config file: " << config_path << '\n';
      return pl::kMissingInput;
    }
    try {
      cfg = pl::parse_config(in);
    } catch (const std::exception& e) {
      std::cerr << e.what() << '\n';
      return pl::kSchemaError;
    }
  }
  if (seed) cfg.seed = *seed;
  if (k) cfg.markov_k = *k;
  if (folds) cfg.folds = *folds;
  if (permutations) cfg.permutations = *permutations;
  if (!variant.empty()) {
    const auto v = cs::ingest::parse_engagement_variant(variant);
    if (!v) {
      std::cerr << "unknown variant: " << variant << '\n';
      return pl::kFlagged;
    }
    cfg.variant = *v;
  }

  const auto* sub = app.get_subcommands().front();
  return pl::run(sub->get_name(), input, out_dir, cfg, std::cerr);
}
