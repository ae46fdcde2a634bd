#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clickstream/pipeline.hpp"

using namespace clickstream;
namespace fs = std::filesystem;
namespace pl = clickstream::pipeline;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("clickstream_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> rows_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> out;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("# ", 0) == 0) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, '\t');) cells.push_back(c);
    out.push_back(cells);
  }
  return out;
}

pl::PipelineConfig small_config() {
  pl::PipelineConfig cfg;
  cfg.synth_students = 16;
  cfg.seed = 4;
  cfg.folds = 3;
  cfg.permutations = 20;
  return cfg;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(CLICKSTREAM_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream ok(R"({"folds": 5, "variant": "pause_seek_only", "seed": 3})");
  const auto c = pl::parse_config(ok);
  CHECK(c.folds == 5);
  CHECK(c.variant == ingest::EngagementVariant::PauseSeekOnly);
  std::stringstream round;
  pl::write_config(round, c);
  const auto back = pl::parse_config(round);
  CHECK(pl::config_hash(back) == pl::config_hash(c));
  CHECK(pl::config_hash(c) != pl::config_hash(pl::PipelineConfig{}));
  CHECK(pl::config_hash(c).size() == 16);
  std::istringstream unknown(R"({"fold": 5})");
  CHECK_THROWS_AS(pl::parse_config(unknown), std::invalid_argument);
  std::istringstream range(R"({"folds": 1})");
  CHECK_THROWS_AS(pl::parse_config(range), std::invalid_argument);
  std::istringstream broken("{");
  CHECK_THROWS_AS(pl::parse_config(broken), std::invalid_argument);
}

TEST_CASE("synth then encode round trip") {
  const auto dir = scratch("roundtrip");
  std::ostringstream log;
  const auto cfg = small_config();
  REQUIRE(pl::run("synth", "", dir.string(), cfg, log) == pl::kOk);
  REQUIRE(pl::run("encode", (dir / "events.jsonl").string(), dir.string(), cfg, log) == pl::kOk);
  const auto sessions = rows_of(dir / "truth_sessions.tsv");
  const auto vwss = rows_of(dir / "vwss.tsv");
  CHECK(vwss.size() == sessions.size());
  CHECK(slurp(dir / "vwss.tsv").rfind("# config_hash " + pl::config_hash(cfg) + "\n", 0) == 0);

  REQUIRE(pl::run("ipi", (dir / "events.jsonl").string(), dir.string(), cfg, log) == pl::kOk);
  const auto ipi = rows_of(dir / "ipi.tsv");
  REQUIRE(ipi.size() > 1);
  for (std::size_t i = 1; i < ipi.size(); ++i) {
    const int v = std::stoi(ipi[i][3]);
    CHECK(v >= -12);
    CHECK(v <= 12);
  }
}

TEST_CASE("reruns are byte identical") {
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  std::ostringstream log;
  const auto cfg = small_config();
  REQUIRE(pl::run("synth", "", a.string(), cfg, log) == pl::kOk);
  const auto events = (a / "events.jsonl").string();
  for (const auto& stage : {"encode", "actions", "cluster", "sna", "stats"}) {
    pl::run(stage, events, a.string(), cfg, log);
    pl::run(stage, events, b.string(), cfg, log);
  }
  int compared = 0;
  for (const auto& f : fs::directory_iterator(b)) {
    CHECK(slurp(f.path()) == slurp(a / f.path().filename()));
    ++compared;
  }
  CHECK(compared >= 10);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("exit");
  std::ostringstream log;
  const pl::PipelineConfig cfg;
  CHECK(pl::run("encode", (dir / "absent.jsonl").string(), dir.string(), cfg, log) == pl::kMissingInput);
  CHECK(pl::run("encode", "", dir.string(), cfg, log) == pl::kMissingInput);
  CHECK(pl::run("dance", "", dir.string(), cfg, log) == pl::kFlagged);
  {
    std::ofstream f(dir / "bad.jsonl");
    f << R"({"student_id":"a","video_id":"v","t":0,"event":"play"})" << '\n'
      << R"({"student_id":"a","video_id":"v","t":4,"event":"pause"})" << '\n'
      << "garbage" << '\n';
  }
  CHECK(pl::run("encode", (dir / "bad.jsonl").string(), dir.string(), cfg, log) == pl::kSchemaError);
  const auto diag = rows_of(dir / "diagnostics.tsv");
  REQUIRE(diag.size() == 2);
  CHECK(diag[1][0] == "3");
  auto bad_cfg = cfg;
  bad_cfg.folds = 0;
  CHECK(pl::run("encode", (dir / "bad.jsonl").string(), dir.string(), bad_cfg, log) != pl::kOk);
}

TEST_CASE("command line front end") {
  const auto dir = scratch("cli");
  CHECK(run_cli("encode --input " + (dir / "none.jsonl").string() + " --out-dir " + dir.string()) == 2);
  CHECK(run_cli("encode --config " + (dir / "none.json").string()) == 2);
  {
    std::ofstream f(dir / "cfg.json");
    f << "{\"colour\": 1}";
  }
  CHECK(run_cli("encode --config " + (dir / "cfg.json").string()) == 3);
  CHECK(run_cli("synth --seed 2 --out-dir " + dir.string() + " --config " + (dir / "cfg.json").string()) == 3);
  {
    std::ofstream f(dir / "cfg.json");
    f << "{\"synth_students\": 6}";
  }
  CHECK(run_cli("synth --seed 2 --out-dir " + dir.string() + " --config " + (dir / "cfg.json").string()) == 0);
  CHECK(fs::exists(dir / "events.jsonl"));
  CHECK(run_cli("encode --variant sideways --input " + (dir / "events.jsonl").string()) == 1);
  const int lev = std::system((std::string(CLICKSTREAM_CLI) + " lev PlSfPaSf Pl,Sf,Pa,Sf,Rf,Rs > " +
                               (dir / "lev.txt").string()).c_str());
  CHECK(lev == 0);
  CHECK(slurp(dir / "lev.txt").find("distance\t0.2\n") != std::string::npos);
}
