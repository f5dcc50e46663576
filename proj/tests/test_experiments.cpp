#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "kpzlab/experiments.hpp"

using namespace kpz;
namespace ex = kpz::experiments;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("kpzlab_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Configs small enough for unit tests.
ex::json small_config(ex::Kind k, const fs::path& out) {
  std::vector<std::string> sets{"output_dir=" + ex::json(out.string()).dump()};
  switch (k) {
    case ex::Kind::universality_discrete:
      sets.insert(sets.end(), {"N=[40,80,160]", "count=40", "bootstrap=50"});
      break;
    case ex::Kind::universality_oy:
      sets.insert(sets.end(), {"t=[4.0,8.0]", "count=40", "bootstrap=50", "mesh=64"});
      break;
    case ex::Kind::coupling_gap:
      sets.insert(sets.end(), {"N=[40,80]", "count=8", "steps_per_unit=8"});
      break;
    case ex::Kind::lln:
      sets.insert(sets.end(), {"N=[100,400]", "count=5"});
      break;
    case ex::Kind::laplace_check:
      sets.insert(sets.end(), {"count=200", "levels=3", "base_mesh=32", "bootstrap=50", "u=[1.0]"});
      break;
    case ex::Kind::tw_table:
      sets.insert(sets.end(), {"r_min=-4", "r_max=2", "step=0.5"});
      break;
    case ex::Kind::crossover_check:
      sets.insert(sets.end(), {"r=[-1.0,0.5]"});
      break;
    case ex::Kind::lpp_limit:
      sets.insert(sets.end(), {"N=200", "n=3", "count=40", "betas=[1.0,2.0]"});
      break;
  }
  return ex::resolve(k, nullptr, sets);
}

}  // namespace

TEST(Config, DefaultsValidate) {
  for (const auto& [kind, name] : ex::kind_names()) {
    EXPECT_NO_THROW(ex::validate(kind, ex::defaults(kind))) << name;
    EXPECT_EQ(ex::parse_kind(name), kind);
    EXPECT_FALSE(ex::subcommand(kind).empty());
  }
  EXPECT_THROW(ex::parse_kind("nope"), ConfigError);
}

TEST(Config, LayeringOrder) {
  const ex::json file = {{"alpha", 0.1}, {"count", 77}};
  const auto c = ex::resolve(ex::Kind::universality_discrete, file, {"count=99", "weights.family=\"uniform\""});
  EXPECT_EQ(c["alpha"], 0.1);
  EXPECT_EQ(c["count"], 99);
  EXPECT_EQ(c["weights"]["family"], "uniform");
  EXPECT_EQ(c["beta"], 1.0);
}

TEST(Config, OverrideValueFallsBackToString) {
  EXPECT_EQ(ex::parse_override_value("[1,2]"), ex::json::array({1, 2}));
  EXPECT_EQ(ex::parse_override_value("results/x"), ex::json("results/x"));
}

TEST(Config, ErrorsNameTheField) {
  auto expect_field = [](ex::Kind k, std::vector<std::string> sets, const std::string& field) {
    try {
      ex::resolve(k, nullptr, sets);
      FAIL() << "accepted " << field;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("'" + field + "'"), std::string::npos) << e.what();
    }
  };
  expect_field(ex::Kind::universality_discrete, {"alpha=1.5"}, "alpha");
  expect_field(ex::Kind::universality_discrete, {"N=[]"}, "N");
  expect_field(ex::Kind::universality_discrete, {"weights.family=\"cauchy\""}, "weights");
  expect_field(ex::Kind::lln, {"band=[1.2,0.8]"}, "band");
  expect_field(ex::Kind::tw_table, {"bogus=1"}, "bogus");
  expect_field(ex::Kind::laplace_check, {"delta=1.5"}, "delta");
  expect_field(ex::Kind::crossover_check, {"beta=-1"}, "beta");
  EXPECT_THROW(ex::resolve(ex::Kind::lln, ex::json{{"experiment", "tw_table"}}, {}), ConfigError);
}

TEST(Config, HashIgnoresWorkersAndOutput) {
  const auto a = ex::resolve(ex::Kind::tw_table, nullptr, {"workers=1", "output_dir=\"a\""});
  const auto b = ex::resolve(ex::Kind::tw_table, nullptr, {"workers=4", "output_dir=\"b\""});
  const auto c = ex::resolve(ex::Kind::tw_table, nullptr, {"seed=5"});
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Csv, RoundTrip) {
  CsvTable t({"a", "b", "c"});
  t.add(CsvTable::Row() << 0.1 << std::size_t{3} << "x");
  const auto back = parse_csv(t.str());
  EXPECT_EQ(back.str(), t.str());
  EXPECT_EQ(std::stod(back.rows()[0][0]), 0.1);
  EXPECT_THROW(t.add(CsvTable::Row() << 1.0), Error);
}

TEST(Run, TwTableOutputs) {
  const auto out = scratch_dir("tw");
  const auto cfg = small_config(ex::Kind::tw_table, out);
  const auto r = ex::run(ex::Kind::tw_table, cfg, 1);
  EXPECT_EQ(r.samples.rows().size(), 13u);
  EXPECT_EQ(r.samples.header(), (std::vector<std::string>{"r", "F2(r)"}));
  EXPECT_TRUE(r.passed());
}

TEST(Run, EveryExperimentDeterministicAcrossWorkers) {
  const auto out = scratch_dir("det");
  for (const auto& [kind, name] : ex::kind_names()) {
    const auto cfg = small_config(kind, out);
    const auto a = ex::run(kind, cfg, 1);
    const auto b = ex::run(kind, cfg, 3);
    EXPECT_EQ(a.samples.str(), b.samples.str()) << name;
    EXPECT_EQ(a.summary.str(), b.summary.str()) << name;
    EXPECT_FALSE(a.samples.rows().empty()) << name;
  }
}

TEST(Run, CsvHeadersFollowTheContract) {
  const auto out = scratch_dir("headers");
  auto header = [&](ex::Kind k, bool samples) {
    const auto r = ex::run(k, small_config(k, out), 1);
    return samples ? r.samples.header() : r.summary.header();
  };
  using V = std::vector<std::string>;
  EXPECT_EQ(header(ex::Kind::universality_discrete, true),
            (V{"index", "N", "n", "alpha", "beta", "family", "seed", "log_z", "normalized"}));
  EXPECT_EQ(header(ex::Kind::universality_oy, true),
            (V{"index", "n", "t", "beta", "alpha", "mesh", "seed", "log_z", "normalized"}));
  EXPECT_EQ(header(ex::Kind::coupling_gap, false),
            (V{"N", "n", "beta", "family", "gap1_median", "gap1_q90", "gap2_median", "gap2_q90", "normalizer"}));
  EXPECT_EQ(header(ex::Kind::universality_discrete, false),
            (V{"N", "n", "count", "ks", "mean", "mean_lo", "mean_hi", "sd", "sd_lo", "sd_hi"}));
}

TEST(Run, WriteAndVerify) {
  const auto out = scratch_dir("verify");
  const auto cfg = small_config(ex::Kind::crossover_check, out);
  const auto r = ex::run(ex::Kind::crossover_check, cfg, 1);
  const auto dir = ex::write_run(cfg, r, 0.5);
  EXPECT_EQ(dir, out / "crossover_check" / config_hash(cfg));
  for (const char* f : {"samples.csv", "summary.csv", "meta.json"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto meta = ex::json::parse(read_file(dir / "meta.json"));
  EXPECT_EQ(meta["config_hash"], config_hash(cfg));
  EXPECT_EQ(meta["code_version"], ex::kCodeVersion);
  EXPECT_TRUE(meta.contains("stage_seconds"));
  EXPECT_TRUE(ex::verify(out).ok());
  EXPECT_TRUE(ex::verify(dir).ok());

  // Tampering with a CSV is detected.
  std::ofstream(dir / "samples.csv", std::ios::app) << "1,2,3,4,5\n";
  const auto rep = ex::verify(out);
  ASSERT_FALSE(rep.ok());
  EXPECT_NE(rep.problems[0].find("digest"), std::string::npos);
  EXPECT_FALSE(ex::verify(out / "missing").ok());
}

TEST(Run, RerunIsByteIdentical) {
  const auto out = scratch_dir("rerun");
  const auto cfg = small_config(ex::Kind::lpp_limit, out);
  const auto dir = ex::write_run(cfg, ex::run(ex::Kind::lpp_limit, cfg, 1), 0.0);
  const std::string first = read_file(dir / "samples.csv");
  ex::write_run(cfg, ex::run(ex::Kind::lpp_limit, cfg, 2), 0.0);
  EXPECT_EQ(read_file(dir / "samples.csv"), first);
}

#ifdef KPZLAB_CLI
namespace {
int cli(const std::string& args) {
  const int status = std::system((std::string(KPZLAB_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}
}  // namespace

TEST(Cli, ExitCodes) {
  const auto out = scratch_dir("cli");
  const std::string o = " --out " + out.string();
  EXPECT_EQ(cli("tw-table --set r_min=-3 --set r_max=0 --set step=1" + o), 0);
  EXPECT_EQ(cli("verify " + out.string()), 0);
  EXPECT_EQ(cli("tw-table --set alpha=2" + o), 2);
  EXPECT_EQ(cli("lln --set band=[1,0]" + o), 2);
  EXPECT_EQ(cli("tw-table --dry-run" + o), 0);
  EXPECT_EQ(cli("no-such-command"), 2);
  // Criterion thresholds that cannot hold turn into exit status 4 with --check.
  EXPECT_EQ(cli("crossover-check --check --set r=[0.0] --set tolerance=1e-30" + o), 4);
  EXPECT_EQ(cli("verify " + (out / "nothing").string()), 4);
}
#endif
