// kpzlab: command-line front end for the experiments.
//
// Exit codes: 0 success, 1 other errors, 2 bad configuration,
// 3 numerical non-convergence, 4 failed checks (--check) or a failed verify.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kpzlab/experiments.hpp"

namespace {

using kpz::experiments::json;
namespace ex = kpz::experiments;

struct RunOptions {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  std::vector<std::string> sets;
  bool to_stdout = false;
  bool dry_run = false;
  bool check = false;
};

void report_error(const std::string& type, const std::string& message, const json& extra = json::object()) {
  json e = {{"error", type}, {"message", message}};
  for (const auto& [k, v] : extra.items()) e[k] = v;
  std::cerr << e.dump() << "\n";
}

int run_experiment(ex::Kind kind, const RunOptions& o) {
  json file;
  if (!o.config_file.empty()) {
    try {
      file = json::parse(kpz::read_file(o.config_file));
    } catch (const json::parse_error& e) {
      throw kpz::ConfigError("config file '" + o.config_file + "' is not valid JSON: " + e.what());
    } catch (const kpz::Error& e) {
      throw kpz::ConfigError(e.what());
    }
  }
  std::vector<std::string> sets = o.sets;
  if (o.seed) sets.push_back("seed=" + std::to_string(*o.seed));
  if (o.workers) sets.push_back("workers=" + std::to_string(*o.workers));
  if (o.out) sets.push_back("output_dir=" + json(*o.out).dump());
  const json cfg = ex::resolve(kind, file, sets);
  const std::string hash = kpz::config_hash(cfg);

  if (o.dry_run) {
    std::cout << json{{"config", cfg}, {"config_hash", hash}, {"directory", ex::run_directory(cfg).string()}}.dump(2)
              << "\n";
    return 0;
  }

  const auto workers = kpz::resolve_workers(cfg["workers"].get<unsigned>());
  std::cerr << "[kpzlab] " << ex::kind_name(kind) << " config " << hash << ", " << workers << " workers\n";
  const auto start = std::chrono::steady_clock::now();
  const ex::Result r = ex::run(kind, cfg, workers, [](const std::string& msg) {
    std::cerr << "[kpzlab] " << msg << "\n";
  });
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto dir = ex::write_run(cfg, r, wall);
  std::cerr << "[kpzlab] wrote " << dir.string() << " in " << wall << " s\n";
  for (const auto& c : r.checks) {
    std::cerr << "[kpzlab] check " << c.name << ": " << (c.pass ? "pass" : "FAIL")
              << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
  }
  if (o.to_stdout) std::cout << r.summary.str();
  return (o.check && !r.passed()) ? 4 : 0;
}

int run_verify(const std::string& path) {
  const auto rep = ex::verify(path);
  for (const auto& d : rep.checked) std::cerr << "[kpzlab] checked " << d << "\n";
  if (!rep.ok()) {
    report_error("VerifyError", std::to_string(rep.problems.size()) + " problem(s)", {{"problems", rep.problems}});
    return 4;
  }
  std::cout << "ok: " << rep.checked.size() << " run(s) verified\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulations and Fredholm-determinant checks for directed polymers in thin rectangles"};
  app.require_subcommand(1);

  RunOptions opts;
  std::optional<ex::Kind> chosen;
  for (const auto& [kind, name] : ex::kind_names()) {
    auto* sub = app.add_subcommand(ex::subcommand(kind), "Run the " + name + " experiment");
    sub->add_option("--config", opts.config_file, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Master seed");
    sub->add_option("--workers", opts.workers, "Worker threads (0 = all cores)");
    sub->add_option("--out", opts.out, "Output root directory");
    sub->add_option("--set", opts.sets, "Override a config key: key=value (value parsed as JSON)");
    sub->add_flag("--stdout", opts.to_stdout, "Also print summary.csv to stdout");
    sub->add_flag("--dry-run", opts.dry_run, "Print the resolved config and its hash, then exit");
    sub->add_flag("--check", opts.check, "Exit with status 4 when a check fails");
    sub->callback([&chosen, k = kind] { chosen = k; });
  }
  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "Re-check config hashes and file digests of stored runs");
  verify->add_option("path", verify_path, "Run directory or output root")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) return run_verify(verify_path);
    return run_experiment(*chosen, opts);
  } catch (const kpz::ConfigError& e) {
    report_error("ConfigError", e.what());
    return 2;
  } catch (const kpz::ConvergenceError& e) {
    report_error("ConvergenceError", e.what(), {{"previous", e.previous()}, {"last", e.last()}});
    return 3;
  } catch (const std::exception& e) {
    report_error("Error", e.what());
    return 1;
  }
}
