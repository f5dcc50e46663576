#pragma once

// Experiment configurations and runners shared by the command-line tool
// and the acceptance suite.  A runner turns a resolved JSON config into
// two CSV tables (samples, summary), diagnostics and pass/fail checks;
// writing them to disk is the caller's business (see write_run).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpzlab/coupling.hpp"
#include "kpzlab/errors.hpp"
#include "kpzlab/fredholm.hpp"
#include "kpzlab/io.hpp"
#include "kpzlab/lattice.hpp"
#include "kpzlab/semidiscrete.hpp"
#include "kpzlab/stats.hpp"
#include "kpzlab/weights.hpp"

namespace kpz::experiments {

using json = nlohmann::json;

inline constexpr const char* kCodeVersion = "0.1.0";

enum class Kind {
  universality_discrete,
  universality_oy,
  coupling_gap,
  lln,
  laplace_check,
  tw_table,
  crossover_check,
  lpp_limit
};

inline const std::vector<std::pair<Kind, std::string>>& kind_names() {
  static const std::vector<std::pair<Kind, std::string>> names = {
      {Kind::universality_discrete, "universality_discrete"},
      {Kind::universality_oy, "universality_oy"},
      {Kind::coupling_gap, "coupling_gap"},
      {Kind::lln, "lln"},
      {Kind::laplace_check, "laplace_check"},
      {Kind::tw_table, "tw_table"},
      {Kind::crossover_check, "crossover_check"},
      {Kind::lpp_limit, "lpp_limit"}};
  return names;
}

inline std::string kind_name(Kind k) {
  for (const auto& [kind, name] : kind_names()) {
    if (kind == k) return name;
  }
  return "unknown";
}

inline Kind parse_kind(const std::string& name) {
  for (const auto& [kind, n] : kind_names()) {
    if (n == name) return kind;
  }
  throw ConfigError("experiment: unknown experiment '" + name + "'");
}

/// Command-line subcommand of each experiment.
inline std::string subcommand(Kind k) {
  switch (k) {
    case Kind::universality_discrete: return "simulate-discrete";
    case Kind::universality_oy: return "simulate-oy";
    case Kind::coupling_gap: return "coupling-gap";
    case Kind::lln: return "lln";
    case Kind::laplace_check: return "laplace-check";
    case Kind::tw_table: return "tw-table";
    case Kind::crossover_check: return "crossover-check";
    case Kind::lpp_limit: return "lpp-limit";
  }
  return "";
}

/// Default configuration; every accepted key appears here.
inline json defaults(Kind k) {
  json c;
  c["experiment"] = kind_name(k);
  c["seed"] = 20240611;
  c["workers"] = 0;
  c["output_dir"] = "results";
  switch (k) {
    case Kind::universality_discrete:
      c["N"] = {500, 2000, 8000};
      c["alpha"] = 0.2;
      c["beta"] = 1.0;
      c["weights"] = {{"family", "gaussian"}};
      c["count"] = 4000;
      c["bootstrap"] = 2000;
      c["ks_max"] = 0.10;
      c["slope_tolerance"] = 0.08;
      break;
    case Kind::universality_oy:
      c["t"] = {100.0, 400.0, 1600.0};
      c["alpha"] = 0.2;
      c["beta"] = 1.0;
      c["count"] = 1000;
      c["mesh"] = 0;
      c["mesh_pilots"] = 8;
      c["bootstrap"] = 2000;
      break;
    case Kind::coupling_gap:
      c["N"] = {500, 2000, 8000};
      c["alpha"] = 0.2;
      c["beta"] = 1.0;
      c["weights"] = {{"family", "rademacher"}};
      c["count"] = 500;
      c["steps_per_unit"] = 32;
      c["horizon_factor"] = 2.0;
      c["envelope_fraction"] = 0.99;
      break;
    case Kind::lln:
      c["N"] = {10000, 100000};
      c["alpha"] = 0.2;
      c["beta"] = 1.0;
      c["weights"] = {{"family", "gaussian"}};
      c["count"] = 50;
      c["band"] = {0.85, 1.15};
      break;
    case Kind::laplace_check:
      c["n"] = 3;
      c["tau"] = 1.0;
      c["u"] = {0.5, 1.0};
      c["count"] = 100000;
      c["base_mesh"] = 0;
      c["levels"] = 6;
      c["delta"] = 0.5;
      c["bootstrap"] = 2000;
      c["max_z"] = 3.0;
      break;
    case Kind::tw_table:
      c["r_min"] = -10.0;
      c["r_max"] = 6.0;
      c["step"] = 0.04;
      break;
    case Kind::crossover_check:
      c["r"] = {-2.0, -1.0, 0.0, 1.0};
      c["beta"] = 1.0;
      c["scaling_pair"] = {{1.0, 1.0}, {2.0, 2.0}};
      c["tolerance"] = 1e-5;
      break;
    case Kind::lpp_limit:
      c["N"] = 8000;
      c["n"] = 6;
      c["alpha"] = 0.2;
      c["betas"] = {1.0, 2.0, 4.0, 8.0};
      c["weights"] = {{"family", "gaussian"}};
      c["count"] = 2000;
      c["ks_tolerance"] = 0.03;
      break;
  }
  return c;
}

namespace detail {

inline void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("config field '" + field + "': " + what);
}

inline double get_real(const json& c, const std::string& f) {
  require(c.contains(f) && c[f].is_number(), f, "expected a number");
  return c[f].get<double>();
}

inline std::uint64_t get_count(const json& c, const std::string& f, std::uint64_t min = 1) {
  require(c.contains(f) && c[f].is_number_integer() && c[f].get<std::int64_t>() >= 0, f,
          "expected a non-negative integer");
  const auto v = c[f].get<std::uint64_t>();
  require(v >= min, f, "must be >= " + std::to_string(min));
  return v;
}

inline std::vector<double> get_reals(const json& c, const std::string& f) {
  require(c.contains(f) && c[f].is_array() && !c[f].empty(), f, "expected a non-empty list");
  std::vector<double> v;
  for (const auto& x : c[f]) {
    require(x.is_number(), f, "list entries must be numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

inline std::vector<std::size_t> get_sizes(const json& c, const std::string& f) {
  require(c.contains(f) && c[f].is_array() && !c[f].empty(), f, "expected a non-empty list");
  std::vector<std::size_t> v;
  for (const auto& x : c[f]) {
    require(x.is_number_integer() && x.get<std::int64_t>() >= 1, f, "entries must be integers >= 1");
    v.push_back(x.get<std::size_t>());
  }
  return v;
}

inline void require_alpha(const json& c) {
  const double a = get_real(c, "alpha");
  require(a > 0.0 && a < 1.0, "alpha", "must lie in (0, 1)");
}

inline void require_positive(const json& c, const std::string& f) {
  require(get_real(c, f) > 0.0, f, "must be > 0");
}

inline WeightSpec get_weights(const json& c) {
  require(c.contains("weights") && c["weights"].is_object(), "weights", "expected an object");
  try {
    return standardize(c["weights"].get<WeightSpec>());
  } catch (const Error& e) {
    throw ConfigError(std::string("config field 'weights': ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field 'weights': ") + e.what());
  }
}

// Stream seed of level `level` of an experiment (splitmix64 of the pair).
inline std::uint64_t level_seed(std::uint64_t seed, std::uint64_t level) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (level + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Checks a resolved config; throws ConfigError naming the bad field.
inline void validate(Kind k, const json& c) {
  using namespace detail;
  require(c.is_object(), "<root>", "config must be a JSON object");
  const json d = defaults(k);
  for (const auto& [key, value] : c.items()) {
    require(d.contains(key), key, "unknown key for experiment " + kind_name(k));
  }
  require(c.value("experiment", std::string()) == kind_name(k), "experiment",
          "must be '" + kind_name(k) + "'");
  require(c["seed"].is_number_unsigned() || (c["seed"].is_number_integer() && c["seed"].get<std::int64_t>() >= 0),
          "seed", "expected a 64-bit unsigned integer");
  get_count(c, "workers", 0);
  require(c["output_dir"].is_string(), "output_dir", "expected a path string");
  switch (k) {
    case Kind::universality_discrete:
      get_sizes(c, "N");
      require_alpha(c);
      require_positive(c, "beta");
      get_weights(c);
      get_count(c, "count", 30);
      get_count(c, "bootstrap", 2);
      break;
    case Kind::universality_oy:
      for (double t : get_reals(c, "t")) require(t > 0.0, "t", "entries must be > 0");
      require_alpha(c);
      require_positive(c, "beta");
      get_count(c, "count", 30);
      get_count(c, "mesh", 0);
      get_count(c, "mesh_pilots", 1);
      get_count(c, "bootstrap", 2);
      break;
    case Kind::coupling_gap:
      get_sizes(c, "N");
      require_alpha(c);
      require_positive(c, "beta");
      get_weights(c);
      get_count(c, "count");
      get_count(c, "steps_per_unit");
      require_positive(c, "horizon_factor");
      break;
    case Kind::lln: {
      get_sizes(c, "N");
      require_alpha(c);
      require_positive(c, "beta");
      get_weights(c);
      get_count(c, "count");
      const auto band = get_reals(c, "band");
      require(band.size() == 2 && band[0] < band[1], "band", "expected [lo, hi] with lo < hi");
      break;
    }
    case Kind::laplace_check:
      get_count(c, "n");
      require_positive(c, "tau");
      for (double u : get_reals(c, "u")) require(u > 0.0, "u", "entries must be > 0");
      get_count(c, "count", 30);
      get_count(c, "base_mesh", 0);
      get_count(c, "levels", 2);
      require(get_real(c, "delta") > 0.0 && get_real(c, "delta") < 1.0, "delta", "must lie in (0, 1)");
      get_count(c, "bootstrap", 2);
      break;
    case Kind::tw_table:
      require(get_real(c, "r_min") < get_real(c, "r_max"), "r_min", "must be below r_max");
      require_positive(c, "step");
      break;
    case Kind::crossover_check: {
      get_reals(c, "r");
      require_positive(c, "beta");
      const auto& p = c["scaling_pair"];
      require(p.is_array() && p.size() == 2 && p[0].size() == 2 && p[1].size() == 2, "scaling_pair",
              "expected [[r1, beta1], [r2, beta2]]");
      break;
    }
    case Kind::lpp_limit:
      get_count(c, "N");
      get_count(c, "n", 0);
      require_alpha(c);
      for (double b : get_reals(c, "betas")) require(b > 0.0, "betas", "entries must be > 0");
      get_weights(c);
      get_count(c, "count", 2);
      break;
  }
}

/// Parses a --set value: JSON if it parses, a plain string otherwise.
inline json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);
  }
}

/// defaults <- file <- overrides ("key=value", dotted keys reach into objects).
inline json resolve(Kind k, const json& file, const std::vector<std::string>& overrides) {
  json c = defaults(k);
  if (!file.is_null()) {
    detail::require(file.is_object(), "<root>", "config file must hold a JSON object");
    if (file.contains("experiment")) {
      detail::require(file["experiment"] == kind_name(k), "experiment",
                      "config is for '" + file["experiment"].dump() + "', not " + kind_name(k));
    }
    for (const auto& [key, value] : file.items()) c[key] = value;
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    detail::require(eq != std::string::npos && eq > 0, o, "override must look like key=value");
    const std::string key = o.substr(0, eq);
    json* target = &c;
    std::size_t start = 0;
    for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
      target = &(*target)[key.substr(start, dot - start)];
    }
    (*target)[key.substr(start)] = parse_override_value(o.substr(eq + 1));
  }
  validate(k, c);
  return c;
}

struct Check {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct Result {
  CsvTable samples;
  CsvTable summary;
  json diagnostics = json::object();
  std::vector<Check> checks;
  std::map<std::string, double> timings;  // seconds per stage

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

using Progress = std::function<void(const std::string&)>;

namespace detail {

class StageTimer {
 public:
  StageTimer(Result& r, std::string name)
      : r_(r), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    r_.timings[name_] +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  Result& r_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline void add_moment_columns(CsvTable::Row& row, const BootstrapMoments& b) {
  row << b.mean.estimate << b.mean.lo << b.mean.hi << b.sd.estimate << b.sd.lo << b.sd.hi;
}

inline const std::vector<std::string> kSummaryStats = {"ks", "mean", "mean_lo", "mean_hi",
                                                       "sd", "sd_lo", "sd_hi"};

inline std::vector<std::string> with_stats(std::vector<std::string> head) {
  head.insert(head.end(), kSummaryStats.begin(), kSummaryStats.end());
  return head;
}

// ---------------------------------------------------------------------------

inline Result run_universality_discrete(const json& c, unsigned workers, const Progress& progress) {
  Result res;
  const auto Ns = get_sizes(c, "N");
  const double alpha = c["alpha"], beta = c["beta"];
  const WeightSpec spec = get_weights(c);
  const auto count = c["count"].get<std::size_t>();
  const auto B = c["bootstrap"].get<std::size_t>();
  const std::uint64_t seed = c["seed"];
  const std::string family(family_name(spec.family));
  const auto& tw = [&]() -> const TracyWidomTable& {
    StageTimer t(res, "tw_table");
    return TracyWidomTable::reference();
  }();

  res.samples = CsvTable({"index", "N", "n", "alpha", "beta", "family", "seed", "log_z", "normalized"});
  res.summary = CsvTable(with_stats({"N", "n", "count"}));
  std::vector<double> ks;
  std::vector<std::pair<double, double>> sds;
  std::size_t sandwich_violations = 0;
  json levels = json::array();
  for (std::size_t level = 0; level < Ns.size(); ++level) {
    const auto p = LatticeParams::from_alpha(Ns[level], alpha, beta);
    const std::uint64_t s = level_seed(seed, level);
    if (progress) progress("N=" + std::to_string(p.N) + " n=" + std::to_string(p.n) + ": " + std::to_string(count) + " samples");
    std::vector<FreeEnergySample> ens;
    {
      StageTimer t(res, "simulate");
      ens = ensemble(p, spec, count, s, workers);
    }
    StageTimer t(res, "statistics");
    std::vector<double> norm, logz;
    const double bound = log_path_count(p.N, p.n) / beta;
    double max_gap = 0.0;
    for (const auto& e : ens) {
      res.samples.add(CsvTable::Row() << std::uint64_t{e.index} << p.N << p.n << alpha << beta << family
                                      << std::uint64_t{s} << e.log_z << *e.normalized);
      norm.push_back(*e.normalized);
      logz.push_back(e.log_z);
      const double gap = e.log_z / beta - e.last_passage;
      max_gap = std::max(max_gap, gap);
      if (!(gap >= 0.0 && gap <= bound)) ++sandwich_violations;
    }
    const EmpiricalDistribution dist(norm);
    const double k = ks_distance(dist, [&](double x) { return tw(x); });
    const auto boot = bootstrap_moments(EmpiricalDistribution(logz), B, level_seed(s, 1000), 0.95, workers);
    CsvTable::Row row;
    row << p.N << p.n << count << k;
    add_moment_columns(row, boot);
    res.summary.add(row);
    ks.push_back(k);
    sds.emplace_back(double(p.N), boot.sd.estimate);
    levels.push_back({{"N", p.N}, {"n", p.n}, {"ks", k}, {"dkw_threshold", dkw_threshold(count)},
                      {"max_sandwich_gap", max_gap}, {"sandwich_bound", bound}});
  }
  res.diagnostics["levels"] = levels;
  const double target = 0.5 - alpha / 6.0;
  res.checks.push_back({"ks_non_increasing", non_increasing(ks), ""});
  res.checks.push_back({"ks_final", ks.back() <= c["ks_max"].get<double>(),
                        "KS " + fmt(ks.back()) + " vs " + fmt(c["ks_max"].get<double>())});
  if (Ns.size() >= 3) {
    const auto fit = exponent_fit(sds);
    res.diagnostics["sd_exponent"] = {{"slope", fit.slope}, {"lo", fit.slope_lo}, {"hi", fit.slope_hi},
                                      {"target", target}, {"residuals", fit.residuals}};
    res.checks.push_back({"sd_exponent", std::abs(fit.slope - target) <= c["slope_tolerance"].get<double>(),
                          "slope " + fmt(fit.slope) + " vs " + fmt(target)});
  }
  res.checks.push_back({"zero_temperature_sandwich", sandwich_violations == 0,
                        std::to_string(sandwich_violations) + " violations"});
  return res;
}

inline Result run_universality_oy(const json& c, unsigned workers, const Progress& progress) {
  Result res;
  const auto ts = get_reals(c, "t");
  const double alpha = c["alpha"], beta = c["beta"];
  const auto count = c["count"].get<std::size_t>();
  const auto B = c["bootstrap"].get<std::size_t>();
  const std::uint64_t seed = c["seed"];
  const auto& tw = TracyWidomTable::reference();
  res.samples = CsvTable({"index", "n", "t", "beta", "alpha", "mesh", "seed", "log_z", "normalized"});
  res.summary = CsvTable(with_stats({"t", "n", "mesh", "count"}));
  json levels = json::array();
  for (std::size_t level = 0; level < ts.size(); ++level) {
    const double t = ts[level];
    OYParams p{rows_for_alpha(t, alpha), t, beta, 1};
    const std::uint64_t s = level_seed(seed, level);
    double mesh_change = 0.0;
    {
      StageTimer timer(res, "mesh_selection");
      if (c["mesh"].get<std::size_t>() > 0) {
        p.mesh = c["mesh"].get<std::size_t>();
      } else {
        p.mesh = default_mesh(p.n, t, beta);
        const auto choice = select_mesh(p, c["mesh_pilots"].get<std::size_t>(),
                                        0.05 * beta * std::pow(t, oy_mu(alpha)), level_seed(s, 7));
        p.mesh = choice.mesh;
        mesh_change = choice.last_change;
      }
    }
    if (progress) progress("t=" + fmt(t) + " n=" + std::to_string(p.n) + " mesh=" + std::to_string(p.mesh));
    std::vector<OYSample> ens;
    {
      StageTimer timer(res, "simulate");
      ens = ensemble_oy(p, alpha, count, s, workers);
    }
    StageTimer timer(res, "statistics");
    std::vector<double> norm, logz;
    for (const auto& e : ens) {
      res.samples.add(CsvTable::Row() << std::uint64_t{e.index} << p.n << t << beta << alpha << p.mesh
                                      << std::uint64_t{s} << e.log_z << *e.normalized);
      norm.push_back(*e.normalized);
      logz.push_back(e.log_z);
    }
    const double k = ks_distance(EmpiricalDistribution(norm), [&](double x) { return tw(x); });
    const auto boot = bootstrap_moments(EmpiricalDistribution(logz), B, level_seed(s, 1000), 0.95, workers);
    CsvTable::Row row;
    row << t << p.n << p.mesh << count << k;
    add_moment_columns(row, boot);
    res.summary.add(row);
    levels.push_back({{"t", t}, {"n", p.n}, {"mesh", p.mesh}, {"mesh_change", mesh_change}, {"ks", k}});
  }
  res.diagnostics["levels"] = levels;
  return res;
}

inline Result run_coupling_gap(const json& c, unsigned workers, const Progress& progress) {
  Result res;
  const auto Ns = get_sizes(c, "N");
  const double alpha = c["alpha"], beta = c["beta"];
  const WeightSpec spec = get_weights(c);
  GapExperimentOptions opt;
  opt.workers = workers;
  opt.embedding.steps_per_unit = c["steps_per_unit"];
  opt.embedding.horizon_factor = c["horizon_factor"];
  if (progress) progress("coupling gaps for " + std::to_string(Ns.size()) + " sizes");
  std::vector<GapRow> table;
  {
    StageTimer t(res, "simulate");
    table = coupling_gap_experiment(spec, alpha, Ns, beta, c["count"].get<std::size_t>(), c["seed"], opt);
  }
  res.samples = CsvTable({"N", "n", "index", "gap1", "gap2"});
  res.summary = CsvTable({"N", "n", "beta", "family", "gap1_median", "gap1_q90", "gap2_median",
                          "gap2_q90", "normalizer"});
  std::vector<double> m1, m2;
  double worst_envelope = 1.0;
  json levels = json::array();
  for (const auto& r : table) {
    for (std::size_t k = 0; k < r.gap1.size(); ++k) {
      res.samples.add(CsvTable::Row() << r.N << r.n << k << r.gap1[k] << r.gap2[k]);
    }
    res.summary.add(CsvTable::Row() << r.N << r.n << r.beta << r.family << r.gap1_median << r.gap1_q90
                                    << r.gap2_median << r.gap2_q90 << r.normalizer);
    m1.push_back(r.gap1_median);
    m2.push_back(r.gap2_median);
    worst_envelope = std::min(worst_envelope, r.envelope_fraction);
    levels.push_back({{"N", r.N}, {"envelope_fraction", r.envelope_fraction}});
  }
  res.diagnostics["levels"] = levels;
  res.diagnostics["steps_per_unit"] = opt.embedding.steps_per_unit;
  res.checks.push_back({"gap1_median_non_increasing", non_increasing(m1), ""});
  res.checks.push_back({"gap2_median_non_increasing", non_increasing(m2), ""});
  res.checks.push_back({"gap2_envelope", worst_envelope >= c["envelope_fraction"].get<double>(),
                        "worst fraction " + fmt(worst_envelope)});
  return res;
}

inline Result run_lln(const json& c, unsigned workers, const Progress& progress) {
  Result res;
  const auto Ns = get_sizes(c, "N");
  const double alpha = c["alpha"], beta = c["beta"];
  const WeightSpec spec = get_weights(c);
  const auto count = c["count"].get<std::size_t>();
  const std::string family(family_name(spec.family));
  res.samples = CsvTable({"index", "N", "n", "beta", "family", "log_z", "ratio"});
  res.summary = CsvTable({"N", "n", "count", "median_ratio", "mean_ratio", "min_ratio", "max_ratio"});
  std::vector<double> medians;
  for (std::size_t level = 0; level < Ns.size(); ++level) {
    const auto p = LatticeParams::from_alpha(Ns[level], alpha, beta);
    if (progress) progress("N=" + std::to_string(p.N) + " n=" + std::to_string(p.n));
    std::vector<FreeEnergySample> ens;
    {
      StageTimer t(res, "simulate");
      ens = ensemble(p, spec, count, level_seed(c["seed"], level), workers);
    }
    std::vector<double> ratios;
    for (const auto& e : ens) {
      const double r = lln_ratio(e.log_z, p);
      ratios.push_back(r);
      res.samples.add(CsvTable::Row() << std::uint64_t{e.index} << p.N << p.n << beta << family << e.log_z << r);
    }
    const EmpiricalDistribution d(ratios);
    const Moments m = sample_moments(ratios);
    res.summary.add(CsvTable::Row() << p.N << p.n << count << d.quantile(0.5) << m.mean << d.min() << d.max());
    medians.push_back(d.quantile(0.5));
  }
  const auto band = get_reals(c, "band");
  const double last = medians.back();
  res.checks.push_back({"ratio_in_band", last >= band[0] && last <= band[1],
                        "median ratio " + fmt(last) + " at N=" + std::to_string(Ns.back())});
  if (medians.size() >= 2) {
    const double prev = medians[medians.size() - 2];
    res.checks.push_back({"ratio_closer_to_one", std::abs(last - 1.0) < std::abs(prev - 1.0),
                          fmt(prev) + " -> " + fmt(last)});
  }
  return res;
}

inline Result run_laplace_check(const json& c, unsigned workers, const Progress& progress) {
  Result res;
  const auto n = c["n"].get<std::size_t>();
  const double tau = c["tau"];
  const auto us = get_reals(c, "u");
  const auto count = c["count"].get<std::size_t>();
  const auto levels = c["levels"].get<std::size_t>();
  const std::uint64_t seed = c["seed"];
  OYParams base{n, tau, 1.0, c["base_mesh"].get<std::size_t>()};
  if (base.mesh == 0) base.mesh = default_mesh(n, tau, 1.0);

  // log Z on refinement-coupled meshes base * 2^l, l < levels.
  if (progress) progress("Monte Carlo: " + std::to_string(count) + " paths, meshes " + std::to_string(base.mesh) +
                         ".." + std::to_string(base.mesh << (levels - 1)));
  std::vector<double> logz(count * levels);
  {
    StageTimer t(res, "simulate");
    parallel_for(count, workers, [&](std::size_t k) {
      BrownianGrid g = sample_brownian_grid(base, seed, k);
      OYParams p = base;
      for (std::size_t l = 0; l < levels; ++l) {
        if (l > 0) {
          g = refine_grid(g, seed, k, static_cast<unsigned>(l));
          p.mesh *= 2;
        }
        logz[k * levels + l] = log_partition_oy(p, g);
      }
    });
  }
  std::vector<std::string> head{"index"};
  for (std::size_t l = 0; l < levels; ++l) head.push_back("log_z_mesh_" + std::to_string(base.mesh << l));
  res.samples = CsvTable(head);
  for (std::size_t k = 0; k < count; ++k) {
    CsvTable::Row row;
    row << k;
    for (std::size_t l = 0; l < levels; ++l) row << logz[k * levels + l];
    res.samples.add(row);
  }
  res.summary = CsvTable({"u", "determinant", "det_nodes", "mesh", "mc_mean", "mc_se", "z_score", "mesh_change"});
  const double max_z = c["max_z"];
  bool all_within = true, all_converged = true;
  json per_u = json::array();
  for (std::size_t i = 0; i < us.size(); ++i) {
    const double u = us[i];
    LaplaceResult det;
    {
      StageTimer t(res, "determinant");
      det = laplace_oy(n, tau, u, c["delta"].get<double>());
    }
    StageTimer t(res, "statistics");
    std::vector<double> mean(levels), se(levels);
    for (std::size_t l = 0; l < levels; ++l) {
      std::vector<double> v(count);
      for (std::size_t k = 0; k < count; ++k) v[k] = std::exp(-u * std::exp(logz[k * levels + l]));
      const Moments m = sample_moments(v);
      mean[l] = m.mean;
      se[l] = m.sd / std::sqrt(double(count));
    }
    // Accept the first mesh whose doubling moved the mean by less than one SE.
    std::size_t accepted = levels - 1;
    bool converged = false;
    for (std::size_t l = 1; l < levels; ++l) {
      if (std::abs(mean[l] - mean[l - 1]) < se[l]) {
        accepted = l;
        converged = true;
        break;
      }
    }
    std::vector<double> v(count);
    for (std::size_t k = 0; k < count; ++k) v[k] = std::exp(-u * std::exp(logz[k * levels + accepted]));
    const auto boot = bootstrap_moments(EmpiricalDistribution(v), c["bootstrap"].get<std::size_t>(),
                                        level_seed(seed, 100 + i), 0.95, workers);
    const double z = std::abs(det.value - mean[accepted]) / boot.mean_se;
    const double change = std::abs(mean[accepted] - mean[accepted - 1]);
    res.summary.add(CsvTable::Row() << u << det.value << det.nodes << (base.mesh << accepted) << mean[accepted]
                                    << boot.mean_se << z << change);
    all_within = all_within && z <= max_z;
    all_converged = all_converged && converged;
    per_u.push_back({{"u", u}, {"det_last_delta", det.last_delta}, {"det_imag", det.imag},
                     {"means", mean}, {"se", se}});
  }
  res.diagnostics["per_u"] = per_u;
  res.checks.push_back({"mesh_converged", all_converged, ""});
  res.checks.push_back({"within_bootstrap_se", all_within, "max z " + fmt(max_z)});
  return res;
}

inline Result run_tw_table(const json& c, unsigned, const Progress& progress) {
  Result res;
  const double lo = c["r_min"], hi = c["r_max"], step = c["step"];
  const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step));
  if (progress) progress(std::to_string(count + 1) + " points");
  res.samples = CsvTable({"r", "F2(r)"});
  bool monotone = true;
  double prev = -1.0, worst_delta = 0.0;
  {
    StageTimer t(res, "determinants");
    for (std::size_t k = 0; k <= count; ++k) {
      const double r = lo + step * double(k);
      const auto v = tracy_widom_gue_detail(r);
      res.samples.add(CsvTable::Row() << r << v.value);
      monotone = monotone && v.value >= prev - 1e-14;  // absolute rounding of the determinant
      prev = v.value;
      worst_delta = std::max(worst_delta, v.last_delta);
    }
  }
  double mean_coarse = 0.0, mean_fine = 0.0;
  {
    StageTimer t(res, "mean");
    mean_coarse = tracy_widom_mean(16);
    mean_fine = tracy_widom_mean(32);
  }
  res.summary = CsvTable({"points", "r_min", "r_max", "monotone", "max_last_delta", "mean", "mean_coarse"});
  res.summary.add(CsvTable::Row() << (count + 1) << lo << hi << monotone << worst_delta << mean_fine << mean_coarse);
  res.checks.push_back({"monotone", monotone, ""});
  res.checks.push_back({"node_doubling", worst_delta <= kDetTol, "max change " + fmt(worst_delta)});
  return res;
}

inline Result run_crossover_check(const json& c, unsigned workers, const Progress& progress) {
  Result res;
  const auto rs = get_reals(c, "r");
  const double beta = c["beta"], tol = c["tolerance"];
  if (progress) progress(std::to_string(rs.size()) + " points");
  res.samples = CsvTable({"r", "beta", "crossover", "airy", "abs_diff"});
  std::vector<double> cross(rs.size()), airy(rs.size());
  {
    StageTimer t(res, "determinants");
    parallel_for(rs.size(), workers, [&](std::size_t i) {
      cross[i] = f_gue_via_crossover(rs[i], beta);
      airy[i] = tracy_widom_gue(rs[i] / beta);
    });
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double d = std::abs(cross[i] - airy[i]);
    worst = std::max(worst, d);
    res.samples.add(CsvTable::Row() << rs[i] << beta << cross[i] << airy[i] << d);
  }
  const auto& pair = c["scaling_pair"];
  const double a = f_gue_via_crossover(pair[0][0].get<double>(), pair[0][1].get<double>());
  const double b = f_gue_via_crossover(pair[1][0].get<double>(), pair[1][1].get<double>());
  res.summary = CsvTable({"max_abs_diff", "pair_first", "pair_second", "pair_diff"});
  res.summary.add(CsvTable::Row() << worst << a << b << std::abs(a - b));
  res.checks.push_back({"routes_agree", worst <= tol, "max diff " + fmt(worst)});
  res.checks.push_back({"beta_scaling", std::abs(a - b) <= tol, "diff " + fmt(std::abs(a - b))});
  return res;
}

inline Result run_lpp_limit(const json& c, unsigned workers, const Progress& progress) {
  Result res;
  const auto N = c["N"].get<std::size_t>();
  const double alpha = c["alpha"];
  std::size_t n = c["n"].get<std::size_t>();
  if (n == 0) n = rows_for_alpha(double(N), alpha);
  const auto betas = get_reals(c, "betas");
  const WeightSpec spec = get_weights(c);
  const auto count = c["count"].get<std::size_t>();
  const auto& tw = TracyWidomTable::reference();
  res.samples = CsvTable({"beta", "index", "log_z", "last_passage", "gap", "bound"});
  res.summary = CsvTable({"beta", "max_gap", "bound", "ks_polymer", "ks_lpp"});
  std::vector<double> max_gaps, ks_poly;
  double ks_l = 0.0;
  bool bound_ok = true;
  for (const double beta : betas) {
    const LatticeParams p{N, n, beta, alpha};
    if (progress) progress("beta=" + fmt(beta));
    std::vector<FreeEnergySample> ens;
    {
      // Same seed for every beta: the disorder is shared across temperatures.
      StageTimer t(res, "simulate");
      ens = ensemble(p, spec, count, c["seed"], workers);
    }
    const double bound = log_path_count(N, n) / beta;
    double max_gap = 0.0;
    std::vector<double> pn, ln;
    for (const auto& e : ens) {
      const double gap = e.log_z / beta - e.last_passage;
      bound_ok = bound_ok && gap >= 0.0 && gap <= bound;
      max_gap = std::max(max_gap, gap);
      pn.push_back(normalize_free_energy(e.log_z, p));
      ln.push_back(normalize_last_passage(e.last_passage, N, n));
      res.samples.add(CsvTable::Row() << beta << std::uint64_t{e.index} << e.log_z << e.last_passage << gap << bound);
    }
    const double kp = ks_distance(EmpiricalDistribution(pn), [&](double x) { return tw(x); });
    ks_l = ks_distance(EmpiricalDistribution(ln), [&](double x) { return tw(x); });
    res.summary.add(CsvTable::Row() << beta << max_gap << bound << kp << ks_l);
    max_gaps.push_back(max_gap);
    ks_poly.push_back(kp);
  }
  bool halves = true;
  for (std::size_t i = 1; i < betas.size(); ++i) {
    if (betas[i] == 2.0 * betas[i - 1]) halves = halves && max_gaps[i] <= 0.5 * max_gaps[i - 1] * (1.0 + 1e-12);
  }
  res.checks.push_back({"sandwich_bound", bound_ok, ""});
  res.checks.push_back({"gap_halves", halves, ""});
  res.checks.push_back({"lpp_vs_polymer_ks", std::abs(ks_l - ks_poly.back()) <= c["ks_tolerance"].get<double>(),
                        "KS(L) " + fmt(ks_l) + " vs KS(polymer, beta=" + fmt(betas.back()) + ") " + fmt(ks_poly.back())});
  return res;
}

}  // namespace detail

/// Runs a resolved config.  `workers` = 0 uses every hardware thread.
inline Result run(Kind k, const json& cfg, unsigned workers, const Progress& progress = {}) {
  validate(k, cfg);
  switch (k) {
    case Kind::universality_discrete: return detail::run_universality_discrete(cfg, workers, progress);
    case Kind::universality_oy: return detail::run_universality_oy(cfg, workers, progress);
    case Kind::coupling_gap: return detail::run_coupling_gap(cfg, workers, progress);
    case Kind::lln: return detail::run_lln(cfg, workers, progress);
    case Kind::laplace_check: return detail::run_laplace_check(cfg, workers, progress);
    case Kind::tw_table: return detail::run_tw_table(cfg, workers, progress);
    case Kind::crossover_check: return detail::run_crossover_check(cfg, workers, progress);
    case Kind::lpp_limit: return detail::run_lpp_limit(cfg, workers, progress);
  }
  throw ConfigError("unknown experiment");
}

inline std::filesystem::path run_directory(const json& cfg) {
  return std::filesystem::path(cfg["output_dir"].get<std::string>()) / cfg["experiment"].get<std::string>() /
         config_hash(cfg);
}

/// Writes samples.csv and summary.csv, then meta.json (last, so a
/// directory with meta.json is complete).
inline std::filesystem::path write_run(const json& cfg, const Result& r, double wall_seconds) {
  const auto dir = run_directory(cfg);
  const std::string samples = r.samples.str();
  const std::string summary = r.summary.str();
  atomic_write(dir / "samples.csv", samples);
  atomic_write(dir / "summary.csv", summary);
  json meta;
  meta["experiment"] = cfg["experiment"];
  meta["config_hash"] = config_hash(cfg);
  meta["config"] = cfg;
  meta["code_version"] = kCodeVersion;
  meta["files"] = {{"samples.csv", hex64(fnv1a64(samples))}, {"summary.csv", hex64(fnv1a64(summary))}};
  meta["diagnostics"] = r.diagnostics;
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  meta["checks"] = checks;
  meta["wall_seconds"] = wall_seconds;
  meta["stage_seconds"] = r.timings;
  atomic_write(dir / "meta.json", meta.dump(2) + "\n");
  return dir;
}

struct VerifyReport {
  std::vector<std::string> checked;
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

/// Re-checks config hashes and file digests of one run directory, or of
/// every run directory below `root`.
inline VerifyReport verify(const std::filesystem::path& root) {
  VerifyReport rep;
  std::vector<std::filesystem::path> dirs;
  if (std::filesystem::exists(root / "meta.json")) {
    dirs.push_back(root);
  } else if (std::filesystem::is_directory(root)) {
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
      if (e.is_regular_file() && e.path().filename() == "meta.json") dirs.push_back(e.path().parent_path());
    }
    std::sort(dirs.begin(), dirs.end());
  }
  if (dirs.empty()) rep.problems.push_back(root.string() + ": no meta.json found");
  for (const auto& d : dirs) {
    rep.checked.push_back(d.string());
    json meta;
    try {
      meta = json::parse(read_file(d / "meta.json"));
    } catch (const std::exception& e) {
      rep.problems.push_back(d.string() + ": unreadable meta.json (" + e.what() + ")");
      continue;
    }
    const std::string hash = config_hash(meta.at("config"));
    if (hash != meta.value("config_hash", std::string())) {
      rep.problems.push_back(d.string() + ": config hash mismatch");
    }
    if (hash != d.filename().string()) rep.problems.push_back(d.string() + ": directory name is not the config hash");
    for (const auto& [file, digest] : meta.at("files").items()) {
      try {
        if (hex64(fnv1a64(read_file(d / file))) != digest.get<std::string>()) {
          rep.problems.push_back((d / file).string() + ": digest mismatch");
        }
      } catch (const Error&) {
        rep.problems.push_back((d / file).string() + ": missing");
      }
    }
  }
  return rep;
}

}  // namespace kpz::experiments
