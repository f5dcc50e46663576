#pragma once

// Skorohod coupling of random walks with Brownian motion.
//
// For a mean-zero law mu, draw a barrier pair (u, v), u < 0 < v, with
// density proportional to (v - u) mu(du) mu(dv) (an atom of mu at 0 gives
// the pair (0, 0) with probability mu({0})) and stop the Brownian motion
// when it leaves [S + u, S + v].  The stopped values form a walk with
// step law mu and E[tau] = Var(mu) = 1.
//
// Brownian paths live on a uniform grid of step 1/K.  A barrier exit is
// detected either at a grid point outside the window or, between two
// inside points, with the Brownian-bridge crossing probability
// exp(-2 d_0 d_1 / h).  The walk value is the barrier itself, so walk
// increments follow mu exactly; the Brownian value at the recorded stop
// differs from it by the O(sqrt(h)) overshoot.  Each window is measured
// against the actual path, so these errors do not accumulate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "kpzlab/errors.hpp"
#include "kpzlab/lattice.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/path_sum.hpp"
#include "kpzlab/rng.hpp"
#include "kpzlab/semidiscrete.hpp"
#include "kpzlab/weights.hpp"

namespace kpz {

struct EmbeddingPair {
  double u = 0.0;  // <= 0
  double v = 0.0;  // >= 0
};

/// Exact sampler of barrier pairs for a standardized weight law.
class PairSampler {
 public:
  explicit PairSampler(const WeightSpec& spec) : spec_(spec) {
    if (!is_standardized(spec_, 1e-9)) {
      throw DomainError("Skorohod embedding needs a standardized (mean 0, variance 1) law");
    }
    if (spec_.family == Family::finite_discrete) build_discrete();
  }

  EmbeddingPair operator()(Stream& s) const {
    switch (spec_.family) {
      case Family::rademacher: return {-1.0, 1.0};
      case Family::gaussian: {
        // Half-normal and Rayleigh (size-biased half-normal) parts.
        if (s.uniform() < 0.5) return {-std::abs(s.normal()), std::sqrt(2.0 * s.exponential())};
        return {-std::sqrt(2.0 * s.exponential()), std::abs(s.normal())};
      }
      case Family::uniform: {
        const double a = std::sqrt(3.0);
        if (s.uniform() < 0.5) return {-a * s.uniform(), a * std::sqrt(s.uniform_open())};
        return {-a * std::sqrt(s.uniform_open()), a * s.uniform()};
      }
      case Family::shifted_exponential: return exponential_pair(s);
      case Family::finite_discrete: {
        const double x = s.uniform();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                              pairs_.size() - 1);
        return pairs_[k];
      }
    }
    return {-1.0, 1.0};
  }

  /// Probability mass dropped by support truncation; the samplers here are
  /// exact, so this is always 0.
  double truncation_mass() const { return 0.0; }
  const WeightSpec& spec() const { return spec_; }

 private:
  // Standardized law is E - 1 with E ~ Exp(1).
  static EmbeddingPair exponential_pair(Stream& s) {
    const double p_negative = 1.0 - std::exp(-1.0);
    if (s.uniform() < p_negative) {
      // u from the negative part, v size-biased positive, Gamma(2, 1).
      return {-1.0 + conditional_negative_offset(s), s.exponential() + s.exponential()};
    }
    // u size-biased negative, density y e^y on (0, 1); v from the positive part.
    return {-size_biased_negative(s), s.exponential()};
  }

  // Negative part conditioned: X = E - 1 with E < 1, returns E.
  static double conditional_negative_offset(Stream& s) {
    return -std::log1p(-s.uniform() * (1.0 - std::exp(-1.0)));
  }

  // Inverts F(y) = (y - 1) e^y + 1 on [0, 1].
  static double size_biased_negative(Stream& s) {
    const double target = s.uniform();
    double lo = 0.0, hi = 1.0, y = 0.5;
    for (int it = 0; it < 100; ++it) {
      const double f = (y - 1.0) * std::exp(y) + 1.0 - target;
      if (f > 0) hi = y; else lo = y;
      const double df = y * std::exp(y);
      double next = df > 0 ? y - f / df : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - y) < 1e-15) return next;
      y = next;
    }
    return y;
  }

  void build_discrete() {
    std::vector<Atom> neg, pos;
    double zero = 0.0;
    for (const Atom& a : spec_.atoms) {
      const double x = (a.value - spec_.location) / spec_.scale;
      if (a.prob <= 0.0) continue;
      if (std::abs(x) < 1e-14) zero += a.prob;
      else (x < 0 ? neg : pos).push_back({x, a.prob});
    }
    std::vector<double> weights;
    for (const Atom& a : neg) {
      for (const Atom& b : pos) {
        pairs_.push_back({a.value, b.value});
        weights.push_back((b.value - a.value) * a.prob * b.prob);
      }
    }
    const double mass = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (zero > 0.0) {
      pairs_.push_back({0.0, 0.0});
      weights.push_back(zero * (mass > 0 ? mass / (1.0 - zero) : 1.0));
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double c = 0.0;
    for (double w : weights) cumulative_.push_back(c += w / total);
    cumulative_.back() = 1.0;
  }

  WeightSpec spec_;
  std::vector<EmbeddingPair> pairs_;
  std::vector<double> cumulative_;
};

inline EmbeddingPair skorohod_pair(const WeightSpec& spec, Stream& stream) {
  return PairSampler(spec)(stream);
}

/// n paths sampled at k/N, k = 0..N (values at the rescaled grid of [0,1]).
class PathFamily {
 public:
  PathFamily() = default;
  PathFamily(std::size_t rows, std::size_t N) : rows_(rows), N_(N), values_(rows * (N + 1), 0.0) {}

  double& at(std::size_t j, std::size_t k) { return values_[j * (N_ + 1) + k]; }
  double at(std::size_t j, std::size_t k) const { return values_[j * (N_ + 1) + k]; }
  std::span<const double> row(std::size_t j) const { return {values_.data() + j * (N_ + 1), N_ + 1}; }
  std::span<double> row(std::size_t j) { return {values_.data() + j * (N_ + 1), N_ + 1}; }

  std::size_t rows() const { return rows_; }
  std::size_t N() const { return N_; }

 private:
  std::size_t rows_ = 0;
  std::size_t N_ = 0;
  std::vector<double> values_;
};

/// Embedded walks and the Brownian paths they were read from.
struct CoupledPaths {
  std::size_t N = 0;
  std::size_t steps_per_unit = 0;  // K, grid step h_B = 1/K
  std::vector<std::vector<double>> brownian;            // B^j(m / K), m = 0..
  std::vector<std::vector<double>> embedded_walk;       // S^j(k), k = 0..N
  std::vector<std::vector<std::size_t>> stopping_indices;  // grid index of tau_1 + ... + tau_k

  std::size_t rows() const { return brownian.size(); }
  double h() const { return 1.0 / static_cast<double>(steps_per_unit); }

  /// S-bar_N at k/N: piecewise-linear interpolation nodes are the walk.
  PathFamily rescaled_walk() const {
    PathFamily f(rows(), N);
    for (std::size_t j = 0; j < rows(); ++j) {
      std::copy(embedded_walk[j].begin(), embedded_walk[j].end(), f.row(j).begin());
    }
    return f;
  }

  /// B-bar_N(k/N) = B(k).
  PathFamily rescaled_brownian() const {
    PathFamily f(rows(), N);
    for (std::size_t j = 0; j < rows(); ++j) {
      for (std::size_t k = 0; k <= N; ++k) f.at(j, k) = brownian[j][k * steps_per_unit];
    }
    return f;
  }

  /// Increments of the Brownian paths on [0, N] at the simulation grid.
  BrownianGrid brownian_grid() const {
    const std::size_t M = N * steps_per_unit;
    BrownianGrid g(rows(), M, h());
    for (std::size_t j = 0; j < rows(); ++j) {
      for (std::size_t m = 0; m < M; ++m) g.at(j, m) = brownian[j][m + 1] - brownian[j][m];
    }
    return g;
  }
};

struct EmbeddingOptions {
  std::size_t steps_per_unit = 1000;  // h_B = 1e-3
  double horizon_factor = 2.0;        // grid covers horizon_factor * N + 64 time units
};

namespace detail {

struct RowEmbedding {
  std::vector<double> path;
  std::vector<double> walk;
  std::vector<std::size_t> stops;
};

inline RowEmbedding embed_row(const PairSampler& pairs, std::size_t N, std::size_t row,
                              std::uint64_t seed, std::uint64_t index,
                              const EmbeddingOptions& opt) {
  const std::size_t K = opt.steps_per_unit;
  const double h = 1.0 / static_cast<double>(K);
  const double sd = std::sqrt(h);
  const std::size_t M = N * K;
  const auto max_steps = static_cast<std::size_t>(
      std::ceil((opt.horizon_factor * static_cast<double>(N) + 64.0) * static_cast<double>(K)));

  Stream brownian(seed, index, channel::row(channel::kBrownian, row));
  Stream pair_stream(seed, index, channel::row(channel::kPairs, row));
  Stream bridge(seed, index, channel::row(channel::kBridge, row));

  RowEmbedding out;
  out.path.reserve(M + M / 8 + 2);
  out.walk.reserve(N + 1);
  out.stops.reserve(N);
  out.path.push_back(0.0);
  out.walk.push_back(0.0);

  double center = 0.0;
  double lower = 0.0, upper = 0.0;
  double x = 0.0;
  std::size_t m = 0;

  // Opens windows at the current grid point until one contains x.
  auto open_window = [&] {
    while (out.walk.size() <= N) {
      const EmbeddingPair p = pairs(pair_stream);
      lower = center + p.u;
      upper = center + p.v;
      if (x > lower && x < upper) return;
      center = x >= upper ? upper : lower;
      out.walk.push_back(center);
      out.stops.push_back(m);
    }
  };
  open_window();

  while (out.walk.size() <= N || m < M) {
    if (m >= max_steps) {
      throw GridExhaustedError("embedding: grid of " + std::to_string(max_steps) +
                               " steps exhausted after " + std::to_string(out.walk.size() - 1) +
                               " of " + std::to_string(N) + " stops (row " + std::to_string(row) +
                               ", sample " + std::to_string(index) + ")");
    }
    const double next = x + sd * brownian.normal();
    ++m;
    out.path.push_back(next);
    if (out.walk.size() <= N) {
      int side = 0;  // +1 upper exit, -1 lower exit
      if (next >= upper) {
        side = 1;
      } else if (next <= lower) {
        side = -1;
      } else {
        const double du = (upper - x) * (upper - next);
        const double dl = (x - lower) * (next - lower);
        const double pu = du < 20.0 * h ? std::exp(-2.0 * du / h) : 0.0;
        const double pl = dl < 20.0 * h ? std::exp(-2.0 * dl / h) : 0.0;
        if (pu + pl > 0.0) {
          const double w = bridge.uniform();
          if (w < pu) side = 1;
          else if (w < pu + pl) side = -1;
        }
      }
      x = next;
      if (side != 0) {
        center = side > 0 ? upper : lower;
        out.walk.push_back(center);
        out.stops.push_back(m);
        open_window();
      }
    } else {
      x = next;
    }
  }
  return out;
}

}  // namespace detail

/// Coupled walks for `rows` independent rows; row j uses streams
/// (seed, index, (purpose, j)).
inline CoupledPaths embed_walks(const WeightSpec& spec, std::size_t N, std::size_t rows,
                                std::uint64_t seed, std::uint64_t index,
                                const EmbeddingOptions& opt = {}) {
  if (N < 1 || rows < 1) throw DomainError("embed_walks needs N >= 1 and rows >= 1");
  if (opt.steps_per_unit < 1) throw DomainError("steps_per_unit must be >= 1");
  const PairSampler pairs(spec);
  CoupledPaths c;
  c.N = N;
  c.steps_per_unit = opt.steps_per_unit;
  for (std::size_t j = 0; j < rows; ++j) {
    auto r = detail::embed_row(pairs, N, j, seed, index, opt);
    c.brownian.push_back(std::move(r.path));
    c.embedded_walk.push_back(std::move(r.walk));
    c.stopping_indices.push_back(std::move(r.stops));
  }
  return c;
}

/// log of sum over grid sequences 1/N = t_0 <= t_1 <= ... <= t_n = 1 of
/// exp(beta sum_j (f^j(t_j) - f^j(t_{j-1} - 1/N))).  Row j collects the
/// increments f^j(i/N) - f^j((i-1)/N) for i from N t_{j-1} to N t_j, so
/// this is the lattice free energy of those increments.
inline double functional_F_N(const PathFamily& f, double beta) {
  if (f.N() < 1 || f.rows() < 1) throw DomainError("functional_F_N: empty path family");
  Staircase<LogSumExp> dp(f.rows());
  std::vector<double> col(f.rows());
  for (std::size_t i = 1; i <= f.N(); ++i) {
    for (std::size_t j = 0; j < f.rows(); ++j) col[j] = beta * (f.at(j, i) - f.at(j, i - 1));
    dp.push_cells(col);
  }
  return dp.value();
}

/// d(f, g) = sum_j sup_k |f^j - g^j| on the shared grid.
inline double path_metric(const PathFamily& f, const PathFamily& g) {
  if (f.rows() != g.rows() || f.N() != g.N()) throw DomainError("path_metric: grid mismatch");
  double d = 0.0;
  for (std::size_t j = 0; j < f.rows(); ++j) {
    double sup = 0.0;
    for (std::size_t k = 0; k <= f.N(); ++k) sup = std::max(sup, std::abs(f.at(j, k) - g.at(j, k)));
    d += sup;
  }
  return d;
}

struct LipschitzCheck {
  double lhs = 0.0;  // |F_N(f) - F_N(g)|
  double rhs = 0.0;  // 2 beta d(f, g)
  bool ok = true;
};

inline LipschitzCheck lipschitz_check(const PathFamily& f, const PathFamily& g, double beta) {
  LipschitzCheck c;
  c.lhs = std::abs(functional_F_N(f, beta) - functional_F_N(g, beta));
  c.rhs = 2.0 * beta * path_metric(f, g);
  c.ok = c.lhs <= c.rhs + 1e-9;
  return c;
}

struct CouplingGaps {
  double walk_vs_brownian = 0.0;  // |F_N(S-bar) - F_N(B-bar)|
  double brownian_vs_oy = 0.0;    // |F_N(B-bar) - log Z^OY_{n,N}(beta)|
  double f_walk = 0.0;
  double f_brownian = 0.0;
  double log_z_oy = 0.0;
};

inline CouplingGaps coupling_gaps(const CoupledPaths& c, double beta) {
  CouplingGaps g;
  g.f_walk = functional_F_N(c.rescaled_walk(), beta);
  g.f_brownian = functional_F_N(c.rescaled_brownian(), beta);
  const OYParams oy{c.rows(), static_cast<double>(c.N), beta, c.N * c.steps_per_unit};
  g.log_z_oy = log_partition_oy(oy, c.brownian_grid());
  g.walk_vs_brownian = std::abs(g.f_walk - g.f_brownian);
  g.brownian_vs_oy = std::abs(g.f_brownian - g.log_z_oy);
  return g;
}

/// 2 beta n u + log(n!): bound on |F_N(B-bar) - log Z^OY| outside the
/// event that some row oscillates by more than u over a unit interval.
inline double oy_gap_envelope(std::size_t n, double beta, double u) {
  const double nd = static_cast<double>(n);
  return 2.0 * beta * nd * u + std::lgamma(nd + 1.0);
}

struct GapRow {
  std::size_t N = 0;
  std::size_t n = 0;
  double beta = 0.0;
  std::string family;
  double gap1_median = 0.0;  // normalised by N^{1/2 - alpha/6}
  double gap1_q90 = 0.0;
  double gap2_median = 0.0;
  double gap2_q90 = 0.0;
  double normalizer = 0.0;
  double envelope_fraction = 0.0;  // share of samples with gap2 <= envelope
  std::vector<double> gap1;        // normalised samples
  std::vector<double> gap2;
};

struct GapExperimentOptions {
  EmbeddingOptions embedding;
  unsigned workers = 1;
};

inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline std::vector<GapRow> coupling_gap_experiment(const WeightSpec& spec, double alpha,
                                                   std::span<const std::size_t> Ns, double beta,
                                                   std::size_t count, std::uint64_t seed,
                                                   const GapExperimentOptions& opt = {}) {
  if (count < 1) throw DomainError("coupling_gap_experiment needs count >= 1");
  std::vector<GapRow> table;
  for (std::size_t level = 0; level < Ns.size(); ++level) {
    const std::size_t N = Ns[level];
    const std::size_t n = rows_for_alpha(static_cast<double>(N), alpha);
    GapRow row;
    row.N = N;
    row.n = n;
    row.beta = beta;
    row.family = std::string(family_name(spec.family));
    row.normalizer = std::pow(static_cast<double>(N), 0.5 - alpha / 6.0);
    std::vector<double> g1(count), g2(count), raw2(count);
    parallel_for(count, opt.workers, [&](std::size_t k) {
      const std::uint64_t index = (std::uint64_t{level} << 32) | k;
      const auto paths = embed_walks(spec, N, n, seed, index, opt.embedding);
      const auto gaps = coupling_gaps(paths, beta);
      g1[k] = gaps.walk_vs_brownian / row.normalizer;
      g2[k] = gaps.brownian_vs_oy / row.normalizer;
      raw2[k] = gaps.brownian_vs_oy;
    });
    const double envelope = oy_gap_envelope(n, beta, 3.0 * std::sqrt(std::log(double(n) * double(N))));
    row.envelope_fraction =
        double(std::count_if(raw2.begin(), raw2.end(), [&](double g) { return g <= envelope; })) /
        double(count);
    row.gap1 = g1;
    row.gap2 = g2;
    std::sort(g1.begin(), g1.end());
    std::sort(g2.begin(), g2.end());
    row.gap1_median = quantile_sorted(g1, 0.5);
    row.gap1_q90 = quantile_sorted(g1, 0.9);
    row.gap2_median = quantile_sorted(g2, 0.5);
    row.gap2_q90 = quantile_sorted(g2, 0.9);
    table.push_back(std::move(row));
  }
  return table;
}

struct ModulusEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
};

/// Largest oscillation max - min of `path` over windows of `width` steps.
inline double max_window_oscillation(std::span<const double> path, std::size_t width) {
  std::deque<std::size_t> hi, lo;
  double best = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    while (!hi.empty() && path[hi.back()] <= path[i]) hi.pop_back();
    while (!lo.empty() && path[lo.back()] >= path[i]) lo.pop_back();
    hi.push_back(i);
    lo.push_back(i);
    while (hi.front() + width < i) hi.pop_front();
    while (lo.front() + width < i) lo.pop_front();
    best = std::max(best, path[hi.front()] - path[lo.front()]);
  }
  return best;
}

/// Monte Carlo estimate of P(sup_{|t-s| <= r} |B(s) - B(t)| > x) for
/// s, t in [0, t_max], on a grid of `steps` points per unit time.
inline ModulusEstimate modulus_check(double t_max, double r, double x, std::size_t count,
                                     std::uint64_t seed, std::size_t steps = 1024) {
  if (!(r > 0.0 && r < t_max) || !(x > 0.0)) throw DomainError("modulus_check: need 0 < r < t_max, x > 0");
  const auto total = static_cast<std::size_t>(std::llround(t_max * double(steps)));
  const auto width = static_cast<std::size_t>(std::floor(r * double(steps)));
  const double sd = std::sqrt(1.0 / double(steps));
  std::vector<double> path(total + 1);
  std::size_t hits = 0;
  for (std::size_t c = 0; c < count; ++c) {
    Stream s(seed, c, channel::kMisc);
    path[0] = 0.0;
    for (std::size_t m = 1; m <= total; ++m) path[m] = path[m - 1] + sd * s.normal();
    if (max_window_oscillation(path, width) > x) ++hits;
  }
  ModulusEstimate e;
  e.count = count;
  e.probability = double(hits) / double(count);
  e.standard_error = std::sqrt(e.probability * (1.0 - e.probability) / double(count));
  return e;
}

/// (K1 / r) exp(-K2 x^2 / r).
inline double levy_envelope(double r, double x, double k1, double k2) {
  return k1 / r * std::exp(-k2 * x * x / r);
}

struct ModulusPoint {
  double r = 0.0;
  double x = 0.0;
  double probability = 0.0;
};

/// Smallest K1 for which the envelope with the given K2 covers every point.
inline double fit_levy_k1(std::span<const ModulusPoint> points, double k2) {
  double k1 = 0.0;
  for (const auto& p : points) k1 = std::max(k1, p.probability * p.r * std::exp(k2 * p.x * p.x / p.r));
  return k1;
}

}  // namespace kpz
