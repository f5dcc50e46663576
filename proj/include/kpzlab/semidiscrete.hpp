#pragma once

// Semi-discrete (O'Connell-Yor) polymer by mesh discretisation.
//
// n independent Brownian motions are sampled on the uniform grid
// k h, k = 0..M, h = t / M.  The simplex integral over jump times
// 0 < t_1 < ... < t_{n-1} < t is replaced by the left-endpoint Riemann
// sum over nondecreasing grid indices 0 = k_0 <= k_1 <= ... <= k_n = M,
//
//   Z ~ h^{n-1} sum exp(beta sum_j (B^j(k_j h) - B^j(k_{j-1} h))),
//
// evaluated with the shared staircase kernel in row-step mode.  The
// volume factor (n-1) log h is added after the kernel.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kpzlab/errors.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/path_sum.hpp"
#include "kpzlab/rng.hpp"

namespace kpz {

struct OYParams {
  std::size_t n = 1;
  double t = 1.0;
  double beta = 1.0;
  std::size_t mesh = 1;  // M

  double h() const { return t / static_cast<double>(mesh); }

  void validate() const {
    if (n < 1) throw DomainError("semi-discrete polymer needs n >= 1");
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be finite and > 0");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and > 0");
    if (mesh < n) throw DomainError("mesh must be >= n");
  }
};

/// Brownian increments: at(j, k) = B^j((k+1) h) - B^j(k h), k = 0..M-1.
class BrownianGrid {
 public:
  BrownianGrid() = default;
  BrownianGrid(std::size_t rows, std::size_t steps, double h)
      : rows_(rows), steps_(steps), h_(h), inc_(rows * steps, 0.0) {}

  double& at(std::size_t j, std::size_t k) { return inc_[j * steps_ + k]; }
  double at(std::size_t j, std::size_t k) const { return inc_[j * steps_ + k]; }
  std::span<const double> row(std::size_t j) const { return {inc_.data() + j * steps_, steps_}; }
  std::span<double> row(std::size_t j) { return {inc_.data() + j * steps_, steps_}; }

  std::size_t rows() const { return rows_; }
  std::size_t steps() const { return steps_; }
  double h() const { return h_; }
  std::span<const double> data() const { return inc_; }

 private:
  std::size_t rows_ = 0;
  std::size_t steps_ = 0;
  double h_ = 1.0;
  std::vector<double> inc_;
};

/// Row j uses stream (seed, index, (kBrownian, j)).
inline BrownianGrid sample_brownian_grid(const OYParams& p, std::uint64_t seed,
                                         std::uint64_t index) {
  p.validate();
  BrownianGrid g(p.n, p.mesh, p.h());
  const double sd = std::sqrt(p.h());
  for (std::size_t j = 0; j < p.n; ++j) {
    Stream s(seed, index, channel::row(channel::kBrownian, j));
    for (double& x : g.row(j)) x = sd * s.normal();
  }
  return g;
}

/// Splits every step in two by sampling the Brownian-bridge midpoint, so
/// the refined grid describes the same path at twice the resolution.
inline BrownianGrid refine_grid(const BrownianGrid& g, std::uint64_t seed, std::uint64_t index,
                                unsigned level) {
  BrownianGrid fine(g.rows(), 2 * g.steps(), 0.5 * g.h());
  const double sd = 0.5 * std::sqrt(g.h());
  for (std::size_t j = 0; j < g.rows(); ++j) {
    Stream s(seed, index, channel::row(64 + level, j));
    for (std::size_t k = 0; k < g.steps(); ++k) {
      const double d = g.at(j, k);
      const double first = 0.5 * d + sd * s.normal();
      fine.at(j, 2 * k) = first;
      fine.at(j, 2 * k + 1) = d - first;
    }
  }
  return fine;
}

namespace detail {

// Staircase value over the (M+1) x n grid of B-values, without the
// volume factor.
inline double oy_path_sum(std::size_t rows, std::size_t steps, double beta,
                          const BrownianGrid& g) {
  Staircase<LogSumExp> dp(rows);
  std::vector<double> col(rows, 0.0);
  dp.push_steps(col);
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t j = 0; j < rows; ++j) col[j] = beta * g.at(j, k);
    dp.push_steps(col);
  }
  return dp.value();
}

}  // namespace detail

/// log of the Riemann approximation of Z^n_t(beta).
inline double log_partition_oy(const OYParams& p, const BrownianGrid& g) {
  p.validate();
  if (g.rows() != p.n || g.steps() != p.mesh) {
    throw DomainError("Brownian grid shape does not match (n, mesh)");
  }
  const double volume = static_cast<double>(p.n - 1) * std::log(p.h());
  return volume + detail::oy_path_sum(p.n, p.mesh, p.beta, g);
}

/// Grid for (n, beta^2 t, beta = 1) coupled to `g` by Brownian scaling:
/// every increment is multiplied by beta.  On coupled grids
///   log Z(n, beta^2 t, 1) - log Z(n, t, beta) = 2 (n - 1) log beta.
inline BrownianGrid brownian_scaling_transport(const BrownianGrid& g, double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be > 0");
  BrownianGrid out(g.rows(), g.steps(), beta * beta * g.h());
  for (std::size_t j = 0; j < g.rows(); ++j) {
    auto src = g.row(j);
    auto dst = out.row(j);
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = beta * src[k];
  }
  return out;
}

inline OYParams brownian_scaling_params(const OYParams& p) {
  return {p.n, p.beta * p.beta * p.t, 1.0, p.mesh};
}

inline double oy_kappa(double alpha) { return 0.5 * (1.0 - alpha); }
inline double oy_mu(double alpha) { return (3.0 - alpha) / 6.0; }

/// (log_z - 2 beta t^{1-kappa}) / (beta t^mu), kappa = (1-alpha)/2,
/// mu = (3-alpha)/6.  `log_z` is the free energy at inverse temperature
/// 1 and time beta^2 t.
inline double normalize_oy(double log_z, double t, double alpha, double beta) {
  const double kappa = oy_kappa(alpha);
  const double mu = oy_mu(alpha);
  return (log_z - 2.0 * beta * std::pow(t, 1.0 - kappa)) / (beta * std::pow(t, mu));
}

inline std::size_t default_mesh(std::size_t n, double t, double beta) {
  const auto by_rows = 64 * n;
  const auto by_time = static_cast<std::size_t>(std::ceil(32.0 * beta * beta * t));
  return std::max(by_rows, by_time);
}

struct MeshChoice {
  std::size_t mesh = 0;
  double last_change = 0.0;  // max |delta log Z| over pilots at the accepted mesh
  unsigned doublings = 0;
};

/// Doubles the mesh, on refinement-coupled pilot paths, until the
/// largest change of log Z drops below `tol`.
inline MeshChoice select_mesh(OYParams p, std::size_t pilots, double tol, std::uint64_t seed,
                              unsigned max_doublings = 8) {
  p.validate();
  if (pilots < 1) throw DomainError("select_mesh needs at least one pilot");
  std::vector<BrownianGrid> grids;
  std::vector<double> values;
  for (std::size_t k = 0; k < pilots; ++k) {
    grids.push_back(sample_brownian_grid(p, seed, k));
    values.push_back(log_partition_oy(p, grids.back()));
  }
  double change = 0.0;
  for (unsigned d = 1; d <= max_doublings; ++d) {
    OYParams fine = p;
    fine.mesh = 2 * p.mesh;
    change = 0.0;
    for (std::size_t k = 0; k < pilots; ++k) {
      grids[k] = refine_grid(grids[k], seed, k, d);
      const double v = log_partition_oy(fine, grids[k]);
      change = std::max(change, std::abs(v - values[k]));
      values[k] = v;
    }
    if (change < tol) return {p.mesh, change, d - 1};
    p = fine;
  }
  throw ConvergenceError("select_mesh: log Z still changes by more than " + std::to_string(tol) +
                             " at mesh " + std::to_string(p.mesh),
                         tol, change);
}

struct OYSample {
  std::uint64_t index = 0;
  double log_z = 0.0;
  OYParams params;
  double alpha = std::nan("");
  StreamId seed;
  std::optional<double> normalized;
};

/// Ensemble of log Z^n_t(beta) at fixed mesh.  `normalized` applies
/// normalize_oy to log Z + 2 (n - 1) log beta, the coupled free energy
/// at inverse temperature 1.
inline std::vector<OYSample> ensemble_oy(const OYParams& p, double alpha, std::size_t count,
                                         std::uint64_t seed, unsigned workers = 1) {
  if (count < 1) throw DomainError("ensemble count must be >= 1");
  p.validate();
  std::vector<OYSample> out(count);
  parallel_for(count, workers, [&](std::size_t k) {
    const auto g = sample_brownian_grid(p, seed, k);
    OYSample s;
    s.index = k;
    s.log_z = log_partition_oy(p, g);
    s.params = p;
    s.alpha = alpha;
    s.seed = StreamId{seed, k, channel::kBrownian};
    if (std::isfinite(alpha)) {
      const double shift = 2.0 * static_cast<double>(p.n - 1) * std::log(p.beta);
      s.normalized = normalize_oy(s.log_z + shift, p.t, alpha, p.beta);
    }
    out[k] = s;
  });
  return out;
}

}  // namespace kpz
