#pragma once

// Discrete directed polymer in an N x n rectangle.
//
// Indexing: i in {1..N} is the horizontal (time) coordinate and j in
// {1..n} the vertical one, so row j accumulates the walk S^j(i).  In code
// both are zero-based.  The free energy is the log of the sum over
// up/right lattice paths from (1,1) to (N,n) of exp(beta * sum of W on
// the path), computed in log space; the zero-temperature analogue is the
// last-passage time (maximum path weight).

#include <cmath>
#include <cstdint>
#include <new>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpzlab/errors.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/path_sum.hpp"
#include "kpzlab/rng.hpp"
#include "kpzlab/weights.hpp"

namespace kpz {

/// floor(N^alpha), clamped to >= 1.  The tiny upward nudge keeps exact
/// integer powers such as 10^(5*0.2) = 10 from rounding down.
inline std::size_t rows_for_alpha(double N, double alpha) {
  const double p = std::pow(N, alpha);
  const auto n = static_cast<std::size_t>(std::floor(p * (1.0 + 1e-12)));
  return n < 1 ? 1 : n;
}

struct LatticeParams {
  std::size_t N = 1;  // columns
  std::size_t n = 1;  // rows
  double beta = 1.0;
  double alpha = std::nan("");  // only used for normalisation

  static LatticeParams from_alpha(std::size_t N, double alpha, double beta) {
    return {N, rows_for_alpha(static_cast<double>(N), alpha), beta, alpha};
  }

  void validate() const {
    if (N < 1 || n < 1) throw DomainError("lattice needs N >= 1 and n >= 1");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and > 0");
  }
};

struct FreeEnergySample {
  std::uint64_t index = 0;
  double log_z = 0.0;
  double last_passage = 0.0;  // max path weight from the same disorder
  LatticeParams params;
  std::string weight_family;
  StreamId seed;
  std::optional<double> normalized;
};

namespace detail {

inline void check_disorder(const LatticeParams& p, const DisorderField& w) {
  p.validate();
  if (w.cols() != p.N || w.rows() != p.n) {
    throw DomainError("disorder shape " + std::to_string(w.cols()) + "x" +
                      std::to_string(w.rows()) + " does not match N x n = " +
                      std::to_string(p.N) + "x" + std::to_string(p.n));
  }
  for (double x : w.data()) {
    if (!std::isfinite(x)) throw DomainError("disorder contains a non-finite weight");
  }
}

}  // namespace detail

/// log Z_{N,n}(beta).
inline double log_partition(const LatticeParams& p, const DisorderField& w) {
  detail::check_disorder(p, w);
  Staircase<LogSumExp> dp(p.n);
  std::vector<double> col(p.n);
  for (std::size_t i = 0; i < p.N; ++i) {
    auto src = w.column(i);
    for (std::size_t j = 0; j < p.n; ++j) col[j] = p.beta * src[j];
    dp.push_cells(col);
  }
  return dp.value();
}

/// L_{N,n}: maximum over up/right paths of the summed weights.
inline double last_passage(const LatticeParams& p, const DisorderField& w) {
  detail::check_disorder(p, w);
  Staircase<MaxPlus> dp(p.n);
  for (std::size_t i = 0; i < p.N; ++i) dp.push_cells(w.column(i));
  return dp.value();
}

/// log of the number of up/right paths, C(N + n - 2, n - 1).
inline double log_path_count(std::size_t N, std::size_t n) {
  return log_binomial(static_cast<double>(N + n - 2), static_cast<double>(n - 1));
}

/// (log Z - 2 beta N^{(1+alpha)/2}) / (beta N^{1/2 - alpha/6}).
inline double normalize_free_energy(double log_z, const LatticeParams& p) {
  const double N = static_cast<double>(p.N);
  const double center = 2.0 * p.beta * std::pow(N, 0.5 * (1.0 + p.alpha));
  const double scale = p.beta * std::pow(N, 0.5 - p.alpha / 6.0);
  return (log_z - center) / scale;
}

/// log Z / (2 beta N^{(1+alpha)/2}); tends to 1 almost surely.
inline double lln_ratio(double log_z, const LatticeParams& p) {
  return log_z / (2.0 * p.beta * std::pow(static_cast<double>(p.N), 0.5 * (1.0 + p.alpha)));
}

/// (L - 2 sqrt(N n)) / (sqrt(N) n^{-1/6}).
inline double normalize_last_passage(double lpp, std::size_t N, std::size_t n) {
  const double Nd = static_cast<double>(N);
  const double nd = static_cast<double>(n);
  return (lpp - 2.0 * std::sqrt(Nd * nd)) / (std::sqrt(Nd) * std::pow(nd, -1.0 / 6.0));
}

/// Streams of one ensemble sample: row j draws W(., j) from channel
/// (kWeights, j) of stream (seed, index).
inline std::vector<Stream> lattice_streams(std::uint64_t seed, std::uint64_t index,
                                           std::size_t rows) {
  std::vector<Stream> rs;
  rs.reserve(rows);
  for (std::size_t j = 0; j < rows; ++j) {
    rs.emplace_back(seed, index, channel::row(channel::kWeights, j));
  }
  return rs;
}

/// The disorder that sample `index` of an ensemble would see.
inline DisorderField materialize_disorder(const LatticeParams& p, const WeightSampler& sampler,
                                          std::uint64_t seed, std::uint64_t index) {
  p.validate();
  auto rs = lattice_streams(seed, index, p.n);
  DisorderField w(p.N, p.n);
  for (std::size_t i = 0; i < p.N; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) w(i, j) = sampler(rs[j]);
  }
  return w;
}

/// One ensemble sample, generating the disorder column by column
/// (O(n) memory) and evaluating log Z and L on the same weights.
inline FreeEnergySample simulate_free_energy(const LatticeParams& p, const WeightSampler& sampler,
                                             std::uint64_t seed, std::uint64_t index) {
  p.validate();
  auto rs = lattice_streams(seed, index, p.n);
  Staircase<LogSumExp> free_energy(p.n);
  Staircase<MaxPlus> passage(p.n);
  std::vector<double> w(p.n), bw(p.n);
  for (std::size_t i = 0; i < p.N; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) {
      w[j] = sampler(rs[j]);
      bw[j] = p.beta * w[j];
    }
    free_energy.push_cells(bw);
    passage.push_cells(w);
  }
  FreeEnergySample s;
  s.index = index;
  s.log_z = free_energy.value();
  s.last_passage = passage.value();
  s.params = p;
  s.weight_family = std::string(family_name(sampler.spec().family));
  s.seed = StreamId{seed, index, channel::kWeights};
  if (std::isfinite(p.alpha)) s.normalized = normalize_free_energy(s.log_z, p);
  if (!std::isfinite(s.log_z)) throw DomainError("free energy overflowed");
  return s;
}

/// `count` independent samples ordered by index.  Sample k depends only
/// on (seed, k), never on the worker count.
inline std::vector<FreeEnergySample> ensemble(const LatticeParams& p, const WeightSpec& spec,
                                              std::size_t count, std::uint64_t seed,
                                              unsigned workers = 1) {
  if (count < 1) throw DomainError("ensemble count must be >= 1");
  p.validate();
  const WeightSampler sampler(spec);
  std::vector<FreeEnergySample> out;
  try {
    out.resize(count);
  } catch (const std::bad_alloc&) {
    throw Error("ensemble: cannot allocate " + std::to_string(count) + " samples");
  }
  parallel_for(count, workers,
               [&](std::size_t k) { out[k] = simulate_free_energy(p, sampler, seed, k); });
  return out;
}

}  // namespace kpz
