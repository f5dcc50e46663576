#pragma once

// Empirical distributions, KS distances, bootstrap moments and log-log
// exponent fits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include "kpzlab/errors.hpp"
#include "kpzlab/fredholm.hpp"
#include "kpzlab/parallel.hpp"
#include "kpzlab/rng.hpp"

namespace kpz {

class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw DomainError("empirical distribution needs at least one value");
    for (double x : values_) {
      if (!std::isfinite(x)) throw DomainError("empirical distribution: non-finite value");
    }
    std::sort(values_.begin(), values_.end());
  }

  /// Fraction of values <= x.
  double ecdf(double x) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return double(it - values_.begin()) / double(values_.size());
  }

  /// Linear-interpolation quantile, q in [0, 1].
  double quantile(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
    const double pos = q * double(values_.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values_.size() - 1);
    return values_[lo] + (pos - double(lo)) * (values_[hi] - values_[lo]);
  }

  std::span<const double> sorted_values() const { return values_; }
  std::size_t count() const { return values_.size(); }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

 private:
  std::vector<double> values_;
};

inline double ecdf(const EmpiricalDistribution& d, double x) { return d.ecdf(x); }

/// sup_x |F_m(x) - F(x)|, evaluated at the jumps from both sides.  The
/// left limit of F is taken at the next double down, so F may have atoms.
inline double ks_distance(const EmpiricalDistribution& d, const std::function<double(double)>& F) {
  const auto v = d.sorted_values();
  const double m = double(v.size());
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    // Ties: the ECDF jumps once to the index past the last equal value.
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    const double f = F(v[i]);
    const double f_left = F(std::nextafter(v[i], -INFINITY));
    best = std::max({best, std::abs(double(j + 1) / m - f), std::abs(f_left - double(i) / m)});
    i = j;
  }
  return best;
}

/// Dvoretzky-Kiefer-Wolfowitz bound: P(KS > eps) <= level.
inline double dkw_threshold(std::size_t m, double level = 0.01) {
  return std::sqrt(std::log(2.0 / level) / (2.0 * double(m)));
}

/// F_2 tabulated on a uniform grid and interpolated by monotone cubics;
/// 0 below the grid and 1 above it.
class TracyWidomTable {
 public:
  TracyWidomTable(std::vector<double> r, std::vector<double> f)
      : lo_(r.front()), hi_(r.back()), r_(r), f_(f),
        interp_(std::move(r), std::move(f)) {}

  static TracyWidomTable compute(double lo = -10.0, double hi = 6.0, double step = 0.04) {
    std::vector<double> r, f;
    const auto count = static_cast<std::size_t>(std::llround((hi - lo) / step));
    for (std::size_t k = 0; k <= count; ++k) {
      const double x = lo + step * double(k);
      r.push_back(x);
      f.push_back(tracy_widom_gue(x));
    }
    return TracyWidomTable(std::move(r), std::move(f));
  }

  /// Shared table on [-10, 6] with step 0.04 (401 points).
  static const TracyWidomTable& reference() {
    static const TracyWidomTable table = compute();
    return table;
  }

  double operator()(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    return std::clamp(interp_(x), 0.0, 1.0);
  }

  std::span<const double> grid() const { return r_; }
  std::span<const double> values() const { return f_; }

 private:
  double lo_, hi_;
  std::vector<double> r_, f_;
  boost::math::interpolators::pchip<std::vector<double>> interp_;
};

struct Moments {
  double mean = 0.0;
  double sd = 0.0;    // with the 1 / (m - 1) convention
  double skew = 0.0;  // m3 / m2^{3/2}, 0 for a constant sample
};

inline Moments sample_moments(std::span<const double> x) {
  if (x.empty()) throw DomainError("moments of an empty sample");
  const double m = double(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / m;
  double m2 = 0.0, m3 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  Moments r;
  r.mean = mean;
  r.sd = x.size() > 1 ? std::sqrt(m2 / (m - 1.0)) : 0.0;
  m2 /= m;
  m3 /= m;
  r.skew = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  return r;
}

struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct BootstrapMoments {
  Interval mean, sd, skew;
  double mean_se = 0.0;  // bootstrap standard error of the mean
};

/// Percentile bootstrap; replicate b resamples with stream (seed, b, kBootstrap).
inline BootstrapMoments bootstrap_moments(const EmpiricalDistribution& d, std::size_t B = 2000,
                                          std::uint64_t seed = 0, double level = 0.95,
                                          unsigned workers = 1) {
  if (d.count() < 30) throw DomainError("bootstrap needs at least 30 values");
  if (B < 2) throw DomainError("bootstrap needs at least 2 replicates");
  const auto x = d.sorted_values();
  const Moments base = sample_moments(x);
  std::vector<Moments> reps(B);
  parallel_for(B, workers, [&](std::size_t b) {
    Stream s(seed, b, channel::kBootstrap);
    std::vector<double> y(x.size());
    for (double& v : y) v = x[static_cast<std::size_t>(s.uniform() * double(x.size()))];
    reps[b] = sample_moments(y);
  });
  auto interval = [&](double est, auto field) {
    std::vector<double> v(B);
    for (std::size_t b = 0; b < B; ++b) v[b] = field(reps[b]);
    const EmpiricalDistribution e(std::move(v));
    return Interval{est, e.quantile(0.5 * (1.0 - level)), e.quantile(0.5 * (1.0 + level))};
  };
  BootstrapMoments r;
  r.mean = interval(base.mean, [](const Moments& m) { return m.mean; });
  r.sd = interval(base.sd, [](const Moments& m) { return m.sd; });
  r.skew = interval(base.skew, [](const Moments& m) { return m.skew; });
  std::vector<double> means(B);
  for (std::size_t b = 0; b < B; ++b) means[b] = reps[b].mean;
  r.mean_se = sample_moments(means).sd;
  return r;
}

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double slope_lo = 0.0;
  double slope_hi = 0.0;
  double r_squared = 1.0;
  std::vector<double> residuals;  // in log sd
};

/// Least-squares fit of log sd = intercept + slope log N, with a
/// Student-t interval for the slope.
inline ExponentFit exponent_fit(std::span<const std::pair<double, double>> pairs, double level = 0.95) {
  std::vector<double> xs, ys;
  for (const auto& [N, sd] : pairs) {
    if (!(N > 0.0) || !(sd > 0.0)) throw DomainError("exponent_fit needs positive N and sd");
    xs.push_back(std::log(N));
    ys.push_back(std::log(sd));
  }
  std::vector<double> distinct = xs;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) throw DomainError("exponent_fit needs at least 3 distinct N");
  const double k = double(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  ExponentFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (f.intercept + f.slope * xs[i]);
    f.residuals.push_back(e);
    sse += e * e;
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  const double dof = k - 2.0;
  f.slope_se = std::sqrt(sse / dof / sxx);
  const boost::math::students_t t(dof);
  const double q = boost::math::quantile(t, 0.5 * (1.0 + level));
  f.slope_lo = f.slope - q * f.slope_se;
  f.slope_hi = f.slope + q * f.slope_se;
  return f;
}

/// True when the sequence never increases.
inline bool non_increasing(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) return false;
  }
  return true;
}

}  // namespace kpz
