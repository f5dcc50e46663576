#pragma once

// Fredholm determinants for the semi-discrete polymer and the GUE
// Tracy-Widom law.
//
// Operators on a contour C act by (K f)(v) = int_C K(v, v') f(v') dv' / (2 pi i),
// so the Nystrom matrix of det(I + K) is I + K(v_i, v_j) w_j / (2 pi i) with
// the contour weights w_j.  With this measure the Laplace-transform identity
// is exact already for n = 1, and det(I + K-hat_r) equals det(I - K_Ai) on
// L^2(r, inf).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kpzlab/contour.hpp"
#include "kpzlab/errors.hpp"
#include "kpzlab/special.hpp"

namespace kpz {

inline constexpr cplx kTwoPiI{0.0, 2.0 * kPi};

struct DetResult {
  cplx value = 1.0;
  std::size_t nodes = 0;
  double last_delta = 0.0;  // |det(m) - det(m / 2)| at the accepted node count
};

/// det(I + K w / (2 pi i)) for a kernel evaluated on the contour nodes.
template <class Kernel>
cplx fredholm_det(const Contour& c, Kernel&& kernel) {
  const auto m = static_cast<Eigen::Index>(c.size());
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const cplx k = kernel(c.nodes[std::size_t(i)], c.nodes[std::size_t(j)]);
      if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) {
        throw DomainError("fredholm_det: kernel is not finite at a node pair");
      }
      a(i, j) += k * c.weights[std::size_t(j)] / kTwoPiI;
    }
  }
  return a.partialPivLu().determinant();
}

inline cplx det_identity_plus(const Eigen::MatrixXcd& k) {
  const auto m = k.rows();
  return (Eigen::MatrixXcd::Identity(m, m) + k).partialPivLu().determinant();
}

/// Doubles the node count from m0 until successive determinants differ
/// by less than tol.  `det_at(m)` evaluates the determinant with m nodes.
inline DetResult converge_det(const std::function<cplx(std::size_t)>& det_at, std::size_t m0,
                              std::size_t max_nodes, double tol, const std::string& what) {
  cplx prev = det_at(m0), cur = prev;
  double delta = INFINITY;
  for (std::size_t m = 2 * m0; m <= max_nodes; m *= 2) {
    prev = cur;
    cur = det_at(m);
    delta = std::abs(cur - prev);
    if (delta < tol) return {cur, m, delta};
  }
  throw ConvergenceError(what + ": determinant not converged at " + std::to_string(max_nodes) +
                             " nodes (last change " + std::to_string(delta) + ")",
                         prev.real(), cur.real());
}

// ---------------------------------------------------------------------------
// Kernels defined by an integral over a vertical line.
//
// Both the Laplace kernel K_u and its rescaled form have the shape
//
//   K(v, v') = (1 / 2 pi i) int dy i exp(L(v, y)) / (v + delta + i y - v')
//
// for a log-integrand L.  The line is truncated at |y| <= T where the
// integrand has dropped e^{-40} below its peak, and sampled by the
// trapezoid rule with a step resolving the nearest singularity.

struct LineKernel {
  double delta = 0.5;
  std::function<cplx(cplx v, double y)> log_integrand;
  double other_singularity = 1.0;  // distance from the line to singularities of L
  double t_scale = 1.0;            // multiplies the truncation height (verification)
  double step_scale = 1.0;         // multiplies the trapezoid step (verification)
};

struct LineGrid {
  double height = 0.0;
  double step = 0.0;
  std::vector<double> y;
  std::vector<double> w;
};

namespace detail {

inline double truncation_height(const LineKernel& k, std::span<const cplx> nodes) {
  // A handful of representative nodes bounds the envelope.
  std::vector<cplx> probe;
  const std::size_t stride = std::max<std::size_t>(1, nodes.size() / 16);
  for (std::size_t i = 0; i < nodes.size(); i += stride) probe.push_back(nodes[i]);
  double height = 0.0;
  for (double dir : {1.0, -1.0}) {
    double peak = -INFINITY, prev = -INFINITY;
    int falling = 0;
    const double ds = 0.02;
    for (double y = 0.0; y < 1e4; y += ds) {
      double val = -INFINITY;
      for (cplx v : probe) val = std::max(val, k.log_integrand(v, dir * y).real());
      peak = std::max(peak, val);
      falling = val < prev ? falling + 1 : 0;
      prev = val;
      if (val < peak - 40.0 && falling > 50) {
        height = std::max(height, y);
        break;
      }
    }
  }
  if (height == 0.0) throw ConvergenceError("line kernel: integrand does not decay", 0.0, 0.0);
  return height;
}

}  // namespace detail

inline LineGrid line_grid(const LineKernel& k, std::span<const cplx> nodes) {
  double lo = INFINITY, hi = -INFINITY;
  for (cplx v : nodes) {
    lo = std::min(lo, v.real());
    hi = std::max(hi, v.real());
  }
  const double gap = k.delta - (hi - lo);
  if (!(gap > 0.0)) {
    throw DomainError("contour violation: Re(v + s - v') <= 0 for some node pair (spread " +
                      std::to_string(hi - lo) + " >= delta " + std::to_string(k.delta) + ")");
  }
  const double d = std::min(gap, k.other_singularity);
  LineGrid g;
  g.height = k.t_scale * detail::truncation_height(k, nodes);
  g.step = k.step_scale * 2.0 * kPi * d / 45.0;
  const auto half = static_cast<std::size_t>(std::ceil(g.height / g.step));
  const double h = g.height / double(half);
  g.step = h;
  for (std::size_t i = 0; i <= 2 * half; ++i) {
    g.y.push_back((double(i) - double(half)) * h);
    g.w.push_back((i == 0 || i == 2 * half) ? 0.5 * h : h);
  }
  return g;
}

/// Matrix K(v_i, v_j) w_j / (2 pi i) on the contour.
inline Eigen::MatrixXcd line_kernel_matrix(const Contour& c, const LineKernel& k) {
  const LineGrid g = line_grid(k, c.nodes);
  const std::size_t m = c.size();
  const std::size_t S = g.y.size();
  // A(i, s) = w_s exp(L(v_i, y_s)) i / (2 pi i) = w_s exp(L) / (2 pi).
  std::vector<cplx> a(m * S);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t s = 0; s < S; ++s) {
      a[i * S + s] = g.w[s] / (2.0 * kPi) * std::exp(k.log_integrand(c.nodes[i], g.y[s]));
    }
  }
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const cplx* ai = a.data() + i * S;
    for (std::size_t j = 0; j < m; ++j) {
      const double br = c.nodes[i].real() + k.delta - c.nodes[j].real();
      const double bi = c.nodes[i].imag() - c.nodes[j].imag();
      double sr = 0.0, si = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        const double dr = br, di = bi + g.y[s];
        const double inv = 1.0 / (dr * dr + di * di);
        const double ar = ai[s].real(), aim = ai[s].imag();
        sr += (ar * dr + aim * di) * inv;
        si += (aim * dr - ar * di) * inv;
      }
      out(Eigen::Index(i), Eigen::Index(j)) = cplx(sr, si) * c.weights[j] / kTwoPiI;
    }
  }
  return out;
}

/// Single kernel value K(v, v').
inline cplx line_kernel_value(cplx v, cplx vp, const LineKernel& k) {
  const std::array<cplx, 2> nodes{v, vp};
  const LineGrid g = line_grid(k, nodes);
  cplx sum = 0.0;
  for (std::size_t s = 0; s < g.y.size(); ++s) {
    sum += g.w[s] * std::exp(k.log_integrand(v, g.y[s])) / (v + k.delta + cplx(0.0, g.y[s]) - vp);
  }
  return sum / (2.0 * kPi);
}

// ---------------------------------------------------------------------------
// Laplace transform of the semi-discrete partition function.

struct KernelParams {
  std::size_t n = 1;
  double tau = 1.0;
  double log_u = 0.0;
  double delta = 0.5;
};

namespace detail {

// log of pi / sin(-pi s), stable for large |Im s|.
inline cplx log_pi_over_sin_neg(cplx s) {
  const cplx i{0.0, 1.0};
  cplx log_sin;
  if (s.imag() >= 0.0) {
    log_sin = -i * kPi * s + std::log(cplx(0.0, 0.5)) + std::log(1.0 - std::exp(2.0 * i * kPi * s));
  } else {
    log_sin = i * kPi * s + std::log(cplx(0.0, -0.5)) + std::log(1.0 - std::exp(-2.0 * i * kPi * s));
  }
  return std::log(kPi) + i * kPi - log_sin;
}

}  // namespace detail

inline LineKernel laplace_line_kernel(const KernelParams& p) {
  if (p.n < 1 || !(p.tau > 0.0) || !(p.delta > 0.0 && p.delta < 1.0) || !std::isfinite(p.log_u)) {
    throw DomainError("laplace kernel needs n >= 1, tau > 0, 0 < delta < 1, finite log u");
  }
  LineKernel k;
  k.delta = p.delta;
  k.other_singularity = std::min(p.delta, 1.0 - p.delta);
  const double n = static_cast<double>(p.n);
  k.log_integrand = [p, n](cplx v, double y) {
    const cplx s{p.delta, y};
    return detail::log_pi_over_sin_neg(s) + n * (log_gamma(v) - log_gamma(s + v)) + s * p.log_u +
           p.tau * v * s + 0.5 * p.tau * s * s;
  };
  return k;
}

/// K_u(v, v') by quadrature on the line delta + i R.
inline cplx kernel_Ku(cplx v, cplx vp, const KernelParams& p, double t_scale = 1.0) {
  LineKernel k = laplace_line_kernel(p);
  k.t_scale = t_scale;
  return line_kernel_value(v, vp, k);
}

struct LaplaceResult {
  double value = 0.0;
  double imag = 0.0;
  std::size_t nodes = 0;
  double last_delta = 0.0;
};

inline constexpr double kDetTol = 1e-8;

/// E[exp(-u Z^n_tau(1))] = det(I + K_u) on a circle of radius `radius`
/// (default 0.45 delta) around 0.
inline LaplaceResult laplace_oy_log(std::size_t n, double tau, double log_u, double delta = 0.5,
                                    double radius = 0.0, double tol = kDetTol) {
  const KernelParams p{n, tau, log_u, delta};
  const LineKernel k = laplace_line_kernel(p);
  const double R = radius > 0.0 ? radius : 0.45 * delta;
  const auto res = converge_det(
      [&](std::size_t m) { return det_identity_plus(line_kernel_matrix(circle_contour(0.0, R, m), k)); },
      16, 512, tol, "laplace_oy");
  if (std::abs(res.value.imag()) > 1e-8) {
    throw ConvergenceError("laplace_oy: imaginary residue " + std::to_string(res.value.imag()), 0.0,
                           res.value.imag());
  }
  return {res.value.real(), res.value.imag(), res.nodes, res.last_delta};
}

inline LaplaceResult laplace_oy(std::size_t n, double tau, double u, double delta = 0.5,
                                double radius = 0.0) {
  if (!(u > 0.0)) throw DomainError("laplace_oy needs u > 0");
  return laplace_oy_log(n, tau, std::log(u), delta, radius);
}

// ---------------------------------------------------------------------------
// Rescaled kernel and the critical point analysis.

struct LaplaceParameter {
  double u = 0.0;
  double log_u = 0.0;
};

/// u = exp(-2 beta t^{1-kappa} - r t^mu); log_u stays exact when u underflows.
inline LaplaceParameter compute_u(double t, double alpha, double beta, double r) {
  const double kappa = 0.5 * (1.0 - alpha);
  const double mu = (3.0 - alpha) / 6.0;
  const double log_u = -2.0 * beta * std::pow(t, 1.0 - kappa) - r * std::pow(t, mu);
  return {std::exp(log_u), log_u};
}

struct RescaledParams {
  std::size_t n = 1;
  double t = 1.0;
  double alpha = 0.5;
  double beta = 1.0;
  double r = 0.0;
  double delta = 0.0;  // delta-tilde; 0 selects 0.1 / beta

  double kappa() const { return 0.5 * (1.0 - alpha); }
  double delta_tilde() const { return delta > 0.0 ? delta : 0.1 / beta; }
};

/// G(z) = log Gamma(t^{-kappa} z) - beta^2 z^2 / 2 + 2 beta z and derivatives.
struct GFunction {
  double t = 1.0;
  double alpha = 0.5;
  double beta = 1.0;

  double scale() const { return std::pow(t, -0.5 * (1.0 - alpha)); }
  cplx value(cplx z) const { return log_gamma(scale() * z) - 0.5 * beta * beta * z * z + 2.0 * beta * z; }
  cplx d1(cplx z) const { return polygamma(0, scale() * z) * scale() - beta * beta * z + 2.0 * beta; }
  cplx d2(cplx z) const { return polygamma(1, scale() * z) * scale() * scale() - beta * beta; }
  cplx d3(cplx z) const { return polygamma(2, scale() * z) * std::pow(scale(), 3); }
};

struct CriticalPoint {
  double value = 0.0;
  double residual = 0.0;  // -1/v - beta^2 v + 2 beta at the returned point
};

inline double critical_residual(double v, double beta) { return -1.0 / v - beta * beta * v + 2.0 * beta; }

inline CriticalPoint critical_point(double beta) {
  if (!(beta > 0.0)) throw DomainError("critical_point needs beta > 0");
  const double v = 1.0 / beta;
  return {v, critical_residual(v, beta)};
}

/// Rescaled kernel: zeta on v + delta-tilde + i R,
///   (1/2 pi i) int pi t^{-kappa} / sin(pi t^{-kappa} (v - zeta))
///     exp{n (lG(t^{-kappa} v) - lG(t^{-kappa} zeta)) + t^alpha (Q(v) - Q(zeta))
///         + r t^{alpha/3} (v - zeta)} dzeta / (zeta - v'),
/// with Q(z) = -beta^2 z^2 / 2 + 2 beta z.  The log-Gamma term carries the
/// integer n so the kernel is the exact change of variables of K_u.
inline LineKernel rescaled_line_kernel(const RescaledParams& p) {
  const double dt = p.delta_tilde();
  const double scale = std::pow(p.t, -p.kappa());
  if (!(dt * scale < 1.0)) throw DomainError("rescaled kernel: delta-tilde crosses the sine pole");
  LineKernel k;
  k.delta = dt;
  k.other_singularity = std::min(dt, 1.0 / scale - dt);
  const double n = static_cast<double>(p.n);
  const double ta = std::pow(p.t, p.alpha);
  const double ta3 = std::pow(p.t, p.alpha / 3.0);
  const double beta = p.beta, r = p.r;
  k.log_integrand = [=](cplx v, double y) {
    const cplx zeta = v + cplx(dt, y);
    auto q = [&](cplx z) { return -0.5 * beta * beta * z * z + 2.0 * beta * z; };
    return std::log(scale) + detail::log_pi_over_sin_neg(scale * (zeta - v)) +
           n * (log_gamma(scale * v) - log_gamma(scale * zeta)) + ta * (q(v) - q(zeta)) +
           r * ta3 * (v - zeta);
  };
  return k;
}

inline cplx kernel_rescaled(cplx v, cplx vp, const RescaledParams& p) {
  return line_kernel_value(v, vp, rescaled_line_kernel(p));
}

/// det(I + K-tilde) on a circle of radius `radius` (default 0.45 delta-tilde).
inline DetResult rescaled_det(const RescaledParams& p, double radius = 0.0, double tol = kDetTol) {
  const LineKernel k = rescaled_line_kernel(p);
  const double R = radius > 0.0 ? radius : 0.45 * p.delta_tilde();
  return converge_det(
      [&](std::size_t m) { return det_identity_plus(line_kernel_matrix(circle_contour(0.0, R, m), k)); },
      16, 512, tol, "rescaled determinant");
}

// ---------------------------------------------------------------------------
// Airy kernel and Tracy-Widom GUE.

inline double airy_kernel(double x, double y, const AiryValue& ax, const AiryValue& ay) {
  if (x == y) return ax.aip * ax.aip - x * ax.ai * ax.ai;
  return (ax.ai * ay.aip - ax.aip * ay.ai) / (x - y);
}

/// det(I - K_Ai) on (r, inf) with m mapped Gauss-Legendre nodes,
/// x = r + 10 (1 + xi) / (1 - xi).
inline double airy_det(double r, std::size_t m) {
  const auto rule = gauss_legendre(static_cast<unsigned>(m));
  const auto M = static_cast<Eigen::Index>(m);
  std::vector<double> x(m), sw(m);
  std::vector<AiryValue> a(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double xi = rule.nodes[i];
    x[i] = r + 10.0 * (1.0 + xi) / (1.0 - xi);
    sw[i] = std::sqrt(rule.weights[i] * 20.0 / ((1.0 - xi) * (1.0 - xi)));
    a[i] = airy(x[i]);
  }
  Eigen::MatrixXd k(M, M);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      k(Eigen::Index(i), Eigen::Index(j)) =
          (i == j ? 1.0 : 0.0) - sw[i] * airy_kernel(x[i], x[j], a[i], a[j]) * sw[j];
    }
  }
  return k.partialPivLu().determinant();
}

struct TracyWidomValue {
  double value = 0.0;
  std::size_t nodes = 0;
  double last_delta = 0.0;
};

inline TracyWidomValue tracy_widom_gue_detail(double r, double tol = kDetTol) {
  if (!std::isfinite(r)) throw DomainError("tracy_widom_gue: r must be finite");
  const auto res = converge_det([&](std::size_t m) { return cplx(airy_det(r, m), 0.0); }, 16, 1024,
                                tol, "tracy_widom_gue");
  return {std::clamp(res.value.real(), 0.0, 1.0), res.nodes, res.last_delta};
}

/// F_2(r), the GUE Tracy-Widom distribution function.
inline double tracy_widom_gue(double r) { return tracy_widom_gue_detail(r).value; }

/// Mean of F_2 as int_0^inf (1 - F) - int_{-inf}^0 F on [lo, hi], with
/// `panels` unit panels of an m-point Gauss-Legendre rule.
inline double tracy_widom_mean(std::size_t m, double lo = -10.0, double hi = 8.0) {
  const auto rule = gauss_legendre(static_cast<unsigned>(m));
  double mean = 0.0;
  for (double a = lo; a < hi - 1e-12; a += 1.0) {
    const double b = std::min(a + 1.0, hi);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[k];
      const double f = airy_det(x, 64);
      const double integrand = x < 0.0 ? -f : 1.0 - f;
      mean += 0.5 * (b - a) * rule.weights[k] * integrand;
    }
  }
  return mean;
}

// ---------------------------------------------------------------------------
// Crossover kernel K-hat_r on rays.

struct CrossoverParams {
  double r = 0.0;
  double beta = 1.0;
  double d = 0.0;  // 0 selects 1 / (2 beta)

  double base() const { return d == 0.0 ? 0.5 / beta : d; }
};

namespace detail {

inline cplx crossover_exponent(cplx z, const CrossoverParams& p) {
  return -p.beta * p.beta * p.beta / 3.0 * z * z * z + p.r * z;
}

// Distance along a ray beyond which Re(sign * exponent) stays 40 below its peak.
inline double ray_length(cplx base, double angle, double sign, const CrossoverParams& p) {
  const cplx dir = std::polar(1.0, angle);
  double peak = -INFINITY, prev = -INFINITY, len = 0.0;
  int falling = 0;
  for (double rho = 0.0; rho < 1e3; rho += 0.01) {
    const double val = sign * crossover_exponent(base + rho * dir, p).real();
    peak = std::max(peak, val);
    falling = val < prev ? falling + 1 : 0;
    prev = val;
    if (val < peak - 40.0 && falling > 20) {
      len = rho;
      break;
    }
  }
  if (len == 0.0) throw ConvergenceError("crossover: ray integrand does not decay", 0.0, 0.0);
  return len;
}

inline std::vector<double> ray_breaks(double beta) {
  std::vector<double> b;
  for (double x : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) b.push_back(x / beta);
  return b;
}

}  // namespace detail

struct CrossoverContours {
  Contour v;     // rays from 0 at +-2 pi / 3
  Contour zeta;  // rays from d at +-pi / 3
};

inline CrossoverContours crossover_contours(const CrossoverParams& p, std::size_t m) {
  if (!(p.beta > 0.0)) throw DomainError("crossover: beta must be positive");
  if (!(p.base() > 0.0)) throw DomainError("crossover: the zeta contour needs d > 0");
  const auto breaks = detail::ray_breaks(p.beta);
  const double lv = std::max(detail::ray_length(0.0, 2.0 * kPi / 3.0, 1.0, p),
                             detail::ray_length(0.0, -2.0 * kPi / 3.0, 1.0, p));
  const double lz = std::max(detail::ray_length(p.base(), kPi / 3.0, -1.0, p),
                             detail::ray_length(p.base(), -kPi / 3.0, -1.0, p));
  return {ray_contour(0.0, 2.0 * kPi / 3.0, lv, m, breaks),
          ray_contour(p.base(), kPi / 3.0, lz, m, breaks)};
}

/// K-hat_r(v, v') with the zeta integral on the given contour.
inline cplx kernel_limit(cplx v, cplx vp, const CrossoverParams& p, const Contour& zeta) {
  cplx sum = 0.0;
  const cplx fv = detail::crossover_exponent(v, p);
  for (std::size_t q = 0; q < zeta.size(); ++q) {
    const cplx z = zeta.nodes[q];
    sum += zeta.weights[q] * std::exp(fv - detail::crossover_exponent(z, p)) / ((v - z) * (z - vp));
  }
  return sum / kTwoPiI;
}

inline cplx kernel_limit(cplx v, cplx vp, double r, double beta, double d = 0.0, std::size_t m = 32) {
  const CrossoverParams p{r, beta, d};
  return kernel_limit(v, vp, p, crossover_contours(p, m).zeta);
}

inline cplx crossover_det(const CrossoverParams& p, std::size_t m) {
  const auto c = crossover_contours(p, m);
  const auto V = static_cast<Eigen::Index>(c.v.size());
  const auto Q = static_cast<Eigen::Index>(c.zeta.size());
  // K = A B with A(i, q) = e^{f(v_i) - f(z_q)} w_q / (2 pi i (v_i - z_q)),
  // B(q, j) = w_j / (2 pi i (z_q - v_j)).
  Eigen::MatrixXcd a(V, Q), b(Q, V);
  for (Eigen::Index i = 0; i < V; ++i) {
    const cplx v = c.v.nodes[std::size_t(i)];
    const cplx fv = detail::crossover_exponent(v, p);
    for (Eigen::Index q = 0; q < Q; ++q) {
      const cplx z = c.zeta.nodes[std::size_t(q)];
      a(i, q) = std::exp(fv - detail::crossover_exponent(z, p)) * c.zeta.weights[std::size_t(q)] /
                (kTwoPiI * (v - z));
    }
  }
  for (Eigen::Index q = 0; q < Q; ++q) {
    const cplx z = c.zeta.nodes[std::size_t(q)];
    for (Eigen::Index j = 0; j < V; ++j) {
      b(q, j) = c.v.weights[std::size_t(j)] / (kTwoPiI * (z - c.v.nodes[std::size_t(j)]));
    }
  }
  return det_identity_plus(a * b);
}

inline DetResult f_gue_via_crossover_detail(double r, double beta, double d = 0.0,
                                            double tol = 1e-10) {
  if (!(beta > 0.0)) throw DomainError("crossover: beta must be > 0");
  const CrossoverParams p{r, beta, d};
  auto res = converge_det([&](std::size_t m) { return crossover_det(p, m); }, 8, 256, tol,
                          "f_gue_via_crossover");
  if (std::abs(res.value.imag()) > 1e-8) {
    throw ConvergenceError("crossover: imaginary residue " + std::to_string(res.value.imag()), 0.0,
                           res.value.imag());
  }
  return res;
}

/// det(I + K-hat_r) = F_2(r / beta).
inline double f_gue_via_crossover(double r, double beta, double d = 0.0) {
  return f_gue_via_crossover_detail(r, beta, d).value.real();
}

}  // namespace kpz
