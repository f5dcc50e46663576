#pragma once

// Complex log-Gamma and polygamma functions, Airy functions, and
// Gauss-Legendre rules.

#include <array>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <boost/math/special_functions/legendre.hpp>

#include "kpzlab/errors.hpp"

namespace kpz {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kEulerGamma = 0.577215664901532860606512090082402431;

namespace detail {

// B_{2k} for k = 1..10.
inline constexpr std::array<double, 10> kBernoulli2k = {
    1.0 / 6.0,           -1.0 / 30.0,  1.0 / 42.0,         -1.0 / 30.0,    5.0 / 66.0,
    -691.0 / 2730.0,     7.0 / 6.0,    -3617.0 / 510.0,    43867.0 / 798.0, -174611.0 / 330.0};

inline constexpr double kStirlingRadius = 15.0;

inline void check_pole(cplx z, const char* who) {
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::nearbyint(z.real())) {
    throw DomainError(std::string(who) + ": pole at nonpositive integer " + std::to_string(z.real()));
  }
}

// Number of unit shifts that bring z into the asymptotic region.
inline int shift_count(cplx z) {
  if (z.real() >= kStirlingRadius) return 0;
  return static_cast<int>(std::ceil(kStirlingRadius - z.real()));
}

}  // namespace detail

/// Principal branch of log Gamma on the plane cut along (-inf, 0]: the
/// analytic continuation of the real function from the positive axis.
inline cplx log_gamma(cplx z) {
  detail::check_pole(z, "log_gamma");
  const int k = detail::shift_count(z);
  cplx correction = 0.0;
  for (int j = 0; j < k; ++j) correction += std::log(z + static_cast<double>(j));
  const cplx w = z + static_cast<double>(k);
  const cplx inv = 1.0 / w;
  const cplx inv2 = inv * inv;
  cplx series = 0.0;
  cplx p = inv;
  for (std::size_t i = 0; i < detail::kBernoulli2k.size(); ++i) {
    const double m = 2.0 * static_cast<double>(i + 1);
    series += detail::kBernoulli2k[i] / (m * (m - 1.0)) * p;
    p *= inv2;
  }
  const cplx stirling = (w - 0.5) * std::log(w) - w + 0.5 * std::log(2.0 * kPi) + series;
  return stirling - correction;
}

inline double log_gamma(double x) { return log_gamma(cplx(x, 0.0)).real(); }

/// psi^{(k)}(z) for k = 0, 1, 2 (digamma, trigamma, tetragamma).
inline cplx polygamma(int k, cplx z) {
  if (k < 0 || k > 2) throw DomainError("polygamma: only orders 0, 1, 2 are supported");
  detail::check_pole(z, "polygamma");
  const int shift = detail::shift_count(z);
  cplx correction = 0.0;
  for (int j = 0; j < shift; ++j) {
    const cplx q = 1.0 / (z + static_cast<double>(j));
    if (k == 0) correction -= q;
    else if (k == 1) correction += q * q;
    else correction -= 2.0 * q * q * q;
  }
  const cplx w = z + static_cast<double>(shift);
  const cplx inv = 1.0 / w;
  const cplx inv2 = inv * inv;
  cplx value;
  if (k == 0) {
    value = std::log(w) - 0.5 * inv;
    cplx p = inv2;
    for (std::size_t i = 0; i < detail::kBernoulli2k.size(); ++i) {
      value -= detail::kBernoulli2k[i] / (2.0 * double(i + 1)) * p;
      p *= inv2;
    }
  } else if (k == 1) {
    value = inv + 0.5 * inv2;
    cplx p = inv2 * inv;
    for (double b : detail::kBernoulli2k) {
      value += b * p;
      p *= inv2;
    }
  } else {
    value = -inv2 - inv2 * inv;
    cplx p = inv2 * inv2;
    for (std::size_t i = 0; i < detail::kBernoulli2k.size(); ++i) {
      value -= (2.0 * double(i + 1) + 1.0) * detail::kBernoulli2k[i] * p;
      p *= inv2;
    }
  }
  return value + correction;
}

inline double polygamma(int k, double x) { return polygamma(k, cplx(x, 0.0)).real(); }

struct AiryValue {
  double ai = 0.0;
  double aip = 0.0;  // Ai'
};

namespace detail {

// Maclaurin series in extended precision; accurate on [-8, 6].
inline AiryValue airy_series(double xd) {
  using ld = long double;
  const ld x = xd;
  const ld x3 = x * x * x;
  const ld c1 = 0.355028053887817239260063186004183176L;  // Ai(0)
  const ld c2 = 0.258819403792806798405183560189203963L;  // -Ai'(0)
  ld f = 1, g = x, fp = 0, gp = 1;
  ld a = 1, b = x, d = x * x / 2, e = 1;
  fp = d;
  for (int k = 1; k < 200; ++k) {
    const ld kk = k;
    a *= x3 / ((3 * kk - 1) * (3 * kk));
    b *= x3 / ((3 * kk) * (3 * kk + 1));
    e *= x3 / ((3 * kk - 2) * (3 * kk));
    if (k > 1) {
      d *= x3 / ((3 * kk - 3) * (3 * kk - 1));
      fp += d;
    }
    f += a;
    g += b;
    gp += e;
    const ld scale = std::fabs(f) + std::fabs(g) + std::fabs(fp) + std::fabs(gp);
    if (std::fabs(a) + std::fabs(b) + std::fabs(d) + std::fabs(e) < 1e-21L * scale && k > 3) break;
  }
  return {static_cast<double>(c1 * f - c2 * g), static_cast<double>(c1 * fp - c2 * gp)};
}

// u_k and v_k coefficients of the Airy asymptotic expansions.
inline const std::array<std::pair<double, double>, 40>& airy_coefficients() {
  static const auto table = [] {
    std::array<std::pair<double, double>, 40> t{};
    double u = 1.0;
    t[0] = {1.0, 1.0};
    for (int k = 1; k < 40; ++k) {
      u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
      t[static_cast<std::size_t>(k)] = {u, -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u};
    }
    return t;
  }();
  return table;
}

// x > 6: exponentially small Ai.
inline AiryValue airy_positive(double x) {
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  const auto& c = airy_coefficients();
  double su = 0.0, sv = 0.0, p = 1.0, last = INFINITY;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double term = c[k].first * p;
    if (std::abs(term) > last) break;
    last = std::abs(term);
    su += term;
    sv += c[k].second * p;
    p *= -1.0 / zeta;
  }
  const double pre = std::exp(-zeta) / (2.0 * std::sqrt(kPi));
  const double q = std::pow(x, 0.25);
  return {pre / q * su, -pre * q * sv};
}

// x < -8: oscillatory regime, written for Ai(-y), y > 8.
inline AiryValue airy_negative(double x) {
  const double y = -x;
  const double zeta = 2.0 / 3.0 * y * std::sqrt(y);
  const auto& c = airy_coefficients();
  double pu = 0.0, qu = 0.0, pv = 0.0, qv = 0.0;
  double p = 1.0, last = INFINITY;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double term = c[k].first * p;
    if (std::abs(term) > last) break;
    last = std::abs(term);
    // Series in (-1)^m zeta^{-2m} on even k and (-1)^m zeta^{-2m-1} on odd k.
    const double sign = (k / 2) % 2 == 0 ? 1.0 : -1.0;
    if (k % 2 == 0) {
      pu += sign * term;
      pv += sign * c[k].second * p;
    } else {
      qu += sign * term;
      qv += sign * c[k].second * p;
    }
    p /= zeta;
  }
  const double phase = zeta + 0.25 * kPi;
  const double s = std::sin(phase), co = std::cos(phase);
  const double q = std::pow(y, 0.25);
  const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
  return {inv_sqrt_pi / q * (s * pu - co * qu), -inv_sqrt_pi * q * (co * pv + s * qv)};
}

}  // namespace detail

/// Ai(x) and Ai'(x), absolute error below 1e-10 for all real x.
inline AiryValue airy(double x) {
  if (!std::isfinite(x)) throw DomainError("airy: non-finite argument");
  if (x > 6.0) return detail::airy_positive(x);
  if (x < -8.0) return detail::airy_negative(x);
  return detail::airy_series(x);
}

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// m-point Gauss-Legendre rule on [-1, 1], nodes ascending.
inline QuadratureRule gauss_legendre(unsigned m) {
  if (m < 1) throw DomainError("gauss_legendre needs m >= 1");
  const auto zeros = boost::math::legendre_p_zeros<double>(static_cast<int>(m));
  QuadratureRule q;
  auto add = [&](double x) {
    const double dp = boost::math::legendre_p_prime<double>(static_cast<int>(m), x);
    q.nodes.push_back(x);
    q.weights.push_back(2.0 / ((1.0 - x * x) * dp * dp));
  };
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    if (*it != 0.0) add(-*it);
  }
  for (double x : zeros) add(x);
  return q;
}

}  // namespace kpz
