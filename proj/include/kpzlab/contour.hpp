#pragma once

// Quadrature contours in the complex plane.  Weights include the
// parametrisation derivative, so sum_k w_k f(z_k) approximates the
// oriented integral of f(z) dz.

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "kpzlab/errors.hpp"
#include "kpzlab/special.hpp"

namespace kpz {

struct Contour {
  enum class Kind { circle, vertical, rays };

  Kind kind = Kind::circle;
  cplx center = 0.0;        // circle centre, or base point of rays
  double radius = 0.0;      // circle radius
  double re = 0.0;          // abscissa of a vertical line
  double half_height = 0.0; // vertical: integration over [-half_height, half_height]
  double angle = 0.0;       // rays leave the base at +-angle
  double length = 0.0;      // ray length
  std::vector<cplx> nodes;
  std::vector<cplx> weights;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  cplx integrate(F&& f) const {
    cplx s = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) s += weights[k] * f(nodes[k]);
    return s;
  }
};

/// Positively oriented circle, m-point trapezoid rule.
inline Contour circle_contour(cplx center, double radius, std::size_t m) {
  if (!(radius > 0.0) || m < 3) throw DomainError("circle contour needs radius > 0 and m >= 3");
  Contour c;
  c.kind = Contour::Kind::circle;
  c.center = center;
  c.radius = radius;
  const double dtheta = 2.0 * kPi / static_cast<double>(m);
  for (std::size_t k = 0; k < m; ++k) {
    const cplx e = std::polar(1.0, dtheta * static_cast<double>(k));
    c.nodes.push_back(center + radius * e);
    c.weights.push_back(cplx(0.0, 1.0) * radius * e * dtheta);
  }
  return c;
}

/// Upward line re + i y, |y| <= half_height, trapezoid rule with step
/// close to `step` (an odd number of nodes, symmetric about y = 0).
inline Contour vertical_contour(double re, double half_height, double step) {
  if (!(half_height > 0.0) || !(step > 0.0)) throw DomainError("vertical contour needs positive extent and step");
  Contour c;
  c.kind = Contour::Kind::vertical;
  c.re = re;
  c.half_height = half_height;
  const auto half = static_cast<std::size_t>(std::ceil(half_height / step));
  const double h = half_height / static_cast<double>(half);
  for (std::size_t k = 0; k <= 2 * half; ++k) {
    const double y = (static_cast<double>(k) - static_cast<double>(half)) * h;
    c.nodes.emplace_back(re, y);
    const double edge = (k == 0 || k == 2 * half) ? 0.5 : 1.0;
    c.weights.emplace_back(0.0, h * edge);
  }
  return c;
}

/// Two rays from `base` at angles -angle and +angle, each of the given
/// length, oriented with increasing imaginary part (in along the lower
/// ray, out along the upper one).  Each ray is split into panels at the
/// `breaks` (distances from the base, ascending, inside (0, length)) and
/// every panel gets an m-point Gauss-Legendre rule.
inline Contour ray_contour(cplx base, double angle, double length, std::size_t m,
                           std::span<const double> breaks = {}) {
  if (!(length > 0.0) || m < 1) throw DomainError("ray contour needs length > 0 and m >= 1");
  Contour c;
  c.kind = Contour::Kind::rays;
  c.center = base;
  c.angle = angle;
  c.length = length;
  std::vector<double> edges{0.0};
  for (double b : breaks) {
    if (b > edges.back() && b < length) edges.push_back(b);
  }
  edges.push_back(length);
  const auto rule = gauss_legendre(static_cast<unsigned>(m));
  const cplx down = std::polar(1.0, -angle);
  const cplx up = std::polar(1.0, angle);
  // Lower ray traversed from the far end towards the base.
  for (std::size_t p = edges.size() - 1; p-- > 0;) {
    const double a = edges[p], b = edges[p + 1];
    for (std::size_t k = rule.nodes.size(); k-- > 0;) {
      const double rho = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[k];
      c.nodes.push_back(base + rho * down);
      c.weights.push_back(-down * 0.5 * (b - a) * rule.weights[k]);
    }
  }
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double rho = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[k];
      c.nodes.push_back(base + rho * up);
      c.weights.push_back(up * 0.5 * (b - a) * rule.weights[k]);
    }
  }
  return c;
}

}  // namespace kpz
