#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "nlwave/grid.hpp"

namespace nlwave {

/// Linear interpolation of nodal values at x (clamped to the grid).
inline double interpolate_nodal(const GridSpec& g, std::span<const double> f, double x) {
  if (x <= g.x_min) return f.front();
  if (x >= g.x_max) return f.back();
  const double r = (x - g.x_min) / g.dx();
  const auto j = std::min(static_cast<std::size_t>(r), g.n_cells - 1);
  const double w = r - static_cast<double>(j);
  return (1.0 - w) * f[j] + w * f[j + 1];
}

/// Composite trapezoid integral of nodal values over [a, b] (clipped to the
/// grid), i.e. the exact integral of the piecewise-linear interpolant; the
/// endpoint values of partial cells are linearly interpolated.
inline double integrate_nodal(const GridSpec& g, std::span<const double> f, double a, double b) {
  a = std::max(a, g.x_min);
  b = std::min(b, g.x_max);
  if (!(b > a)) return 0.0;
  const double dx = g.dx();
  // Snap endpoints lying within rounding of a node.
  auto locate = [&](double x) {
    const double r = (x - g.x_min) / dx;
    const double rn = std::round(r);
    return std::fabs(r - rn) < 1e-9 ? rn : r;
  };
  const double ra = locate(a);
  const double rb = locate(b);
  const auto ja = static_cast<std::size_t>(std::ceil(ra));  // first node >= a
  const auto jb = static_cast<std::size_t>(std::floor(rb));  // last node <= b
  if (ja > jb) {
    // a and b inside the same cell
    return 0.5 * (interpolate_nodal(g, f, a) + interpolate_nodal(g, f, b)) * (b - a);
  }
  double s = 0.0;
  for (std::size_t j = ja; j < jb; ++j) s += 0.5 * (f[j] + f[j + 1]);
  s *= dx;
  const double fa = interpolate_nodal(g, f, a);
  const double fb = interpolate_nodal(g, f, b);
  s += 0.5 * (fa + f[ja]) * (static_cast<double>(ja) - ra) * dx;
  s += 0.5 * (f[jb] + fb) * (rb - static_cast<double>(jb)) * dx;
  return s;
}

/// Composite trapezoid over all nodes.
inline double integrate_all(const GridSpec& g, std::span<const double> f) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t j = 1; j + 1 < f.size(); ++j) s += f[j];
  return s * g.dx();
}

/// Trapezoid rule for samples at uniform spacing h.
inline double trapezoid_uniform(std::span<const double> f, double h) {
  if (f.size() < 2) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * h;
}

}  // namespace nlwave
