#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nlwave/errors.hpp"

namespace nlwave {

enum class Sign { defocusing, focusing, disabled };

inline std::string_view to_string(Sign s) {
  switch (s) {
    case Sign::defocusing: return "defocusing";
    case Sign::focusing: return "focusing";
    case Sign::disabled: return "disabled";
  }
  return "?";
}

inline Sign sign_from_string(std::string_view s) {
  if (s == "defocusing") return Sign::defocusing;
  if (s == "focusing") return Sign::focusing;
  if (s == "disabled") return Sign::disabled;
  throw ValidationError("nl.sign: unknown value '" + std::string(s) + "'");
}

/// The power nonlinearity of u_tt - u_xx = -s |u|^{p-1} u.
///   defocusing: s = +1, focusing: s = -1, disabled: s = 0.
struct Nonlinearity {
  double p = 3.0;
  Sign sign = Sign::defocusing;

  double s() const {
    switch (sign) {
      case Sign::defocusing: return 1.0;
      case Sign::focusing: return -1.0;
      case Sign::disabled: return 0.0;
    }
    return 0.0;
  }

  /// |u|^{p-1} u, with exact fast paths for the common odd exponents.
  double power_term(double u) const {
    if (p == 3.0) return u * u * u;
    if (p == 5.0) {
      const double u2 = u * u;
      return u2 * u2 * u;
    }
    return std::pow(std::fabs(u), p - 1.0) * u;
  }

  /// |u|^{p+1}
  double abs_pow_p1(double u) const {
    if (p == 3.0) {
      const double u2 = u * u;
      return u2 * u2;
    }
    return std::pow(std::fabs(u), p + 1.0);
  }

  /// Right-hand side of u_tt - u_xx = forcing(u).
  double forcing(double u) const { return -s() * power_term(u); }

  /// Potential density |u|^{p+1}/(p+1); zero when the nonlinearity is off.
  double potential(double u) const {
    if (sign == Sign::disabled) return 0.0;
    return abs_pow_p1(u) / (p + 1.0);
  }

  void validate() const {
    if (!(p > 1.0) || !std::isfinite(p)) throw ValidationError("p must exceed 1");
  }

  bool operator==(const Nonlinearity&) const = default;
};

/// Uniform grid x_j = x_min + j dx on [x_min, x_max], time step dt = cfl dx.
struct GridSpec {
  double x_min = -1.0;
  double x_max = 1.0;
  std::size_t n_cells = 2;
  double cfl = 1.0;

  static GridSpec uniform(double x_min, double x_max, std::size_t n_cells, double cfl = 1.0) {
    GridSpec g{x_min, x_max, n_cells, cfl};
    g.validate();
    return g;
  }

  /// Grid whose spacing is the closest to `dx` that divides [x_min, x_max].
  static GridSpec with_spacing(double x_min, double x_max, double dx, double cfl = 1.0) {
    if (!(dx > 0.0)) throw ValidationError("dx must be positive");
    const double cells = std::round((x_max - x_min) / dx);
    if (!(cells >= 2.0)) throw ValidationError("n_cells must be at least 2");
    return uniform(x_min, x_max, static_cast<std::size_t>(cells), cfl);
  }

  void validate() const {
    if (n_cells < 2) throw ValidationError("n_cells must be at least 2");
    if (!(x_max > x_min)) throw ValidationError("x_max must exceed x_min");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ValidationError("cfl in (0,1]");
  }

  std::size_t n_nodes() const { return n_cells + 1; }
  double dx() const { return (x_max - x_min) / static_cast<double>(n_cells); }
  double dt() const { return cfl * dx(); }

  /// Node position, computed from the nearer endpoint so that a symmetric
  /// domain yields exactly mirrored nodes.
  double x(std::size_t j) const {
    if (2 * j <= n_cells) return x_min + static_cast<double>(j) * dx();
    return x_max - static_cast<double>(n_cells - j) * dx();
  }

  double time(std::size_t step) const { return static_cast<double>(step) * dt(); }

  /// First step index whose grid time is >= t (up to rounding).
  std::size_t step_at_or_after(double t) const {
    if (t <= 0.0) return 0;
    const double r = t / dt();
    const double n = std::ceil(r - 1e-9 * std::max(1.0, r));
    return static_cast<std::size_t>(n);
  }

  std::vector<double> nodes() const {
    std::vector<double> xs(n_nodes());
    for (std::size_t j = 0; j < xs.size(); ++j) xs[j] = x(j);
    return xs;
  }

  bool operator==(const GridSpec&) const = default;
};

/// One time slice: u and v (an approximation of u_t) at every node.
struct FieldState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;

  static FieldState zeros(const GridSpec& g, double t = 0.0) {
    return FieldState{t, std::vector<double>(g.n_nodes(), 0.0),
                      std::vector<double>(g.n_nodes(), 0.0)};
  }

  void validate(const GridSpec& g) const {
    if (u.size() != g.n_nodes() || v.size() != g.n_nodes())
      throw InvalidParams("field state size does not match the grid");
  }

  bool all_finite() const {
    for (double a : u)
      if (!std::isfinite(a)) return false;
    for (double a : v)
      if (!std::isfinite(a)) return false;
    return true;
  }
};

}  // namespace nlwave
