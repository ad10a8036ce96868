#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/grid.hpp"
#include "nlwave/initial_data.hpp"
#include "nlwave/leapfrog.hpp"

namespace nlwave {

inline constexpr double kFixedPointTolerance = 1e-12;
inline constexpr std::size_t kFixedPointIterationCap = 200;

struct OracleOptions {
  double tol = kFixedPointTolerance;
  std::size_t max_iterations = kFixedPointIterationCap;
};

/// Space-time samples u(x_j, t_m) on the oracle lattice t_m = m k, k = T / n_levels.
struct SpaceTimeField {
  double k = 0.0;
  std::vector<std::vector<double>> levels;  // levels[m][j]
};

struct OracleResult {
  FieldState state;  // slice at T, with v = u_t from the differentiated formula
  SpaceTimeField field;
  std::size_t iterations = 0;
  double last_increment = 0.0;
  double contraction_constant = 0.0;  // p T^2 A^{p-1}
};

namespace detail {

/// Exact integral of the piecewise-linear interpolant of nodal values over
/// [ra, rb] measured in node-index units, via cumulative cell sums.
class LinearIntegrator {
 public:
  LinearIntegrator(const std::vector<double>& f, double dx) : f_(f), dx_(dx), cum_(f.size(), 0.0) {
    for (std::size_t i = 0; i + 1 < f.size(); ++i) cum_[i + 1] = cum_[i] + 0.5 * (f[i] + f[i + 1]) * dx;
  }
  double operator()(double ra, double rb) const { return at(rb) - at(ra); }
  double value(double r) const {
    const auto [i, w] = split(r);
    if (i + 1 >= f_.size()) return f_.back();
    return f_[i] + w * (f_[i + 1] - f_[i]);
  }

 private:
  std::pair<std::size_t, double> split(double r) const {
    const double last = static_cast<double>(f_.size() - 1);
    r = std::clamp(r, 0.0, last);
    const auto i = std::min(static_cast<std::size_t>(r), f_.size() - 1);
    return {i, r - static_cast<double>(i)};
  }
  double at(double r) const {
    const auto [i, w] = split(r);
    if (i + 1 >= f_.size()) return cum_.back();
    return cum_[i] + dx_ * w * (f_[i] + 0.5 * w * (f_[i + 1] - f_[i]));
  }

  const std::vector<double>& f_;
  double dx_;
  std::vector<double> cum_;
};

struct LinearPart {
  std::vector<std::vector<double>> u;  // free evolution on every level
  std::vector<double> u_t_final;
  double sup_sum = 0.0;  // sup |u0(x-t) + u0(x+t) + int_{x-t}^{x+t} u1|
};

inline LinearPart linear_part(const InitialData& init, const GridSpec& grid, double k,
                              std::size_t n_levels) {
  const std::size_t N = grid.n_nodes();
  const double dx = grid.dx();
  LinearPart out;
  out.u.assign(n_levels + 1, std::vector<double>(N, 0.0));
  out.u_t_final.assign(N, 0.0);
  const bool closed_form = init.u1_antiderivative(grid.x(0)).has_value();
  std::vector<double> u1{0.0};
  if (!closed_form) u1 = init.sample_u1(grid);
  const LinearIntegrator U1(u1, dx);
  for (std::size_t m = 0; m <= n_levels; ++m) {
    const double t = static_cast<double>(m) * k;
    for (std::size_t j = 0; j < N; ++j) {
      const double x = grid.x(j);
      double drift;
      if (closed_form) {
        drift = *init.u1_antiderivative(x + t) - *init.u1_antiderivative(x - t);
      } else {
        const double r = (x - grid.x_min) / dx;
        drift = U1(r - t / dx, r + t / dx);
      }
      const double sum = init.u0(x - t) + init.u0(x + t) + drift;
      out.sup_sum = std::max(out.sup_sum, std::fabs(sum));
      out.u[m][j] = 0.5 * sum;
      if (m == n_levels)
        out.u_t_final[j] = 0.5 * (init.du0(x + t) - init.du0(x - t)) + 0.5 * (init.u1(x + t) + init.u1(x - t));
    }
  }
  return out;
}

}  // namespace detail

/// One application of the map
///   (T u)(x, t) = free(x, t) - 1/2 int_0^t int_{x-(t-s)}^{x+(t-s)} F(u(y, s)) dy ds
/// on the lattice, F(u) = s |u|^{p-1} u. The time integral is a trapezoid
/// over levels; each space integral is exact for the linear interpolant.
inline SpaceTimeField apply_dalembert_map(const std::vector<std::vector<double>>& free_levels,
                                          const SpaceTimeField& u, const GridSpec& grid,
                                          const Nonlinearity& nl) {
  const std::size_t L = u.levels.size();
  const std::size_t N = grid.n_nodes();
  const double dx = grid.dx();
  const double k = u.k;
  SpaceTimeField out{k, free_levels};
  if (nl.sign == Sign::disabled) return out;

  std::vector<std::vector<double>> F(L, std::vector<double>(N));
  std::vector<detail::LinearIntegrator> integrators;
  integrators.reserve(L);
  for (std::size_t m = 0; m < L; ++m) {
    for (std::size_t j = 0; j < N; ++j) F[m][j] = nl.s() * nl.power_term(u.levels[m][j]);
    integrators.emplace_back(F[m], dx);
  }
  for (std::size_t n = 1; n < L; ++n) {
    for (std::size_t j = 0; j < N; ++j) {
      const double r = static_cast<double>(j);
      double acc = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        const double half = static_cast<double>(n - m) * k / dx;
        const double w = (m == 0) ? 0.5 * k : k;  // level n contributes an empty interval
        acc += w * integrators[m](r - half, r + half);
      }
      out.levels[n][j] -= 0.5 * acc;
    }
  }
  return out;
}

/// Picard iteration of the d'Alembert map started from u = 0, on the grid's
/// nodes and n = ceil(T/dx) equal time levels.
inline OracleResult dalembert_oracle_run(const InitialData& init, const GridSpec& grid,
                                         const Nonlinearity& nl, double T, OracleOptions opts = {}) {
  if (!(T >= 0.0)) throw InvalidParams("T must be nonnegative");
  grid.validate();
  nl.validate();
  check_domain(init, grid, T);
  const double dx = grid.dx();
  const std::size_t n_levels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(T / dx - 1e-9)));
  const double k = T / static_cast<double>(n_levels);
  const std::size_t N = grid.n_nodes();

  const detail::LinearPart lin = detail::linear_part(init, grid, k, n_levels);
  OracleResult res;
  res.contraction_constant = nl.p * T * T * std::pow(lin.sup_sum, nl.p - 1.0);
  if (nl.sign != Sign::disabled && res.contraction_constant > 0.5)
    throw NoContraction("p T^2 A^{p-1} = " + std::to_string(res.contraction_constant) +
                        " exceeds 1/2; reduce T or the data amplitude");

  SpaceTimeField u{k, std::vector<std::vector<double>>(n_levels + 1, std::vector<double>(N, 0.0))};
  for (;;) {
    SpaceTimeField next = apply_dalembert_map(lin.u, u, grid, nl);
    ++res.iterations;
    double diff = 0.0;
    for (std::size_t m = 0; m <= n_levels; ++m)
      for (std::size_t j = 0; j < N; ++j) diff = std::max(diff, std::fabs(next.levels[m][j] - u.levels[m][j]));
    u = std::move(next);
    res.last_increment = diff;
    if (nl.sign == Sign::disabled || diff < opts.tol) break;
    if (res.iterations >= opts.max_iterations)
      throw NonConvergence("Picard iteration did not reach " + std::to_string(opts.tol) + " in " +
                           std::to_string(opts.max_iterations) + " iterations (last increment " +
                           std::to_string(diff) + ")");
  }

  // u_t(x, T) = free_t - 1/2 int_0^T [F(x + (T-s), s) + F(x - (T-s), s)] ds
  std::vector<double> ut = lin.u_t_final;
  if (nl.sign != Sign::disabled) {
    std::vector<std::vector<double>> F(n_levels + 1, std::vector<double>(N));
    std::vector<detail::LinearIntegrator> integrators;
    integrators.reserve(n_levels + 1);
    for (std::size_t m = 0; m <= n_levels; ++m) {
      for (std::size_t j = 0; j < N; ++j) F[m][j] = nl.s() * nl.power_term(u.levels[m][j]);
      integrators.emplace_back(F[m], dx);
    }
    for (std::size_t j = 0; j < N; ++j) {
      double acc = 0.0;
      for (std::size_t m = 0; m <= n_levels; ++m) {
        const detail::LinearIntegrator& I = integrators[m];
        const double half = static_cast<double>(n_levels - m) * k / dx;
        const double w = (m == 0 || m == n_levels) ? 0.5 * k : k;
        const double r = static_cast<double>(j);
        const double lo = r - half, hi = r + half;
        const double last = static_cast<double>(N - 1);
        const double fl = lo < 0.0 ? 0.0 : I.value(lo);
        const double fh = hi > last ? 0.0 : I.value(hi);
        acc += w * (fl + fh);
      }
      ut[j] -= 0.5 * acc;
    }
  }
  res.state = FieldState{T, u.levels.back(), ut};
  res.field = std::move(u);
  return res;
}

inline FieldState dalembert_oracle(const InitialData& init, const GridSpec& grid,
                                   const Nonlinearity& nl, double T, OracleOptions opts = {}) {
  return dalembert_oracle_run(init, grid, nl, T, opts).state;
}

/// Free part of the map on the oracle lattice of `field`; exposed so callers
/// can re-apply the map to a converged field.
inline std::vector<std::vector<double>> dalembert_free_levels(const InitialData& init,
                                                              const GridSpec& grid,
                                                              const SpaceTimeField& field) {
  return detail::linear_part(init, grid, field.k, field.levels.size() - 1).u;
}

}  // namespace nlwave
