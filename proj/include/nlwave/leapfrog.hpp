#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/grid.hpp"
#include "nlwave/initial_data.hpp"

namespace nlwave {

inline constexpr double kDefaultBlowupGuard = 1e8;

/// u_x by central differences, one-sided second-order at both endpoints.
inline std::vector<double> space_derivative(std::span<const double> u, double dx) {
  const std::size_t n = u.size();
  std::vector<double> ux(n, 0.0);
  if (n < 3) return ux;
  const double inv2h = 1.0 / (2.0 * dx);
  for (std::size_t j = 1; j + 1 < n; ++j) ux[j] = (u[j + 1] - u[j - 1]) * inv2h;
  ux[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h;
  ux[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv2h;
  return ux;
}

struct Derivatives {
  std::vector<double> u_x;
  std::vector<double> u_t;
};

inline Derivatives sample_derivatives(const FieldState& state, const GridSpec& grid) {
  state.validate(grid);
  return Derivatives{space_derivative(state.u, grid.dx()), state.v};
}

/// Second-order Taylor start u^1 = u_0 + dt u_1 + dt^2/2 (u_0'' + F(u_0)),
/// with u_0'' the discrete Laplacian. Endpoints keep their initial values.
/// The returned velocity is the first-order Taylor value u_1 + dt u_tt(0).
inline FieldState first_step(const InitialData& init, const GridSpec& grid,
                             const Nonlinearity& nl) {
  grid.validate();
  nl.validate();
  const auto u0 = init.sample_u0(grid);
  const auto u1 = init.sample_u1(grid);
  const double dt = grid.dt();
  const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
  FieldState out{dt, u0, u1};
  for (std::size_t j = 1; j + 1 < u0.size(); ++j) {
    const double utt = (u0[j + 1] - 2.0 * u0[j] + u0[j - 1]) * inv_dx2 + nl.forcing(u0[j]);
    out.u[j] = u0[j] + dt * u1[j] + 0.5 * dt * dt * utt;
    out.v[j] = u1[j] + dt * utt;
  }
  return out;
}

struct SolverOptions {
  double blowup_guard = kDefaultBlowupGuard;
  /// Reject runs whose light cone would reach the boundary before t_end.
  bool enforce_domain = true;
};

/// Explicit leapfrog
///   u^{n+1} = 2u^n - u^{n-1} + cfl^2 (u^n_{j+1} - 2u^n_j + u^n_{j-1}) - dt^2 s |u^n|^{p-1} u^n
/// holding three levels (n-1, n, n+1); the look-ahead level is always
/// available so that v^n = (u^{n+1} - u^{n-1}) / (2 dt) can be formed.
///
/// Endpoint values are frozen at their initial samples (homogeneous
/// Dirichlet for compactly supported data). Nodes outside the growing
/// light cone of the data are never touched and stay exactly zero.
class LeapfrogSolver {
 public:
  LeapfrogSolver(const InitialData& init, const GridSpec& grid, const Nonlinearity& nl,
                 SolverOptions options = {})
      : grid_(grid), nl_(nl), options_(options) {
    grid_.validate();
    nl_.validate();
    const std::size_t n = grid_.n_nodes();
    curr_ = init.sample_u0(grid_);
    prev_.assign(n, 0.0);
    next_.assign(n, 0.0);

    lo_ = 1;
    hi_ = n - 2;
    if (auto sup = init.support()) {
      if (sup->empty()) {
        hi_ = 0;  // zero data: empty active range, every level stays zero
      } else {
        const double dx = grid_.dx();
        const double a = std::floor((sup->lo - grid_.x_min) / dx) - 2.0;
        const double b = std::ceil((sup->hi - grid_.x_min) / dx) + 2.0;
        lo_ = static_cast<std::size_t>(std::clamp(a, 1.0, static_cast<double>(n - 2)));
        hi_ = static_cast<std::size_t>(std::clamp(b, 1.0, static_cast<double>(n - 2)));
      }
    }

    const double dt = grid_.dt();
    const bool characteristic = init.u1_antiderivative(grid_.x(0)).has_value();
    if (characteristic) {
      // u(x, dt) from the exact linear solution plus the Taylor forcing term.
      for (std::size_t j = lo_; j <= hi_; ++j) {
        const double x = grid_.x(j);
        double linear;
        if (grid_.cfl == 1.0)
          linear = 0.5 * (curr_[j - 1] + curr_[j + 1]);
        else
          linear = 0.5 * (init.u0(x - dt) + init.u0(x + dt));
        const double drift = 0.5 * (*init.u1_antiderivative(x + dt) - *init.u1_antiderivative(x - dt));
        next_[j] = linear + drift + 0.5 * dt * dt * nl_.forcing(curr_[j]);
      }
    } else {
      const FieldState s1 = first_step(init, grid_, nl_);
      for (std::size_t j = 1; j + 1 < n; ++j) next_[j] = s1.u[j];
    }
    next_.front() = curr_.front();
    next_.back() = curr_.back();

    // Virtual level u^{-1} from the scheme itself, so that v^0 uses the same
    // centered formula as every later level.
    const double c2 = grid_.cfl * grid_.cfl;
    for (std::size_t j = lo_; j <= hi_; ++j) {
      prev_[j] = 2.0 * curr_[j] - next_[j] + c2 * ((curr_[j + 1] + curr_[j - 1]) - 2.0 * curr_[j]) +
                 dt * dt * nl_.forcing(curr_[j]);
    }
    prev_.front() = curr_.front();
    prev_.back() = curr_.back();
    check_level(next_, 1);
  }

  const GridSpec& grid() const { return grid_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  std::size_t step() const { return n_; }
  double time() const { return grid_.time(n_); }

  std::span<const double> u() const { return curr_; }
  std::span<const double> u_prev() const { return prev_; }
  std::span<const double> u_next() const { return next_; }

  /// Index range [first, last] outside of which every level is zero.
  std::pair<std::size_t, std::size_t> active_range() const { return {lo_, hi_}; }

  /// v^n = (u^{n+1} - u^{n-1}) / (2 dt)
  std::vector<double> velocity() const {
    std::vector<double> v(curr_.size(), 0.0);
    const double inv = 1.0 / (2.0 * grid_.dt());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = (next_[j] - prev_[j]) * inv;
    return v;
  }

  FieldState state() const { return FieldState{time(), curr_, velocity()}; }

  /// Moves to level n+1. Throws BlowUpDetected if the new look-ahead level
  /// is non-finite or exceeds the guard.
  void advance() {
    std::swap(prev_, curr_);
    std::swap(curr_, next_);
    ++n_;
    if (hi_ >= lo_) {
      lo_ = std::max<std::size_t>(lo_ - 1, 1);
      hi_ = std::min(hi_ + 1, curr_.size() - 2);
    }
    next_.front() = curr_.front();
    next_.back() = curr_.back();
    if (hi_ < lo_) return;

    const double c2 = grid_.cfl * grid_.cfl;
    const double dt2s = grid_.dt() * grid_.dt() * nl_.s();
    const double* um = prev_.data();
    const double* uc = curr_.data();
    double* up = next_.data();
    if (nl_.sign == Sign::disabled) {
      if (c2 == 1.0) {
        for (std::size_t j = lo_; j <= hi_; ++j) up[j] = uc[j + 1] + uc[j - 1] - um[j];
      } else {
        for (std::size_t j = lo_; j <= hi_; ++j)
          up[j] = 2.0 * uc[j] - um[j] + c2 * ((uc[j + 1] + uc[j - 1]) - 2.0 * uc[j]);
      }
    } else if (nl_.p == 3.0) {
      for (std::size_t j = lo_; j <= hi_; ++j) {
        const double u = uc[j];
        up[j] = 2.0 * u - um[j] + c2 * ((uc[j + 1] + uc[j - 1]) - 2.0 * u) - dt2s * (u * u * u);
      }
    } else {
      for (std::size_t j = lo_; j <= hi_; ++j) {
        const double u = uc[j];
        up[j] = 2.0 * u - um[j] + c2 * ((uc[j + 1] + uc[j - 1]) - 2.0 * u) - dt2s * nl_.power_term(u);
      }
    }
    check_level(next_, n_ + 1);
  }

 private:
  void check_level(const std::vector<double>& level, std::size_t step) const {
    if (hi_ < lo_) return;
    const double guard = options_.blowup_guard;
    bool ok = true;
    for (std::size_t j = lo_; j <= hi_; ++j) ok &= (std::fabs(level[j]) <= guard);
    if (!ok) {
      double m = 0.0;
      for (std::size_t j = lo_; j <= hi_; ++j)
        m = std::isfinite(level[j]) ? std::max(m, std::fabs(level[j])) : INFINITY;
      throw BlowUpDetected(grid_.time(step), step, m);
    }
  }

  GridSpec grid_;
  Nonlinearity nl_;
  SolverOptions options_;
  std::vector<double> prev_, curr_, next_;
  std::size_t lo_ = 1, hi_ = 0;
  std::size_t n_ = 0;
};

/// Requested sample times and the callback receiving the state at the first
/// grid time at or after each of them.
struct Observer {
  std::vector<double> times;
  std::function<void(const FieldState&)> on_sample;
};

/// Called with the solver after every level becomes current, including 0.
using StepHook = std::function<void(const LeapfrogSolver&)>;

struct EvolveResult {
  FieldState final_state;
  std::size_t steps = 0;
};

/// Throws DomainTooSmall if the light cone of the data (plus a two-cell
/// stencil margin) would reach either boundary before t_end.
inline void check_domain(const InitialData& init, const GridSpec& grid, double t_end) {
  const auto sup = init.support();
  if (!sup || sup->empty()) return;
  const double margin = 2.0 * grid.dx();
  if (sup->lo - t_end - margin < grid.x_min || sup->hi + t_end + margin > grid.x_max)
    throw DomainTooSmall("support [" + std::to_string(sup->lo) + ", " + std::to_string(sup->hi) +
                         "] plus light cone to t=" + std::to_string(t_end) +
                         " does not fit inside [" + std::to_string(grid.x_min) + ", " +
                         std::to_string(grid.x_max) + "]");
}

inline EvolveResult evolve(const InitialData& init, const GridSpec& grid, const Nonlinearity& nl,
                           double t_end, const std::vector<Observer>& observers = {},
                           const StepHook& on_step = {}, SolverOptions options = {}) {
  if (!(t_end >= 0.0)) throw InvalidParams("t_end must be nonnegative");
  grid.validate();
  nl.validate();
  if (options.enforce_domain) check_domain(init, grid, t_end);

  const std::size_t n_end = grid.step_at_or_after(t_end);
  // (step, observer index) pairs in step order
  std::vector<std::pair<std::size_t, std::size_t>> schedule;
  for (std::size_t k = 0; k < observers.size(); ++k)
    for (double t : observers[k].times)
      if (t <= t_end + 1e-12) schedule.emplace_back(grid.step_at_or_after(t), k);
  std::stable_sort(schedule.begin(), schedule.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  LeapfrogSolver solver(init, grid, nl, options);
  std::size_t next_sample = 0;
  for (;;) {
    if (on_step) on_step(solver);
    if (next_sample < schedule.size() && schedule[next_sample].first == solver.step()) {
      const FieldState s = solver.state();
      while (next_sample < schedule.size() && schedule[next_sample].first == solver.step()) {
        observers[schedule[next_sample].second].on_sample(s);
        ++next_sample;
      }
    }
    if (solver.step() >= n_end) break;
    solver.advance();
  }
  return EvolveResult{solver.state(), solver.step()};
}

}  // namespace nlwave
