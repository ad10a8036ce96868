#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlwave/energy.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/grid.hpp"
#include "nlwave/initial_data.hpp"
#include "nlwave/leapfrog.hpp"

namespace nlwave {

/// Point samples of the solution and its first derivatives.
struct PointSample {
  double u = 0.0;
  double u_x = 0.0;
  double u_t = 0.0;
};

/// Every time level of a run, restricted to a window of nodes. Levels -1 and
/// n_last + 1 are kept as well so that u_t is the same centered difference
/// the solver uses for v at every stored level 0..n_last.
class Trajectory {
 public:
  Trajectory(GridSpec grid, Nonlinearity nl, std::size_t first_stored, std::size_t last_stored)
      : grid_(grid), nl_(nl), first_(first_stored), last_(last_stored) {}

  const GridSpec& grid() const { return grid_; }
  const Nonlinearity& nonlinearity() const { return nl_; }

  /// Last level with a valid velocity.
  std::size_t last_step() const { return levels_ - 3; }
  double t(std::size_t n) const { return grid_.time(n); }
  double t_end() const { return t(last_step()); }

  /// Nodes whose u_x is available: the grid ends are always usable, interior
  /// stored edges only serve as stencil padding.
  std::size_t first_node() const { return first_ == 0 ? 0 : first_ + 1; }
  std::size_t last_node() const { return last_ + 1 == grid_.n_nodes() ? last_ : last_ - 1; }
  double x_lo() const { return grid_.x(first_node()); }
  double x_hi() const { return grid_.x(last_node()); }
  bool covers_grid() const { return first_ == 0 && last_ + 1 == grid_.n_nodes(); }

  double u(std::size_t n, std::size_t j) const { return raw(static_cast<long>(n), j); }

  double u_x(std::size_t n, std::size_t j) const {
    const double inv2h = 1.0 / (2.0 * grid_.dx());
    const long L = static_cast<long>(n);
    if (j == 0) return (-3.0 * raw(L, 0) + 4.0 * raw(L, 1) - raw(L, 2)) * inv2h;
    if (j + 1 == grid_.n_nodes())
      return (3.0 * raw(L, j) - 4.0 * raw(L, j - 1) + raw(L, j - 2)) * inv2h;
    return (raw(L, j + 1) - raw(L, j - 1)) * inv2h;
  }

  double u_t(std::size_t n, std::size_t j) const {
    const long L = static_cast<long>(n);
    const double inv = 1.0 / (2.0 * grid_.dt());  // same rounding as LeapfrogSolver::velocity
    return (raw(L + 1, j) - raw(L - 1, j)) * inv;
  }

  PointSample sample(std::size_t n, std::size_t j) const { return {u(n, j), u_x(n, j), u_t(n, j)}; }

  /// Full-grid state at level n; nodes outside the stored window read as 0.
  FieldState state(std::size_t n) const {
    FieldState s = FieldState::zeros(grid_, t(n));
    for (std::size_t j = first_; j <= last_; ++j) {
      s.u[j] = u(n, j);
      s.v[j] = u_t(n, j);
    }
    return s;
  }

  /// Densities at level n on the full grid; zero outside the usable window.
  EnergyDensities densities(std::size_t n) const {
    const std::size_t N = grid_.n_nodes();
    std::vector<double> uu(N, 0.0), ux(N, 0.0), ut(N, 0.0);
    for (std::size_t j = first_node(); j <= last_node(); ++j) {
      uu[j] = u(n, j);
      ux[j] = u_x(n, j);
      ut[j] = u_t(n, j);
    }
    return densities_from(t(n), uu, ux, ut, nl_);
  }

  /// Level index closest to time t; throws OutOfRange beyond the record.
  std::size_t step_near(double time) const {
    const double r = time / grid_.dt();
    const double n = std::round(r);
    if (n < 0.0 || n > static_cast<double>(last_step()))
      throw OutOfRange("time " + std::to_string(time) + " outside recorded trajectory");
    return static_cast<std::size_t>(n);
  }

  void push_level(std::span<const double> full) {
    data_.insert(data_.end(), full.begin() + static_cast<long>(first_),
                 full.begin() + static_cast<long>(last_) + 1);
    ++levels_;
  }

 private:
  std::size_t width() const { return last_ - first_ + 1; }
  double raw(long level, std::size_t j) const {
    // stored level index = level + 1
    const auto row = static_cast<std::size_t>(level + 1);
    return data_[row * width() + (j - first_)];
  }

  GridSpec grid_;
  Nonlinearity nl_;
  std::size_t first_, last_;
  std::size_t levels_ = 0;
  std::vector<double> data_;
};

inline constexpr double kMaxTrajectoryDoubles = 4e8;

/// Runs the solver to t_end keeping every level, optionally restricted to
/// the nodes of `window` (plus one node of stencil padding on each side).
inline Trajectory record_trajectory(const InitialData& init, const GridSpec& grid,
                                    const Nonlinearity& nl, double t_end,
                                    std::optional<Interval> window = std::nullopt,
                                    SolverOptions options = {}) {
  if (!(t_end >= 0.0)) throw InvalidParams("t_end must be nonnegative");
  grid.validate();
  if (options.enforce_domain) check_domain(init, grid, t_end);
  std::size_t first = 0, last = grid.n_cells;
  if (window) {
    const double dx = grid.dx();
    const double a = std::floor((window->lo - grid.x_min) / dx + 1e-9) - 1.0;
    const double b = std::ceil((window->hi - grid.x_min) / dx - 1e-9) + 1.0;
    first = static_cast<std::size_t>(std::clamp(a, 0.0, static_cast<double>(grid.n_cells)));
    last = static_cast<std::size_t>(std::clamp(b, 0.0, static_cast<double>(grid.n_cells)));
  }
  const std::size_t n_end = grid.step_at_or_after(t_end);
  const double doubles = static_cast<double>(n_end + 3) * static_cast<double>(last - first + 1);
  if (doubles > kMaxTrajectoryDoubles)
    throw InvalidParams("trajectory would need " + std::to_string(doubles) +
                        " samples; narrow the window or coarsen the grid");

  Trajectory traj(grid, nl, first, last);
  LeapfrogSolver solver(init, grid, nl, options);
  traj.push_level(solver.u_prev());
  traj.push_level(solver.u());
  traj.push_level(solver.u_next());
  while (solver.step() < n_end) {
    solver.advance();
    traj.push_level(solver.u_next());
  }
  return traj;
}

}  // namespace nlwave
