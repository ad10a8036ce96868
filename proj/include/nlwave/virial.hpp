#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "nlwave/energy.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/quadrature.hpp"
#include "nlwave/trajectory.hpp"

namespace nlwave {

/// I(s) = int a(y) u_y u_s dy with a = clamp(y, -R, R) on every stored level,
/// the centered difference of I against
///   I'(s) = -int_{-R}^{R} [u_s^2/2 + u_y^2/2 + sigma |u|^{p+1}/(p+1)] dy,
/// sigma = -s (so +1 for the focusing sign), and the bound
/// |I| <= (R/2) ||(u, u_s)||^2 in Hdot^1 x L^2.
struct VirialReport {
  double R = 0.0;
  std::vector<double> s_values;
  std::vector<double> I_values;
  std::vector<double> bound_values;
  // at interior levels only (index i refers to s_values[i + 1])
  std::vector<double> dI_values;
  std::vector<double> rhs_values;
  std::vector<double> lhs_rhs_residuals;

  double max_residual() const {
    double m = 0.0;
    for (double r : lhs_rhs_residuals) m = std::max(m, std::fabs(r));
    return m;
  }
};

inline VirialReport virial_check(const Trajectory& tr, double R) {
  if (!(R > 0.0)) throw InvalidParams("virial radius must be positive");
  if (!tr.covers_grid()) throw InvalidParams("virial_check needs a trajectory stored on the whole grid");
  const GridSpec& g = tr.grid();
  const Nonlinearity& nl = tr.nonlinearity();
  const double sigma = -nl.s();
  const std::size_t N = g.n_nodes();
  const std::size_t L = tr.last_step();
  const auto xs = g.nodes();

  VirialReport rep;
  rep.R = R;
  std::vector<double> rhs_all(L + 1);
  std::vector<double> f(N), h(N), e(N);
  for (std::size_t n = 0; n <= L; ++n) {
    for (std::size_t j = 0; j < N; ++j) {
      const PointSample s = tr.sample(n, j);
      const double a = std::clamp(xs[j], -R, R);
      f[j] = a * s.u_x * s.u_t;
      e[j] = s.u_x * s.u_x + s.u_t * s.u_t;
      h[j] = 0.5 * s.u_t * s.u_t + 0.5 * s.u_x * s.u_x + sigma * nl.potential(s.u);
    }
    rep.s_values.push_back(tr.t(n));
    rep.I_values.push_back(integrate_all(g, f));
    rep.bound_values.push_back(0.5 * R * integrate_all(g, e));
    rhs_all[n] = -integrate_nodal(g, h, -R, R);
  }
  const double inv = 1.0 / (2.0 * g.dt());
  for (std::size_t n = 1; n + 1 <= L; ++n) {
    const double dI = (rep.I_values[n + 1] - rep.I_values[n - 1]) * inv;
    rep.dI_values.push_back(dI);
    rep.rhs_values.push_back(rhs_all[n]);
    rep.lhs_rhs_residuals.push_back(dI - rhs_all[n]);
  }
  return rep;
}

/// Running value of int_0^t int_{|x| <= s+1} ((s+1)^2 - x^2) |u|^{p+1} / (s+1)^3 dx ds,
/// trapezoid in time over the levels fed to add().
class MorawetzAccumulator {
 public:
  MorawetzAccumulator(const GridSpec& grid, const Nonlinearity& nl) : grid_(grid), nl_(nl), xs_(grid.nodes()) {}

  void add(double t, std::span<const double> u) {
    const double T = t + 1.0;
    const double T2 = T * T;
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double w = T2 - xs_[j] * xs_[j];
      if (w > 0.0 && u[j] != 0.0) s += w * nl_.abs_pow_p1(u[j]);
    }
    // interior weight dx; the cone boundary weight vanishes, so endpoint
    // corrections of the trapezoid rule are zero unless the cone leaves the grid
    const double inner = s * grid_.dx() / (T2 * T);
    if (count_ > 0) value_ += 0.5 * (t - last_t_) * (inner + last_inner_);
    last_t_ = t;
    last_inner_ = inner;
    ++count_;
  }

  double value() const { return value_; }
  double last_time() const { return last_t_; }

 private:
  GridSpec grid_;
  Nonlinearity nl_;
  std::vector<double> xs_;
  double value_ = 0.0;
  double last_t_ = 0.0;
  double last_inner_ = 0.0;
  std::size_t count_ = 0;
};

/// Accumulator value at the last level at or before t_max.
inline double morawetz_accumulator(const Trajectory& tr, double t_max) {
  MorawetzAccumulator acc(tr.grid(), tr.nonlinearity());
  for (std::size_t n = 0; n <= tr.last_step() && tr.t(n) <= t_max + 1e-12; ++n) acc.add(tr.t(n), tr.state(n).u);
  return acc.value();
}

}  // namespace nlwave
