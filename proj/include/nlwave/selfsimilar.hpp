#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/ode/dopri5.hpp"

namespace nlwave {

inline constexpr double kStepCapKappa = 0.1;

/// Profile ODE (1-y^2) f'' - 2(beta+1) y f' - beta(beta+1) f + |f|^{p-1} f = 0
/// with f(0) = a, f'(0) = b and beta = 2/(p-1).
struct OdeParams {
  double p = 3.0;
  double a = 1.0;
  double b = 0.0;
  double delta = 1e-4;
  double tol = 1e-12;

  double beta() const { return 2.0 / (p - 1.0); }
  void validate() const {
    if (!(p > 1.0)) throw InvalidParams("p must exceed 1");
    if (!(delta > 0.0 && delta <= 0.5)) throw InvalidParams("delta must lie in (0, 0.5]");
    if (!(tol > 0.0)) throw InvalidParams("tol must be positive");
    if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidParams("a and b must be finite");
  }
};

/// 1 - y^2 as (1-y)(1+y); the product form keeps full relative accuracy near |y| = 1.
inline double one_minus_sq(double y) { return (1.0 - y) * (1.0 + y); }

inline double signed_pow(double f, double p) {
  if (p == 3.0) return f * f * f;
  return std::copysign(std::pow(std::fabs(f), p), f);
}

/// f'' from the normal form.
inline double profile_second_derivative(const OdeParams& prm, double y, double f, double fp) {
  const double beta = prm.beta();
  return (2.0 * (beta + 1.0) * y * fp + beta * (beta + 1.0) * f - signed_pow(f, prm.p)) / one_minus_sq(y);
}

/// C_p = max_{z >= 0} [beta(beta+1) z^2/2 - z^{p+1}/((p+1)(p+2))]; the
/// stationarity condition z^{p-1} = (p+2) beta(beta+1) has a closed-form root.
inline double cp_constant(double p) {
  if (!(p > 1.0)) throw InvalidParams("p must exceed 1");
  const double beta = 2.0 / (p - 1.0);
  const double k = beta * (beta + 1.0);
  const double z = std::pow((p + 2.0) * k, 1.0 / (p - 1.0));
  return std::max(0.0, 0.5 * k * z * z - std::pow(z, p + 1.0) / ((p + 1.0) * (p + 2.0)));
}

/// P(z) = C_p - beta(beta+1) z^2/2 + |z|^{p+1}/(p+1)
inline double potential_P(double p, double cp, double z) {
  const double beta = 2.0 / (p - 1.0);
  return cp - 0.5 * beta * (beta + 1.0) * z * z + std::pow(std::fabs(z), p + 1.0) / (p + 1.0);
}

/// Sample abscissae: uniform with spacing 0.01 on |y| <= 0.9, then 40 per
/// decade in 1-|y| down to delta, mirrored to negative y.
inline std::vector<double> default_profile_samples(double delta) {
  std::vector<double> pos;
  for (int i = 0; i <= 90; ++i) pos.push_back(0.01 * i);
  const double lo = std::log10(delta);
  const int per_decade = 40;
  const int steps = static_cast<int>(std::ceil((-1.0 - lo) * per_decade));
  for (int i = 1; i <= steps; ++i) {
    const double e = -1.0 - (-1.0 - lo) * static_cast<double>(i) / static_cast<double>(steps);
    pos.push_back(1.0 - std::pow(10.0, e));
  }
  pos.back() = 1.0 - delta;
  std::vector<double> out;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it)
    if (*it > 0.0) out.push_back(-*it);
  out.insert(out.end(), pos.begin(), pos.end());
  return out;
}

class OdeSolution {
 public:
  OdeParams params;
  std::vector<double> y;
  std::vector<double> f;
  std::vector<double> fprime;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;

  double y_min() const { return -(1.0 - params.delta); }
  double y_max() const { return 1.0 - params.delta; }

  /// (f, f') at any y in the integrated range via the dense output.
  ode::Vec<2> eval(double yy) const {
    if (yy < y_min() - 1e-15 || yy > y_max() + 1e-15)
      throw OutOfRange("y=" + std::to_string(yy) + " outside the integrated range");
    const auto& segs = yy >= 0.0 ? right_ : left_;
    if (segs.empty()) return {params.a, params.b};
    // segments are ordered by distance from 0
    auto it = std::lower_bound(segs.begin(), segs.end(), std::fabs(yy),
                               [](const ode::DenseSegment<2>& s, double v) { return std::fabs(s.x0 + s.h) < v; });
    if (it == segs.end()) --it;
    return (*it)(yy);
  }

  void set_segments(std::vector<ode::DenseSegment<2>> left, std::vector<ode::DenseSegment<2>> right) {
    left_ = std::move(left);
    right_ = std::move(right);
  }

 private:
  std::vector<ode::DenseSegment<2>> left_, right_;
};

/// Integrates outward from y = 0 to +-(1 - delta); the step is capped by
/// kappa (1 - |y|) so no step reaches the singular endpoints.
inline OdeSolution integrate_profile(const OdeParams& prm, std::optional<std::vector<double>> samples = std::nullopt) {
  prm.validate();
  OdeSolution sol;
  sol.params = prm;
  sol.y = samples ? *samples : default_profile_samples(prm.delta);
  for (std::size_t i = 0; i < sol.y.size(); ++i) {
    if (i > 0 && !(sol.y[i] > sol.y[i - 1])) throw InvalidParams("y samples must be strictly increasing");
    if (std::fabs(sol.y[i]) > 1.0 - prm.delta + 1e-15) throw InvalidParams("y sample outside (-1+delta, 1-delta)");
  }

  auto rhs = [&prm](double yy, const ode::Vec<2>& s) -> ode::Vec<2> {
    return {s[1], profile_second_derivative(prm, yy, s[0], s[1])};
  };
  ode::Dopri5Options opt;
  opt.rtol = prm.tol;
  opt.atol = prm.tol;
  opt.h_initial = 1e-3;
  opt.h_cap = [](double yy) { return kStepCapKappa * (1.0 - std::fabs(yy)); };

  const double end = 1.0 - prm.delta;
  auto right = ode::dopri5<2>(rhs, 0.0, {prm.a, prm.b}, end, opt);
  auto left = ode::dopri5<2>(rhs, 0.0, {prm.a, prm.b}, -end, opt);
  sol.accepted_steps = right.accepted + left.accepted;
  sol.rejected_steps = right.rejected + left.rejected;
  sol.set_segments(std::move(left.segments), std::move(right.segments));

  for (double yy : sol.y) {
    const auto v = sol.eval(yy);
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
      throw ToleranceNotMet("profile became non-finite at y=" + std::to_string(yy));
    sol.f.push_back(v[0]);
    sol.fprime.push_back(v[1]);
  }
  return sol;
}

/// |(1-y^2) f'' - 2(beta+1) y f' - beta(beta+1) f + |f|^{p-1} f| with f''
/// from a centered difference of the dense f'.
inline double profile_residual(const OdeSolution& sol, double yy, double h) {
  const auto& prm = sol.params;
  const double beta = prm.beta();
  const auto c = sol.eval(yy);
  const double fpp = (sol.eval(yy + h)[1] - sol.eval(yy - h)[1]) / (2.0 * h);
  return std::fabs(one_minus_sq(yy) * fpp - 2.0 * (beta + 1.0) * yy * c[1] - beta * (beta + 1.0) * c[0] +
                   signed_pow(c[0], prm.p));
}

/// Etilde = (1/2)(1-y^2)^{2beta+2} f'^2 + (1-y^2)^{2beta+1} P(f)
inline double semi_energy_at(const OdeParams& prm, double cp, double yy, double f, double fp) {
  const double beta = prm.beta();
  const double w = one_minus_sq(yy);
  return 0.5 * std::pow(w, 2.0 * beta + 2.0) * fp * fp + std::pow(w, 2.0 * beta + 1.0) * potential_P(prm.p, cp, f);
}

/// Etilde' = -2(2beta+1) y (1-y^2)^{2beta} P(f)
inline double semi_energy_rate(const OdeParams& prm, double cp, double yy, double f) {
  const double beta = prm.beta();
  return -2.0 * (2.0 * beta + 1.0) * yy * std::pow(one_minus_sq(yy), 2.0 * beta) * potential_P(prm.p, cp, f);
}

struct SemiEnergyReport {
  double C_p = 0.0;
  std::vector<double> y;
  std::vector<double> Etilde_samples;
  std::vector<double> dE_numeric;  // 6th-order centered difference of Etilde
  std::vector<double> dE_closed;   // closed-form rate
  double A_estimate = 0.0;         // Etilde at y = 1 - delta
  std::vector<double> asymptotic_trace;  // (1-y)^{1+beta} f'(y)

  /// max |numeric - closed| / |closed| over samples where the closed-form
  /// rate is nonzero (it vanishes identically at y = 0).
  double max_rate_mismatch() const {
    double m = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (dE_closed[i] == 0.0) continue;
      m = std::max(m, std::fabs(dE_numeric[i] - dE_closed[i]) / std::fabs(dE_closed[i]));
    }
    return m;
  }
};

namespace detail {

/// 6th-order centered difference of Etilde with step h along the ODE
/// trajectory through the dense-output state at y0. The trajectory is advanced
/// by classical RK4 (16 substeps per h) and Etilde is formed in extended
/// precision: near the endpoints Etilde' is a tiny remainder of large
/// cancelling terms, so differencing the dense interpolant or double-rounded
/// values would mostly measure interpolation defects and rounding.
inline double semi_energy_derivative_fd(const OdeSolution& sol, double cp, double y0, double h) {
  using R = long double;
  const auto& prm = sol.params;
  const R p = prm.p;
  const R beta = 2.0L / (p - 1.0L);
  const R k = beta * (beta + 1.0L);
  auto w_of = [](R y) { return (1.0L - y) * (1.0L + y); };
  auto spow = [p](R f) { return std::copysign(std::pow(std::fabs(f), p), f); };
  auto rhs = [&](R y, const std::array<R, 2>& s) -> std::array<R, 2> {
    return {s[1], (2.0L * (beta + 1.0L) * y * s[1] + k * s[0] - spow(s[0])) / w_of(y)};
  };
  auto energy = [&](R y, const std::array<R, 2>& s) {
    const R w = w_of(y);
    const R P = R(cp) - 0.5L * k * s[0] * s[0] + std::pow(std::fabs(s[0]), p + 1.0L) / (p + 1.0L);
    return 0.5L * std::pow(w, 2.0L * beta + 2.0L) * s[1] * s[1] + std::pow(w, 2.0L * beta + 1.0L) * P;
  };
  constexpr int kSub = 16;
  const ode::Vec<2> v = sol.eval(y0);
  const std::array<R, 2> start{v[0], v[1]};
  std::array<R, 7> e{};
  e[3] = energy(y0, start);
  for (int dir : {1, -1}) {
    const R hs = R(dir) * R(h) / kSub;
    std::array<R, 2> s = start;
    for (int m = 0; m < 3 * kSub; ++m) {
      const R yy = R(y0) + hs * m;
      const auto k1 = rhs(yy, s);
      const auto k2 = rhs(yy + 0.5L * hs, {s[0] + 0.5L * hs * k1[0], s[1] + 0.5L * hs * k1[1]});
      const auto k3 = rhs(yy + 0.5L * hs, {s[0] + 0.5L * hs * k2[0], s[1] + 0.5L * hs * k2[1]});
      const auto k4 = rhs(yy + hs, {s[0] + hs * k3[0], s[1] + hs * k3[1]});
      for (int c = 0; c < 2; ++c) s[c] += hs / 6.0L * (k1[c] + 2.0L * k2[c] + 2.0L * k3[c] + k4[c]);
      if ((m + 1) % kSub == 0) e[3 + dir * (m + 1) / kSub] = energy(R(y0) + hs * (m + 1), s);
    }
  }
  const R d = (-e[0] + 9.0L * e[1] - 45.0L * e[2] + 45.0L * e[4] - 9.0L * e[5] + e[6]) / (60.0L * R(h));
  return static_cast<double>(d);
}

}  // namespace detail

inline SemiEnergyReport semi_energy(const OdeSolution& sol) {
  const auto& prm = sol.params;
  SemiEnergyReport rep;
  rep.C_p = cp_constant(prm.p);
  rep.y = sol.y;
  const double beta = prm.beta();
  for (std::size_t i = 0; i < sol.y.size(); ++i) {
    const double yy = sol.y[i];
    rep.Etilde_samples.push_back(semi_energy_at(prm, rep.C_p, yy, sol.f[i], sol.fprime[i]));
    rep.dE_closed.push_back(semi_energy_rate(prm, rep.C_p, yy, sol.f[i]));
    // h on a 2^-40 lattice so every abscissa in the stencil is exact: Etilde
    // depends on y through (1-y^2)^{2beta+2}, whose relative sensitivity to a
    // rounded abscissa grows like 1/(1-|y|).
    const double h = std::ldexp(std::max(1.0, std::round(std::ldexp(1e-3 * (1.0 - std::fabs(yy)), 40))), -40);
    rep.dE_numeric.push_back(detail::semi_energy_derivative_fd(sol, rep.C_p, yy, h));
    rep.asymptotic_trace.push_back(std::pow(1.0 - yy, 1.0 + beta) * sol.fprime[i]);
  }
  const auto end = sol.eval(sol.y_max());
  rep.A_estimate = semi_energy_at(prm, rep.C_p, sol.y_max(), end[0], end[1]);
  return rep;
}

/// Self-similar field u = x^{-beta} f(t/x) with its derivatives, on x > t.
struct LiftedField {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> u_x;
  std::vector<double> u_t;
};

inline LiftedField lift_field(const OdeSolution& sol, double t, const std::vector<double>& xs) {
  const double beta = sol.params.beta();
  LiftedField out;
  out.t = t;
  for (double x : xs) {
    if (!(x > t) || !(x > 0.0)) throw OutOfRange("lift requires x > t and x > 0");
    const auto v = sol.eval(t / x);
    const double xb = std::pow(x, -beta);
    out.x.push_back(x);
    out.u.push_back(xb * v[0]);
    out.u_t.push_back(xb / x * v[1]);
    out.u_x.push_back(-beta * xb / x * v[0] - t * xb / (x * x) * v[1]);
  }
  return out;
}

struct DecayRow {
  double t = 0.0;
  double ray_energy = 0.0;
};

/// int_{t+R}^{t+R1} |u_t(x, t)|^2 dx = int x^{-2beta-2} f'(t/x)^2 dx per t,
/// by composite Simpson on `intervals` (even) subintervals.
inline std::vector<DecayRow> ray_energy_decay(const OdeSolution& sol, double R, double R1,
                                              const std::vector<double>& t_list, std::size_t intervals = 2000) {
  if (!(R > 0.0 && R1 > R)) throw InvalidParams("ray energy needs 0 < R < R1");
  for (std::size_t i = 1; i < t_list.size(); ++i)
    if (!(t_list[i] > t_list[i - 1])) throw InvalidParams("t_list must be increasing");
  if (intervals % 2) ++intervals;
  const double beta = sol.params.beta();
  std::vector<DecayRow> rows;
  for (double t : t_list) {
    if (t < 0.0) throw OutOfRange("t must be nonnegative");
    const double a = t + R, b = t + R1;
    const double h = (b - a) / static_cast<double>(intervals);
    auto g = [&](double x) {
      const double fp = sol.eval(t / x)[1];
      return std::pow(x, -2.0 * beta - 2.0) * fp * fp;
    };
    double s = g(a) + g(b);
    for (std::size_t i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + h * static_cast<double>(i));
    rows.push_back({t, s * h / 3.0});
  }
  return rows;
}

}  // namespace nlwave
