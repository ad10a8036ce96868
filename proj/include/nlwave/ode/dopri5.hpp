#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nlwave/errors.hpp"

namespace nlwave::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct Dopri5Options {
  double rtol = 1e-10;
  double atol = 1e-10;
  double h_initial = 0.0;  // 0 picks a small fraction of the interval
  double h_min_rel = 1e-15;
  std::size_t max_steps = 10'000'000;
  /// Upper bound on |h| as a function of the current abscissa; empty = none.
  std::function<double(double)> h_cap;
};

/// Continuous extension of one accepted step (Hairer's fifth-order "contd5").
template <std::size_t N>
struct DenseSegment {
  double x0 = 0.0;
  double h = 0.0;
  std::array<Vec<N>, 5> r{};

  Vec<N> operator()(double x) const {
    const double th = (x - x0) / h;
    const double th1 = 1.0 - th;
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
    return y;
  }
  double lo() const { return std::min(x0, x0 + h); }
  double hi() const { return std::max(x0, x0 + h); }
};

template <std::size_t N>
struct Dopri5Result {
  double x_end = 0.0;
  Vec<N> y_end{};
  std::vector<DenseSegment<N>> segments;  // in integration order
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Dormand-Prince 5(4) with standard step-size control, integrating
/// y' = f(x, y) from x0 to x_end (either direction).
template <std::size_t N, class F>
Dopri5Result<N> dopri5(F&& f, double x0, Vec<N> y0, double x_end, const Dopri5Options& opt = {}) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  Dopri5Result<N> res;
  const double span = x_end - x0;
  const double dir = span >= 0.0 ? 1.0 : -1.0;
  double x = x0;
  Vec<N> y = y0;
  res.x_end = x0;
  res.y_end = y0;
  if (span == 0.0) return res;

  auto axpy = [](const Vec<N>& base, std::initializer_list<std::pair<double, const Vec<N>*>> terms, double h) {
    Vec<N> out = base;
    for (std::size_t i = 0; i < N; ++i) {
      double s = 0.0;
      for (const auto& [c, k] : terms) s += c * (*k)[i];
      out[i] += h * s;
    }
    return out;
  };

  Vec<N> k1 = f(x, y), k2, k3, k4, k5, k6, k7;
  double h = opt.h_initial > 0.0 ? opt.h_initial : 1e-3 * std::fabs(span);
  h = std::min(h, std::fabs(span));
  double err_old = 1e-4;

  while (dir * (x_end - x) > 0.0) {
    if (res.accepted + res.rejected >= opt.max_steps)
      throw ToleranceNotMet("step limit reached at x=" + std::to_string(x));
    if (opt.h_cap) h = std::min(h, opt.h_cap(x));
    const double remaining = std::fabs(x_end - x);
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    if (h < opt.h_min_rel * std::max(1.0, std::fabs(x)))
      throw ToleranceNotMet("step size underflow at x=" + std::to_string(x));
    const double hs = dir * h;

    k2 = f(x + c2 * hs, axpy(y, {{a21, &k1}}, hs));
    k3 = f(x + c3 * hs, axpy(y, {{a31, &k1}, {a32, &k2}}, hs));
    k4 = f(x + c4 * hs, axpy(y, {{a41, &k1}, {a42, &k2}, {a43, &k3}}, hs));
    k5 = f(x + c5 * hs, axpy(y, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}, hs));
    k6 = f(x + hs, axpy(y, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}, hs));
    const Vec<N> y1 = axpy(y, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}}, hs);
    const double x1 = last ? x_end : x + hs;
    k7 = f(x1, y1);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(y1[i]));
      err += (ei / sc) * (ei / sc);
    }
    err = std::sqrt(err / static_cast<double>(N));
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      DenseSegment<N> seg;
      seg.x0 = x;
      seg.h = x1 - x;
      for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = y1[i] - y[i];
        const double bspl = seg.h * k1[i] - ydiff;
        seg.r[0][i] = y[i];
        seg.r[1][i] = ydiff;
        seg.r[2][i] = bspl;
        seg.r[3][i] = ydiff - seg.h * k7[i] - bspl;
        seg.r[4][i] = seg.h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      }
      res.segments.push_back(seg);
      ++res.accepted;
      x = x1;
      y = y1;
      k1 = k7;
      // PI controller (Hairer's beta = 0.04)
      const double fac = std::clamp(0.9 * std::pow(err, -0.17) * std::pow(err_old, 0.04), 0.2, 10.0);
      err_old = std::max(err, 1e-4);
      h *= fac;
    } else {
      ++res.rejected;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
    }
  }
  res.x_end = x;
  res.y_end = y;
  return res;
}

}  // namespace nlwave::ode
