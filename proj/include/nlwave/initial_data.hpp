#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/grid.hpp"

namespace nlwave {

/// Gaussian amplitude below which the profile is cut to exactly zero.
inline constexpr double kGaussianTruncation = 1e-14;

/// A exp(-((x-c)/w)^2), cut to zero where it falls below kGaussianTruncation.
struct GaussianBump {
  double amplitude = 1.0;
  double center = 0.0;
  double width = 1.0;

  double radius() const {
    const double a = std::fabs(amplitude);
    if (a <= kGaussianTruncation) return 0.0;
    return width * std::sqrt(std::log(a / kGaussianTruncation));
  }
  double value(double x) const {
    const double s = (x - center) / width;
    if (std::fabs(x - center) >= radius()) return 0.0;
    return amplitude * std::exp(-s * s);
  }
  double derivative(double x) const {
    const double s = (x - center) / width;
    if (std::fabs(x - center) >= radius()) return 0.0;
    return -2.0 * s / width * amplitude * std::exp(-s * s);
  }
};

/// A (1 - ((x-c)/w)^2)_+^power, compactly supported on (c-w, c+w).
struct PolynomialBump {
  double amplitude = 1.0;
  double center = 0.0;
  double width = 1.0;
  int power = 2;

  double radius() const { return amplitude == 0.0 ? 0.0 : width; }
  double value(double x) const {
    const double s = (x - center) / width;
    if (std::fabs(s) >= 1.0) return 0.0;
    return amplitude * std::pow(1.0 - s * s, power);
  }
  double derivative(double x) const {
    const double s = (x - center) / width;
    if (std::fabs(s) >= 1.0) return 0.0;
    return amplitude * power * std::pow(1.0 - s * s, power - 1) * (-2.0 * s / width);
  }
};

using Bump = std::variant<GaussianBump, PolynomialBump>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(hi > lo); }
};

/// Cauchy data (u_0, u_1). Analytic kinds carry closed forms for u_0, u_0'
/// and an antiderivative of u_1, which lets the solver start on the exact
/// characteristic formula. For bump superpositions the velocity is
/// u_1 = coupling * u_0'; coupling = -1 is a pure right-mover, +1 left-mover.
class InitialData {
 public:
  enum class Kind { gaussian, polynomial_bump, self_similar_trace, explicit_samples };

  static InitialData zero() { return bumps({}, 0.0); }

  static InitialData gaussian(double amplitude, double center = 0.0, double width = 1.0,
                              double coupling = 0.0) {
    return bumps({GaussianBump{amplitude, center, width}}, coupling);
  }

  static InitialData polynomial_bump(double amplitude, double center = 0.0, double width = 1.0,
                                     int power = 2, double coupling = 0.0) {
    return bumps({PolynomialBump{amplitude, center, width, power}}, coupling);
  }

  static InitialData bumps(std::vector<Bump> list, double coupling) {
    InitialData d;
    d.kind_ = Kind::gaussian;
    for (const auto& b : list) {
      if (std::holds_alternative<PolynomialBump>(b)) d.kind_ = Kind::polynomial_bump;
      std::visit(
          [](const auto& bb) {
            if (!(bb.width > 0.0)) throw ValidationError("init.width must be positive");
          },
          b);
    }
    d.bumps_ = std::move(list);
    d.coupling_ = coupling;
    return d;
  }

  /// u_0 = a x^{-beta}, u_1 = b x^{-beta-1} with beta = 2/(p-1); x > 0 only.
  static InitialData self_similar_trace(double a, double b, double p) {
    if (!(p > 1.0)) throw ValidationError("p must exceed 1");
    InitialData d;
    d.kind_ = Kind::self_similar_trace;
    d.a_ = a;
    d.b_ = b;
    d.beta_ = 2.0 / (p - 1.0);
    return d;
  }

  /// Samples given directly on `grid`; no antiderivative is available, so the
  /// solver falls back on the Taylor start.
  static InitialData explicit_samples(const GridSpec& grid, std::vector<double> u0,
                                      std::vector<double> u1) {
    if (u0.size() != grid.n_nodes() || u1.size() != grid.n_nodes())
      throw ValidationError("explicit samples must match the grid size");
    InitialData d;
    d.kind_ = Kind::explicit_samples;
    d.sample_grid_ = grid;
    d.u0_samples_ = std::move(u0);
    d.u1_samples_ = std::move(u1);
    return d;
  }

  Kind kind() const { return kind_; }
  const std::vector<Bump>& bump_list() const { return bumps_; }
  double coupling() const { return coupling_; }

  double u0(double x) const {
    switch (kind_) {
      case Kind::self_similar_trace: return a_ * std::pow(x, -beta_);
      case Kind::explicit_samples: return interpolate(u0_samples_, x);
      default: {
        double s = 0.0;
        for (const auto& b : bumps_) s += std::visit([x](const auto& bb) { return bb.value(x); }, b);
        return s;
      }
    }
  }

  double du0(double x) const {
    switch (kind_) {
      case Kind::self_similar_trace: return -beta_ * a_ * std::pow(x, -beta_ - 1.0);
      case Kind::explicit_samples: return sample_slope(u0_samples_, x);
      default: {
        double s = 0.0;
        for (const auto& b : bumps_)
          s += std::visit([x](const auto& bb) { return bb.derivative(x); }, b);
        return s;
      }
    }
  }

  double u1(double x) const {
    switch (kind_) {
      case Kind::self_similar_trace: return b_ * std::pow(x, -beta_ - 1.0);
      case Kind::explicit_samples: return interpolate(u1_samples_, x);
      default: return coupling_ == 0.0 ? 0.0 : coupling_ * du0(x);
    }
  }

  /// An antiderivative of u_1, when known in closed form.
  std::optional<double> u1_antiderivative(double x) const {
    switch (kind_) {
      case Kind::self_similar_trace: return -b_ / beta_ * std::pow(x, -beta_);
      case Kind::explicit_samples: return std::nullopt;
      default: return coupling_ == 0.0 ? 0.0 : coupling_ * u0(x);
    }
  }

  /// Closed interval outside of which both u_0 and u_1 vanish identically;
  /// nullopt when the data are not compactly supported.
  std::optional<Interval> support() const {
    switch (kind_) {
      case Kind::self_similar_trace: return std::nullopt;
      case Kind::explicit_samples: {
        std::optional<std::size_t> lo, hi;
        for (std::size_t j = 0; j < u0_samples_.size(); ++j) {
          if (u0_samples_[j] != 0.0 || u1_samples_[j] != 0.0) {
            if (!lo) lo = j;
            hi = j;
          }
        }
        if (!lo) return Interval{};
        return Interval{sample_grid_.x(*lo), sample_grid_.x(*hi)};
      }
      default: {
        std::optional<Interval> out;
        for (const auto& b : bumps_) {
          const auto [c, r] =
              std::visit([](const auto& bb) { return std::pair{bb.center, bb.radius()}; }, b);
          if (r <= 0.0) continue;
          if (!out) out = Interval{c - r, c + r};
          out->lo = std::min(out->lo, c - r);
          out->hi = std::max(out->hi, c + r);
        }
        return out.value_or(Interval{});
      }
    }
  }

  std::vector<double> sample_u0(const GridSpec& g) const {
    check_grid(g);
    if (kind_ == Kind::explicit_samples) return u0_samples_;
    std::vector<double> out(g.n_nodes());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = u0(g.x(j));
    return out;
  }

  std::vector<double> sample_u1(const GridSpec& g) const {
    check_grid(g);
    if (kind_ == Kind::explicit_samples) return u1_samples_;
    std::vector<double> out(g.n_nodes());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = u1(g.x(j));
    return out;
  }

  void check_grid(const GridSpec& g) const {
    if (kind_ == Kind::self_similar_trace && !(g.x_min > 0.0))
      throw ValidationError("self_similar_trace requires x_min > 0 (singular at x = 0)");
    if (kind_ == Kind::explicit_samples && !(g == sample_grid_))
      throw ValidationError("explicit samples were given on a different grid");
  }

 private:
  double interpolate(const std::vector<double>& s, double x) const {
    const GridSpec& g = sample_grid_;
    if (x <= g.x_min) return s.front();
    if (x >= g.x_max) return s.back();
    const double r = (x - g.x_min) / g.dx();
    const auto j = std::min(static_cast<std::size_t>(r), g.n_cells - 1);
    const double w = r - static_cast<double>(j);
    return (1.0 - w) * s[j] + w * s[j + 1];
  }

  double sample_slope(const std::vector<double>& s, double x) const {
    const GridSpec& g = sample_grid_;
    const double h = g.dx();
    return (interpolate(s, x + 0.5 * h) - interpolate(s, x - 0.5 * h)) / h;
  }

  Kind kind_ = Kind::gaussian;
  std::vector<Bump> bumps_;
  double coupling_ = 0.0;
  double a_ = 0.0, b_ = 0.0, beta_ = 1.0;
  GridSpec sample_grid_{};
  std::vector<double> u0_samples_, u1_samples_;
};

inline std::string_view to_string(InitialData::Kind k) {
  switch (k) {
    case InitialData::Kind::gaussian: return "gaussian";
    case InitialData::Kind::polynomial_bump: return "polynomial_bump";
    case InitialData::Kind::self_similar_trace: return "self_similar_trace";
    case InitialData::Kind::explicit_samples: return "explicit_samples";
  }
  return "?";
}

}  // namespace nlwave
