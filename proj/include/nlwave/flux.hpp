#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlwave/energy.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/quadrature.hpp"
#include "nlwave/trajectory.hpp"

namespace nlwave {

enum class EdgeKind { horizontal, vertical, right_characteristic, left_characteristic };

inline std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::horizontal: return "horizontal";
    case EdgeKind::vertical: return "vertical";
    case EdgeKind::right_characteristic: return "right_characteristic";
    case EdgeKind::left_characteristic: return "left_characteristic";
  }
  return "?";
}

struct Vertex {
  double x = 0.0;
  double t = 0.0;
};

struct Edge {
  EdgeKind kind;
  Vertex from;
  Vertex to;
};

/// Which conserved splitting a flux computation uses.
enum class Going { plus, minus };

inline std::string_view to_string(Going g) { return g == Going::plus ? "plus" : "minus"; }

/// Closed, simple, counterclockwise polygon in the (x, t) plane whose edges
/// are horizontal, vertical, or parallel to a light ray.
class PolygonPath {
 public:
  explicit PolygonPath(std::vector<Vertex> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw InvalidParams("a closed path needs at least 3 vertices");
    double scale = 0.0;
    for (const auto& v : vertices_) scale = std::max({scale, std::fabs(v.x), std::fabs(v.t)});
    const double tol = 1e-12 * std::max(1.0, scale);
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vertex a = vertices_[i];
      const Vertex b = vertices_[(i + 1) % n];
      const double dx = b.x - a.x, dt = b.t - a.t;
      EdgeKind kind;
      if (std::fabs(dx) <= tol && std::fabs(dt) <= tol)
        throw InvalidParams("path has a zero-length edge at vertex " + std::to_string(i));
      if (std::fabs(dt) <= tol)
        kind = EdgeKind::horizontal;
      else if (std::fabs(dx) <= tol)
        kind = EdgeKind::vertical;
      else if (std::fabs(dx - dt) <= tol)
        kind = EdgeKind::right_characteristic;
      else if (std::fabs(dx + dt) <= tol)
        kind = EdgeKind::left_characteristic;
      else
        throw InvalidParams("edge " + std::to_string(i) + " is neither axis-parallel nor characteristic");
      edges_.push_back(Edge{kind, a, b});
    }
    if (!simple()) throw InvalidParams("path is not simple");
    if (!(signed_area() > 0.0)) throw InvalidParams("path must be traversed counterclockwise");
  }

  static PolygonPath rectangle(double x0, double x1, double t0, double t1) {
    return PolygonPath({{x0, t0}, {x1, t0}, {x1, t1}, {x0, t1}});
  }

  /// Base [x0, x0 + w] at t0, top shifted by +h (right-leaning) or -h at t0 + h.
  static PolygonPath parallelogram(double x0, double w, double t0, double h, bool right_leaning) {
    const double s = right_leaning ? h : -h;
    return PolygonPath({{x0, t0}, {x0 + w, t0}, {x0 + w + s, t0 + h}, {x0 + s, t0 + h}});
  }

  /// Hexagon with horizontal sides [a, b] at t0 and t0 + 2h, and characteristic
  /// sides bulging outward to b + h and a - h at t0 + h.
  static PolygonPath hexagon(double a, double b, double t0, double h) {
    PolygonPath p({{a, t0}, {b, t0}, {b + h, t0 + h}, {b, t0 + 2 * h}, {a, t0 + 2 * h}, {a - h, t0 + h}});
    p.hexagon_ = true;
    return p;
  }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool is_hexagon() const { return hexagon_; }

  double signed_area() const {
    double s = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vertex& a = vertices_[i];
      const Vertex& b = vertices_[(i + 1) % n];
      s += a.x * b.t - b.x * a.t;
    }
    return 0.5 * s;
  }

 private:
  static double cross(Vertex o, Vertex a, Vertex b) {
    return (a.x - o.x) * (b.t - o.t) - (a.t - o.t) * (b.x - o.x);
  }
  static bool on_segment(Vertex p, Vertex a, Vertex b) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.t, b.t) <= p.t &&
           p.t <= std::max(a.t, b.t);
  }
  static bool intersect(const Edge& e, const Edge& f) {
    const double d1 = cross(f.from, f.to, e.from), d2 = cross(f.from, f.to, e.to);
    const double d3 = cross(e.from, e.to, f.from), d4 = cross(e.from, e.to, f.to);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
      return true;
    return (d1 == 0 && on_segment(e.from, f.from, f.to)) || (d2 == 0 && on_segment(e.to, f.from, f.to)) ||
           (d3 == 0 && on_segment(f.from, e.from, e.to)) || (d4 == 0 && on_segment(f.to, e.from, e.to));
  }
  bool simple() const {
    const std::size_t n = edges_.size();
    for (std::size_t i = 0; i < n; ++i) {
      // consecutive edges may only share their common vertex
      const Edge& e = edges_[i];
      const Edge& f = edges_[(i + 1) % n];
      if (cross(e.from, e.to, f.to) == 0.0 &&
          (f.to.x - f.from.x) * (e.to.x - e.from.x) + (f.to.t - f.from.t) * (e.to.t - e.from.t) < 0.0)
        return false;
      for (std::size_t k = i + 2; k < n; ++k) {
        if (i == 0 && k == n - 1) continue;
        if (intersect(e, edges_[k])) return false;
      }
    }
    return true;
  }

  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  bool hexagon_ = false;
};

/// Density P and its dual flux Q for one splitting at a point, written with
/// the same expressions as densities_from so that P matches e_+ / e_-.
struct FluxPair {
  double P = 0.0;
  double Q = 0.0;
};

inline FluxPair flux_pair(const PointSample& s, const Nonlinearity& nl, Going which) {
  const double half_pot = 0.5 * nl.potential(s.u);
  if (which == Going::plus) {
    const double dm = s.u_x - s.u_t;
    const double q = 0.25 * dm * dm;
    return {q + half_pot, -q + half_pot};
  }
  const double dp = s.u_x + s.u_t;
  const double q = 0.25 * dp * dp;
  return {q + half_pot, q - half_pot};
}

struct EdgeFlux {
  Edge edge;
  double value = 0.0;
};

/// Labels for the hexagon: the energy on the top side equals the energy on
/// the bottom side plus Q1 - Q2 - Q3 + Q4.
struct FluxDecomposition {
  double E_bottom = 0.0;
  double E_top = 0.0;
  double Q1 = 0.0;  // gained along the right ray leaving (b, t0)
  double Q2 = 0.0;  // carried out across the left ray into (b, t0 + 2h)
  double Q3 = 0.0;  // leaked along the right ray on the a side
  double Q4 = 0.0;  // carried in across the left ray leaving (a, t0)
};

struct FluxReport {
  Going which = Going::plus;
  std::vector<EdgeFlux> edges;
  double residual = 0.0;  // signed sum of edge integrals
  double scale = 0.0;     // sum of |edge integral|
  std::optional<FluxDecomposition> decomposition;
};

namespace detail {

inline constexpr double kLatticeTol = 1e-9;

inline std::size_t level_of(const Trajectory& tr, double t) {
  const double r = t / tr.grid().dt();
  const double n = std::round(r);
  if (std::fabs(r - n) > kLatticeTol * std::max(1.0, std::fabs(r)))
    throw InvalidParams("vertex time " + std::to_string(t) + " is not on a time level");
  return static_cast<std::size_t>(n);
}

/// Position in node units; snapped to the node when within lattice tolerance.
inline double node_coord(const GridSpec& g, double x) {
  const double r = (x - g.x_min) / g.dx();
  const double rn = std::round(r);
  return std::fabs(r - rn) <= kLatticeTol * std::max(1.0, std::fabs(r)) ? rn : r;
}

inline FluxPair pair_at(const Trajectory& tr, std::size_t n, double r, Going which) {
  const auto j = static_cast<std::size_t>(std::floor(r));
  const double w = r - static_cast<double>(j);
  const FluxPair a = flux_pair(tr.sample(n, j), tr.nonlinearity(), which);
  if (w == 0.0) return a;
  const FluxPair b = flux_pair(tr.sample(n, j + 1), tr.nonlinearity(), which);
  return {(1.0 - w) * a.P + w * b.P, (1.0 - w) * a.Q + w * b.Q};
}

inline void check_inside(const Trajectory& tr, const Vertex& v) {
  const double tol = kLatticeTol * tr.grid().dx();
  if (v.t < -tol || v.t > tr.t_end() + tol || v.x < tr.x_lo() - tol || v.x > tr.x_hi() + tol)
    throw PathOutsideDomain("vertex (" + std::to_string(v.x) + ", " + std::to_string(v.t) +
                            ") outside the stored trajectory [" + std::to_string(tr.x_lo()) + ", " +
                            std::to_string(tr.x_hi()) + "] x [0, " + std::to_string(tr.t_end()) + "]");
}

/// Integral of P dx + Q dt along a straight edge using level samples; edges
/// that are not horizontal are parameterized by t.
inline double edge_integral(const Trajectory& tr, const Edge& e, Going which) {
  const GridSpec& g = tr.grid();
  const std::size_t n0 = level_of(tr, e.from.t);
  const std::size_t n1 = level_of(tr, e.to.t);
  if (e.kind == EdgeKind::horizontal) {
    const EnergyDensities d = tr.densities(n0);
    const auto& P = which == Going::plus ? d.e_plus : d.e_minus;
    const double lo = std::min(e.from.x, e.to.x), hi = std::max(e.from.x, e.to.x);
    const double v = integrate_nodal(g, P, lo, hi);
    return e.to.x > e.from.x ? v : -v;
  }
  const double slope = e.kind == EdgeKind::vertical ? 0.0 : (e.kind == EdgeKind::right_characteristic ? 1.0 : -1.0);
  const double r0 = node_coord(g, e.from.x);
  const long dir = n1 > n0 ? 1 : -1;
  const std::size_t count = n1 > n0 ? n1 - n0 : n0 - n1;
  double s = 0.0;
  for (std::size_t i = 0; i <= count; ++i) {
    const std::size_t n = static_cast<std::size_t>(static_cast<long>(n0) + dir * static_cast<long>(i));
    const double shift = slope * g.cfl * static_cast<double>(dir) * static_cast<double>(i);
    double r = r0 + shift;
    const double rn = std::round(r);
    if (std::fabs(r - rn) <= kLatticeTol * std::max(1.0, std::fabs(r))) r = rn;
    const FluxPair fp = pair_at(tr, n, r, which);
    const double f = slope * fp.P + fp.Q;
    s += (i == 0 || i == count) ? 0.5 * f : f;
  }
  return s * g.dt() * static_cast<double>(dir);
}

}  // namespace detail

/// Signed boundary integral of e dx + (dual flux) dt around `path`. At
/// cfl = 1 every vertex must be a lattice point so characteristic edges run
/// along lattice diagonals; below unit cfl off-node positions interpolate.
inline FluxReport flux_loop(const Trajectory& tr, const PolygonPath& path, Going which) {
  const GridSpec& g = tr.grid();
  for (const auto& v : path.vertices()) {
    detail::check_inside(tr, v);
    detail::level_of(tr, v.t);
    if (g.cfl == 1.0) {
      const double r = detail::node_coord(g, v.x);
      if (r != std::round(r))
        throw InvalidParams("vertex x=" + std::to_string(v.x) + " is not a grid node (required at cfl = 1)");
    }
  }
  FluxReport rep;
  rep.which = which;
  for (const auto& e : path.edges()) {
    const double v = detail::edge_integral(tr, e, which);
    rep.edges.push_back({e, v});
    rep.residual += v;
    rep.scale += std::fabs(v);
  }
  if (path.is_hexagon() && which == Going::plus) {
    const auto& E = rep.edges;
    rep.decomposition = FluxDecomposition{E[0].value, -E[3].value, E[1].value, -E[2].value, -E[4].value, E[5].value};
  }
  return rep;
}

/// Both forms of the trapezoid law across the ray x = t - eta between t1 and t2.
struct TrapezoidReport {
  Going which = Going::plus;
  double eta = 0.0, t1 = 0.0, t2 = 0.0;
  double lhs = 0.0;        // E(t2; -inf, t2-eta) - E(t1; -inf, t1-eta)
  double lhs_right = 0.0;  // E(t1; t1-eta, inf) - E(t2; t2-eta, inf)
  double rhs = 0.0;        // flux integral along the ray
  double residual() const { return lhs - rhs; }
  double residual_right() const { return lhs_right - rhs; }
};

inline TrapezoidReport trapezoid_check(const Trajectory& tr, double eta, double t1, double t2, Going which) {
  if (!(t1 < t2)) throw InvalidParams("trapezoid_check requires t1 < t2");
  if (!tr.covers_grid()) throw InvalidParams("trapezoid_check needs a trajectory stored on the whole grid");
  const GridSpec& g = tr.grid();
  const double tol = detail::kLatticeTol * g.dx();
  if (t1 < -tol || t2 > tr.t_end() + tol)
    throw RayOutsideDomain("times outside the stored trajectory");
  if (t1 - eta < g.x_min - tol || t2 - eta > g.x_max + tol)
    throw RayOutsideDomain("ray x = t - " + std::to_string(eta) + " leaves [" + std::to_string(g.x_min) + ", " +
                           std::to_string(g.x_max) + "]");
  const std::size_t n1 = detail::level_of(tr, t1);
  const std::size_t n2 = detail::level_of(tr, t2);
  const DensityKind kind = which == Going::plus ? DensityKind::plus : DensityKind::minus;
  const EnergyDensities d1 = tr.densities(n1);
  const EnergyDensities d2 = tr.densities(n2);
  const double x1 = tr.t(n1) - eta, x2 = tr.t(n2) - eta;

  TrapezoidReport rep{which, eta, tr.t(n1), tr.t(n2)};
  rep.lhs = interval_energy(d2, g, g.x_min, x2, kind) - interval_energy(d1, g, g.x_min, x1, kind);
  rep.lhs_right = interval_energy(d1, g, x1, g.x_max, kind) - interval_energy(d2, g, x2, g.x_max, kind);
  const Edge ray{EdgeKind::right_characteristic, {x1, tr.t(n1)}, {x2, tr.t(n2)}};
  rep.rhs = detail::edge_integral(tr, ray, which);
  return rep;
}

}  // namespace nlwave
