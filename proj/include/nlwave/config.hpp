#pragma once

#include <charconv>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlwave/errors.hpp"
#include "nlwave/experiments.hpp"
#include "nlwave/flux.hpp"
#include "nlwave/grid.hpp"
#include "nlwave/initial_data.hpp"
#include "nlwave/selfsimilar.hpp"

// Configuration grammar, one entry per line:
//
//   line    := blank | comment | entry
//   comment := '#' anything
//   entry   := key '=' value [ '#' anything ]
//   key     := section '.' name        (the keys listed in config_keys())
//   value   := number | word | list | 'auto' | empty
//   list    := number { ',' number }   (empty value = empty list)
//
// Whitespace around keys and values is ignored; a key may appear once per
// source, and later sources (overrides) replace earlier values.

namespace nlwave {

enum class InitKind { gaussian, polynomial_bump, two_bump, zero };

inline std::string_view to_string(InitKind k) {
  switch (k) {
    case InitKind::gaussian: return "gaussian";
    case InitKind::polynomial_bump: return "polynomial_bump";
    case InitKind::two_bump: return "two_bump";
    case InitKind::zero: return "zero";
  }
  return "gaussian";
}

enum class FluxShape { rectangle, parallelogram, hexagon };

inline std::string_view to_string(FluxShape s) {
  switch (s) {
    case FluxShape::rectangle: return "rectangle";
    case FluxShape::parallelogram: return "parallelogram";
    case FluxShape::hexagon: return "hexagon";
  }
  return "rectangle";
}

struct InitSpec {
  InitKind kind = InitKind::gaussian;
  double amplitude = 1.0;
  double center = 0.0;
  double width = 1.0;
  int power = 2;            // polynomial_bump
  double coupling = 0.0;    // u_1 = coupling * u_0'
  double separation = 6.0;  // two_bump: centers at +-separation/2
  double levine_multiple = 0.0;  // > 0: amplitude = multiple * A* for the shape

  bool operator==(const InitSpec&) const = default;
};

struct FluxSpec {
  FluxShape shape = FluxShape::rectangle;
  double a = -2.0;  // left end of the base
  double b = 2.0;   // right end of the base
  double t0 = 0.0;
  double h = 1.0;   // height (hexagon: half height)
  bool right_leaning = true;
  Going which = Going::plus;
  double trap_eta = 0.0;
  double trap_t1 = 0.0;
  double trap_t2 = 1.0;

  bool operator==(const FluxSpec&) const = default;
};

struct OdeSpec {
  double p = 3.0;
  double a = 1.0;
  double b = 0.0;
  double delta = 1e-4;
  double tol = 1e-12;
  double ray_R = 1.0;
  double ray_R1 = 2.0;
  std::vector<double> ray_t{10.0, 20.0, 40.0, 80.0};
  std::vector<double> cp_p{2.0, 3.0, 5.0};

  bool operator==(const OdeSpec&) const = default;
};

/// Everything a run reads; defaults are the documented defaults.
struct RunConfig {
  Nonlinearity nl{};
  InitSpec init{};
  double dx = 2e-3;
  double cfl = 1.0;
  std::optional<double> x_min;  // auto: [-(t_end + R0 + 2), t_end + R0 + 2]
  std::optional<double> x_max;
  double t_end = 60.0;
  double c = 0.5;
  double eta = 2.0;
  std::vector<double> t_samples;  // empty: the scenario's default sampling
  double diagnostic_step = 1.0;   // simulate: diagnostics time step
  std::vector<double> snapshots;  // simulate: state dumps (empty: t_end)
  ProbeFunction probe{};
  Thresholds thresholds{};
  double blowup_guard = kDefaultBlowupGuard;
  FluxSpec flux{};
  OdeSpec ode{};

  bool operator==(const RunConfig&) const = default;
};

namespace config_detail {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string format_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s;
}

inline std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// Value text plus its 1-based position, for error reporting.
struct Token {
  std::string_view text;
  std::size_t line = 0;
  std::size_t column = 0;
};

inline double parse_double(const Token& t) {
  double v = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (!t.text.empty() && *first == '+') ++first;
  auto r = std::from_chars(first, last, v);
  if (t.text.empty() || r.ec != std::errc() || r.ptr != last)
    throw ParseError(t.line, t.column, "expected a number, got '" + std::string(t.text) + "'");
  return v;
}

inline int parse_int(const Token& t) {
  int v = 0;
  auto r = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (t.text.empty() || r.ec != std::errc() || r.ptr != t.text.data() + t.text.size())
    throw ParseError(t.line, t.column, "expected an integer, got '" + std::string(t.text) + "'");
  return v;
}

inline bool parse_bool(const Token& t) {
  if (t.text == "true") return true;
  if (t.text == "false") return false;
  throw ParseError(t.line, t.column, "expected true or false, got '" + std::string(t.text) + "'");
}

inline std::vector<double> parse_list(const Token& t) {
  std::vector<double> out;
  if (t.text.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = t.text.find(',', pos);
    const auto raw = t.text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    const auto lead = raw.find_first_not_of(" \t");
    out.push_back(parse_double({trim(raw), t.line, t.column + pos + (lead == std::string_view::npos ? 0 : lead)}));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_auto(const Token& t) {
  if (t.text == "auto") return std::nullopt;
  return parse_double(t);
}

template <class E, std::size_t N>
E parse_enum(const Token& t, const E (&options)[N]) {
  std::string names;
  for (E e : options) {
    if (to_string(e) == t.text) return e;
    names += (names.empty() ? "" : ", ") + std::string(to_string(e));
  }
  throw ParseError(t.line, t.column, "expected one of " + names + ", got '" + std::string(t.text) + "'");
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const Token&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class M>
Key number(std::string name, M member) {
  return {std::move(name), [member](RunConfig& c, const Token& t) { member(c) = parse_double(t); },
          [member](const RunConfig& c) { return format_double(member(c)); }};
}

template <class M>
Key list(std::string name, M member) {
  return {std::move(name), [member](RunConfig& c, const Token& t) { member(c) = parse_list(t); },
          [member](const RunConfig& c) { return format_list(member(c)); }};
}

template <class M>
Key optional_number(std::string name, M member) {
  return {std::move(name), [member](RunConfig& c, const Token& t) { member(c) = parse_auto(t); },
          [member](const RunConfig& c) {
            const auto& v = member(c);
            return v ? format_double(*v) : std::string("auto");
          }};
}

#define NLWAVE_FIELD(expr) [](auto& c) -> auto& { return expr; }

inline const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(number("nl.p", NLWAVE_FIELD(c.nl.p)));
    k.push_back({"nl.sign",
                 [](RunConfig& c, const Token& t) {
                   c.nl.sign = parse_enum(t, {Sign::defocusing, Sign::focusing, Sign::disabled});
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.nl.sign)); }});

    k.push_back({"init.kind",
                 [](RunConfig& c, const Token& t) {
                   c.init.kind = parse_enum(
                       t, {InitKind::gaussian, InitKind::polynomial_bump, InitKind::two_bump, InitKind::zero});
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.init.kind)); }});
    k.push_back(number("init.amplitude", NLWAVE_FIELD(c.init.amplitude)));
    k.push_back(number("init.center", NLWAVE_FIELD(c.init.center)));
    k.push_back(number("init.width", NLWAVE_FIELD(c.init.width)));
    k.push_back({"init.power", [](RunConfig& c, const Token& t) { c.init.power = parse_int(t); },
                 [](const RunConfig& c) { return std::to_string(c.init.power); }});
    k.push_back(number("init.coupling", NLWAVE_FIELD(c.init.coupling)));
    k.push_back(number("init.separation", NLWAVE_FIELD(c.init.separation)));
    k.push_back(number("init.levine_multiple", NLWAVE_FIELD(c.init.levine_multiple)));

    k.push_back(number("grid.dx", NLWAVE_FIELD(c.dx)));
    k.push_back(number("grid.cfl", NLWAVE_FIELD(c.cfl)));
    k.push_back(optional_number("grid.x_min", NLWAVE_FIELD(c.x_min)));
    k.push_back(optional_number("grid.x_max", NLWAVE_FIELD(c.x_max)));

    k.push_back(number("run.t_end", NLWAVE_FIELD(c.t_end)));
    k.push_back(number("run.c", NLWAVE_FIELD(c.c)));
    k.push_back(number("run.eta", NLWAVE_FIELD(c.eta)));
    k.push_back(list("run.t_samples", NLWAVE_FIELD(c.t_samples)));
    k.push_back(number("run.diagnostic_step", NLWAVE_FIELD(c.diagnostic_step)));
    k.push_back(list("run.snapshots", NLWAVE_FIELD(c.snapshots)));
    k.push_back(number("run.blowup_guard", NLWAVE_FIELD(c.blowup_guard)));

    k.push_back(number("probe.center", NLWAVE_FIELD(c.probe.center)));
    k.push_back(number("probe.width", NLWAVE_FIELD(c.probe.width)));

    k.push_back(number("thresholds.decay_ratio", NLWAVE_FIELD(c.thresholds.decay_ratio)));
    k.push_back(number("thresholds.norm_ratio", NLWAVE_FIELD(c.thresholds.norm_ratio)));
    k.push_back(number("thresholds.retraction_fraction", NLWAVE_FIELD(c.thresholds.retraction_fraction)));
    k.push_back(number("thresholds.monotone_tol", NLWAVE_FIELD(c.thresholds.monotone_tol)));
    k.push_back(number("thresholds.weak_probe_ratio", NLWAVE_FIELD(c.thresholds.weak_probe_ratio)));
    k.push_back(number("thresholds.strong_probe_ratio", NLWAVE_FIELD(c.thresholds.strong_probe_ratio)));
    k.push_back(number("thresholds.retract_threshold", NLWAVE_FIELD(c.thresholds.retract_threshold)));
    k.push_back(number("thresholds.concentration_ratio", NLWAVE_FIELD(c.thresholds.concentration_ratio)));
    k.push_back(number("thresholds.norm_blowup", NLWAVE_FIELD(c.thresholds.norm_blowup)));
    k.push_back(number("thresholds.conservation_drift", NLWAVE_FIELD(c.thresholds.conservation_drift)));
    k.push_back(number("thresholds.evenness_tol", NLWAVE_FIELD(c.thresholds.evenness_tol)));
    k.push_back(number("thresholds.q_crosscheck", NLWAVE_FIELD(c.thresholds.q_crosscheck)));

    k.push_back({"flux.shape",
                 [](RunConfig& c, const Token& t) {
                   c.flux.shape = parse_enum(t, {FluxShape::rectangle, FluxShape::parallelogram, FluxShape::hexagon});
                 },
                 [](const RunConfig& c) { return std::string(to_string(c.flux.shape)); }});
    k.push_back(number("flux.a", NLWAVE_FIELD(c.flux.a)));
    k.push_back(number("flux.b", NLWAVE_FIELD(c.flux.b)));
    k.push_back(number("flux.t0", NLWAVE_FIELD(c.flux.t0)));
    k.push_back(number("flux.h", NLWAVE_FIELD(c.flux.h)));
    k.push_back({"flux.right_leaning", [](RunConfig& c, const Token& t) { c.flux.right_leaning = parse_bool(t); },
                 [](const RunConfig& c) { return std::string(c.flux.right_leaning ? "true" : "false"); }});
    k.push_back({"flux.which",
                 [](RunConfig& c, const Token& t) { c.flux.which = parse_enum(t, {Going::plus, Going::minus}); },
                 [](const RunConfig& c) { return std::string(to_string(c.flux.which)); }});
    k.push_back(number("trapezoid.eta", NLWAVE_FIELD(c.flux.trap_eta)));
    k.push_back(number("trapezoid.t1", NLWAVE_FIELD(c.flux.trap_t1)));
    k.push_back(number("trapezoid.t2", NLWAVE_FIELD(c.flux.trap_t2)));

    k.push_back(number("ode.p", NLWAVE_FIELD(c.ode.p)));
    k.push_back(number("ode.a", NLWAVE_FIELD(c.ode.a)));
    k.push_back(number("ode.b", NLWAVE_FIELD(c.ode.b)));
    k.push_back(number("ode.delta", NLWAVE_FIELD(c.ode.delta)));
    k.push_back(number("ode.tol", NLWAVE_FIELD(c.ode.tol)));
    k.push_back(number("ode.ray_R", NLWAVE_FIELD(c.ode.ray_R)));
    k.push_back(number("ode.ray_R1", NLWAVE_FIELD(c.ode.ray_R1)));
    k.push_back(list("ode.ray_t", NLWAVE_FIELD(c.ode.ray_t)));
    k.push_back(list("cp.p", NLWAVE_FIELD(c.ode.cp_p)));
    return k;
  }();
  return table;
}

#undef NLWAVE_FIELD

inline const Key* find_key(std::string_view name) {
  for (const auto& k : keys())
    if (k.name == name) return &k;
  return nullptr;
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

inline void require_increasing(const std::vector<double>& v, const std::string& field) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(std::isfinite(v[i]) && v[i] >= 0.0, field + " must be finite and nonnegative");
    if (i) require(v[i] > v[i - 1], field + " must be increasing");
  }
}

}  // namespace config_detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : config_detail::keys()) out.push_back(k.name);
  return out;
}

/// Checks every physical parameter; throws ValidationError naming the field.
inline void validate(const RunConfig& c) {
  using config_detail::require;
  c.nl.validate();
  require(std::isfinite(c.dx) && c.dx > 0.0, "grid.dx must be positive");
  require(c.cfl > 0.0 && c.cfl <= 1.0, "cfl in (0,1]");
  if (c.x_min && c.x_max) require(*c.x_max > *c.x_min, "grid.x_max must exceed grid.x_min");
  require(std::isfinite(c.t_end) && c.t_end >= 0.0, "run.t_end must be nonnegative");
  require(c.c > 0.0 && c.c < 1.0, "c in (0,1)");
  require(std::isfinite(c.eta), "run.eta must be finite");
  require(c.diagnostic_step > 0.0, "run.diagnostic_step must be positive");
  require(c.blowup_guard > 0.0, "run.blowup_guard must be positive");
  config_detail::require_increasing(c.t_samples, "run.t_samples");
  config_detail::require_increasing(c.snapshots, "run.snapshots");
  for (double t : c.t_samples) require(t <= c.t_end, "run.t_samples must lie in [0, run.t_end]");
  for (double t : c.snapshots) require(t <= c.t_end, "run.snapshots must lie in [0, run.t_end]");
  require(c.init.width > 0.0, "init.width must be positive");
  require(c.init.power >= 1, "init.power must be at least 1");
  require(std::isfinite(c.init.amplitude) && std::isfinite(c.init.coupling), "init values must be finite");
  require(c.init.separation > 0.0, "init.separation must be positive");
  require(c.init.levine_multiple >= 0.0, "init.levine_multiple must be nonnegative");
  require(c.probe.width > 0.0, "probe.width must be positive");
  const auto& th = c.thresholds;
  for (double v : {th.decay_ratio, th.norm_ratio, th.retraction_fraction, th.monotone_tol, th.weak_probe_ratio,
                   th.strong_probe_ratio, th.retract_threshold, th.concentration_ratio, th.norm_blowup,
                   th.conservation_drift, th.evenness_tol, th.q_crosscheck})
    require(std::isfinite(v) && v >= 0.0, "thresholds must be finite and nonnegative");
  require(c.flux.b > c.flux.a, "flux.b must exceed flux.a");
  require(c.flux.h > 0.0 && c.flux.t0 >= 0.0, "flux.h must be positive and flux.t0 nonnegative");
  require(c.flux.trap_t2 > c.flux.trap_t1 && c.flux.trap_t1 >= 0.0, "trapezoid needs 0 <= t1 < t2");
  require(c.ode.p > 1.0, "p must exceed 1");
  require(c.ode.delta > 0.0 && c.ode.delta < 1.0, "ode.delta in (0,1)");
  require(c.ode.tol > 0.0, "ode.tol must be positive");
  require(c.ode.ray_R > 0.0 && c.ode.ray_R1 > c.ode.ray_R, "ode.ray_R, ode.ray_R1 need 0 < R < R1");
  config_detail::require_increasing(c.ode.ray_t, "ode.ray_t");
  for (double p : c.ode.cp_p) require(p > 1.0, "p must exceed 1");
}

/// Applies the `key = value` lines of `text` on top of `cfg`.
inline void apply_config_text(RunConfig& cfg, std::string_view text) {
  std::vector<std::string> seen;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (config_detail::trim(line).empty()) continue;
    const auto eq = line.find('=');
    const auto key_col = line.find_first_not_of(" \t") + 1;
    if (eq == std::string_view::npos) throw ParseError(line_no, key_col, "expected 'key = value'");
    const auto key = config_detail::trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(line_no, key_col, "missing key");
    const auto* k = config_detail::find_key(key);
    if (!k) throw ParseError(line_no, key_col, "unknown key '" + std::string(key) + "'");
    for (const auto& s : seen)
      if (s == key) throw ParseError(line_no, key_col, "duplicate key '" + std::string(key) + "'");
    seen.emplace_back(key);
    const auto raw = line.substr(eq + 1);
    const auto lead = raw.find_first_not_of(" \t");
    const std::size_t value_col = eq + 2 + (lead == std::string_view::npos ? 0 : lead);
    k->set(cfg, {config_detail::trim(raw), line_no, value_col});
  }
}

/// File text plus `key=value` overrides (each override is its own line 1),
/// validated.
inline RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {}) {
  RunConfig cfg;
  apply_config_text(cfg, text);
  for (const auto& o : overrides) apply_config_text(cfg, o);
  validate(cfg);
  return cfg;
}

/// Every key with its current value, in the order of config_keys().
inline std::string emit_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : config_detail::keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

inline InitialData make_initial_data(const RunConfig& c) {
  const auto& s = c.init;
  double amp = s.amplitude;
  if (s.levine_multiple > 0.0) {
    if (s.kind == InitKind::zero || s.kind == InitKind::two_bump)
      throw ValidationError("init.levine_multiple needs a gaussian or polynomial_bump shape");
    const auto shape = s.kind == InitKind::gaussian ? InitialData::gaussian(1.0, s.center, s.width)
                                                    : InitialData::polynomial_bump(1.0, s.center, s.width, s.power);
    const auto sup = *shape.support();
    amp = s.levine_multiple * levine_threshold(shape, c.nl.p, sup.lo, sup.hi);
  }
  switch (s.kind) {
    case InitKind::gaussian: return InitialData::gaussian(amp, s.center, s.width, s.coupling);
    case InitKind::polynomial_bump: return InitialData::polynomial_bump(amp, s.center, s.width, s.power, s.coupling);
    case InitKind::two_bump:
      return InitialData::bumps({GaussianBump{amp, s.center - 0.5 * s.separation, s.width},
                                 GaussianBump{amp, s.center + 0.5 * s.separation, s.width}},
                                s.coupling);
    case InitKind::zero: return InitialData::zero();
  }
  return InitialData::zero();
}

/// Grid for a run to `horizon`; auto ends use the default light-cone domain.
inline GridSpec make_grid(const RunConfig& c, const InitialData& init, double horizon) {
  if (c.x_min && c.x_max) return GridSpec::with_spacing(*c.x_min, *c.x_max, c.dx, c.cfl);
  GridSpec g = init.support()->empty() ? default_domain(InitialData::polynomial_bump(0.0), horizon, c.dx, c.cfl)
                                       : default_domain(init, horizon, c.dx, c.cfl);
  if (c.x_min) g = GridSpec::with_spacing(*c.x_min, g.x_max, c.dx, c.cfl);
  if (c.x_max) g = GridSpec::with_spacing(g.x_min, *c.x_max, c.dx, c.cfl);
  return g;
}

inline ExperimentConfig make_experiment(const RunConfig& c, Scenario s) {
  ExperimentConfig e;
  e.scenario = s;
  e.nl = c.nl;
  e.init = make_initial_data(c);
  e.t_end = c.t_end;
  e.grid = make_grid(c, e.init, c.t_end);
  e.c = c.c;
  e.eta = c.eta;
  e.t_samples = c.t_samples;
  e.probe = c.probe;
  e.thresholds = c.thresholds;
  e.solver.blowup_guard = c.blowup_guard;
  return e;
}

inline OdeParams make_ode_params(const RunConfig& c) {
  OdeParams p;
  p.p = c.ode.p;
  p.a = c.ode.a;
  p.b = c.ode.b;
  p.delta = c.ode.delta;
  p.tol = c.ode.tol;
  return p;
}

inline PolygonPath make_path(const FluxSpec& f) {
  switch (f.shape) {
    case FluxShape::rectangle: return PolygonPath::rectangle(f.a, f.b, f.t0, f.t0 + f.h);
    case FluxShape::parallelogram: return PolygonPath::parallelogram(f.a, f.b - f.a, f.t0, f.h, f.right_leaning);
    case FluxShape::hexagon: return PolygonPath::hexagon(f.a, f.b, f.t0, f.h);
  }
  return PolygonPath::rectangle(f.a, f.b, f.t0, f.t0 + f.h);
}

}  // namespace nlwave
