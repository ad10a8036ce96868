#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "nlwave/config.hpp"
#include "nlwave/energy.hpp"
#include "nlwave/experiments.hpp"
#include "nlwave/flux.hpp"
#include "nlwave/io.hpp"
#include "nlwave/leapfrog.hpp"
#include "nlwave/selfsimilar.hpp"
#include "nlwave/trajectory.hpp"

// Subcommand execution shared by the CLI and the tests: every run writes
// its artifacts through an io::OutputSet and finishes with manifest.json.

namespace nlwave::runner {

namespace fs = std::filesystem;
using io::Json;

inline const std::vector<std::string> kExperimentCommands{"decay",      "tail",     "retraction",
                                                           "conjecture", "focusing", "concentration"};

struct Outcome {
  int exit = 0;
  std::string status;  // verdict or "ok"
};

inline Outcome run_simulate(const RunConfig& cfg, io::OutputSet& out) {
  const auto init = make_initial_data(cfg);
  const auto grid = make_grid(cfg, init, cfg.t_end);
  std::vector<double> diag_times;
  for (std::size_t k = 0;; ++k) {
    const double t = cfg.diagnostic_step * static_cast<double>(k);
    if (t > cfg.t_end + 1e-12) break;
    diag_times.push_back(t);
  }
  const auto snaps = cfg.snapshots.empty() ? std::vector<double>{cfg.t_end} : cfg.snapshots;

  std::vector<io::DiagnosticsRow> rows;
  std::vector<FieldState> states;
  Observer diag{diag_times, [&](const FieldState& s) {
                  const auto tot = conserved_pair(compute_densities(s, grid, cfg.nl), grid);
                  rows.push_back({s.t, tot.E, tot.M, tot.E_plus, tot.E_minus});
                }};
  Observer dump{snaps, [&](const FieldState& s) { states.push_back(s); }};
  SolverOptions opt;
  opt.blowup_guard = cfg.blowup_guard;
  const auto res = evolve(init, grid, cfg.nl, cfg.t_end, {diag, dump}, {}, opt);

  out.write("diagnostics.csv", io::diagnostics_csv(rows));
  Json dumps = Json::array();
  for (std::size_t i = 0; i < states.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "state_%03zu.csv", i);
    out.write(name, io::state_csv(states[i], grid));
    dumps.push_back({{"file", name}, {"t", states[i].t}});
  }
  const double E0 = rows.front().E;
  double drift = 0.0;
  for (const auto& r : rows) drift = std::max(drift, E0 != 0.0 ? std::fabs(r.E - E0) / std::fabs(E0) : 0.0);
  out.write_json("simulate.json", Json{{"grid",
                                        {{"x_min", grid.x_min},
                                         {"x_max", grid.x_max},
                                         {"n_cells", grid.n_cells},
                                         {"dx", grid.dx()},
                                         {"dt", grid.dt()}}},
                                       {"steps", res.steps},
                                       {"t_final", res.final_state.t},
                                       {"energy_drift", drift},
                                       {"snapshots", dumps},
                                       {"manifest", io::config_echo(cfg, "simulate")}});
  return {0, "ok"};
}

inline double path_top(const FluxSpec& f) { return f.t0 + (f.shape == FluxShape::hexagon ? 2.0 : 1.0) * f.h; }

inline Outcome run_flux_check(const RunConfig& cfg, io::OutputSet& out) {
  const auto init = make_initial_data(cfg);
  const double t_top = path_top(cfg.flux);
  const auto grid = make_grid(cfg, init, std::max(cfg.t_end, t_top));
  const auto path = make_path(cfg.flux);
  const double reach = cfg.flux.h * (cfg.flux.shape == FluxShape::rectangle ? 0.0 : 1.0);
  const auto tr = record_trajectory(init, grid, cfg.nl, t_top, Interval{cfg.flux.a - reach, cfg.flux.b + reach});
  const auto rep = flux_loop(tr, path, cfg.flux.which);
  auto j = io::flux_json(rep);
  j["shape"] = to_string(cfg.flux.shape);
  j["dx"] = grid.dx();
  j["manifest"] = io::config_echo(cfg, "flux-check");
  out.write_json("flux.json", j);
  return {0, "ok"};
}

inline Outcome run_trapezoid(const RunConfig& cfg, io::OutputSet& out) {
  const auto init = make_initial_data(cfg);
  const auto& f = cfg.flux;
  const auto grid = make_grid(cfg, init, std::max(cfg.t_end, f.trap_t2));
  const auto tr = record_trajectory(init, grid, cfg.nl, f.trap_t2);
  auto j = io::trapezoid_json(trapezoid_check(tr, f.trap_eta, f.trap_t1, f.trap_t2, f.which));
  j["dx"] = grid.dx();
  j["manifest"] = io::config_echo(cfg, "trapezoid");
  out.write_json("trapezoid.json", j);
  return {0, "ok"};
}

inline Outcome run_scenario(const std::string& name, const RunConfig& cfg, io::OutputSet& out) {
  const auto rep = run_experiment(make_experiment(cfg, scenario_from_string(name)));
  out.write("series.csv", io::series_csv(rep));
  out.write_json("report.json", io::report_json(rep, cfg));
  return {exit_code(rep.verdict), std::string(to_string(rep.verdict))};
}

inline Outcome run_selfsimilar(const RunConfig& cfg, io::OutputSet& out) {
  const auto prm = make_ode_params(cfg);
  const auto sol = integrate_profile(prm);
  const auto se = semi_energy(sol);
  const auto decay = ray_energy_decay(sol, cfg.ode.ray_R, cfg.ode.ray_R1, cfg.ode.ray_t);
  out.write("profile.csv", io::profile_csv(sol, se));
  out.write("decay.csv", io::decay_csv(decay));
  out.write_json("selfsimilar.json", Json{{"p", prm.p},
                                          {"beta", prm.beta()},
                                          {"C_p", se.C_p},
                                          {"A_estimate", se.A_estimate},
                                          {"max_rate_mismatch", se.max_rate_mismatch()},
                                          {"accepted_steps", sol.accepted_steps},
                                          {"rejected_steps", sol.rejected_steps},
                                          {"manifest", io::config_echo(cfg, "selfsimilar")}});
  return {0, "ok"};
}

inline Outcome dispatch(const std::string& cmd, const RunConfig& cfg, io::OutputSet& out) {
  if (cmd == "simulate") return run_simulate(cfg, out);
  if (cmd == "flux-check") return run_flux_check(cfg, out);
  if (cmd == "trapezoid") return run_trapezoid(cfg, out);
  if (cmd == "selfsimilar") return run_selfsimilar(cfg, out);
  if (cmd == "cp-table") {
    out.write("cp_table.csv", io::cp_table_csv(cfg.ode.cp_p));
    return {0, "ok"};
  }
  for (const auto& s : kExperimentCommands)
    if (cmd == s) return run_scenario(cmd, cfg, out);
  throw InvalidParams("unknown subcommand '" + cmd + "'");
}

/// Runs `cmd` into `dir` and writes the manifest last.
inline Outcome execute(const std::string& cmd, const RunConfig& cfg, const fs::path& dir,
                const std::vector<std::pair<std::string, std::string>>& inputs) {
  io::RunManifest m;
  m.subcommand = cmd;
  m.config = cfg;
  m.inputs = inputs;
  m.start_time = io::utc_now();
  io::OutputSet out(dir);
  const auto res = dispatch(cmd, cfg, out);
  m.end_time = io::utc_now();
  m.outputs = out.files();
  io::write_text(dir / "manifest.json", m.to_json().dump(2) + "\n");
  return res;
}

/// Re-executes a manifest into `dir` and compares every output digest.
inline Outcome replay(const fs::path& manifest_path, const fs::path& dir) {
  const auto m = io::RunManifest::from_json(Json::parse(io::read_text(manifest_path)));
  const auto res = execute(m.subcommand, m.config, dir, m.inputs);
  const auto fresh = io::RunManifest::from_json(Json::parse(io::read_text(dir / "manifest.json")));
  Json files = Json::array();
  bool same = fresh.outputs.size() == m.outputs.size();
  for (std::size_t i = 0; i < m.outputs.size(); ++i) {
    const bool match = i < fresh.outputs.size() && fresh.outputs[i] == m.outputs[i];
    same = same && match;
    files.push_back({{"path", m.outputs[i].first}, {"sha256", m.outputs[i].second}, {"identical", match}});
  }
  io::write_text(dir / "replay.json",
                 Json{{"manifest", manifest_path.string()}, {"identical", same}, {"files", files}}.dump(2) + "\n");
  return same ? Outcome{0, "identical"} : Outcome{2, "different (run status " + res.status + ")"};
}


inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> all = [] {
    std::vector<std::string> c{"simulate", "flux-check", "trapezoid", "selfsimilar", "cp-table"};
    c.insert(c.end(), kExperimentCommands.begin(), kExperimentCommands.end());
    return c;
  }();
  return all;
}

}  // namespace nlwave::runner
