#pragma once

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlwave/config.hpp"
#include "nlwave/energy.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/experiments.hpp"
#include "nlwave/flux.hpp"
#include "nlwave/grid.hpp"
#include "nlwave/selfsimilar.hpp"

namespace nlwave::io {

inline constexpr const char* kArtifactVersion = "nlwave 1.0.0";

using Json = nlohmann::ordered_json;

struct Column {
  std::string name;
  std::vector<double> values;
};

/// Comma-separated table, header row first, shortest round-trip numbers.
inline std::string csv_text(const std::vector<Column>& cols) {
  std::string out;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out += (i ? "," : "") + cols[i].name;
    if (i == 0) rows = cols[i].values.size();
    if (cols[i].values.size() != rows) throw InvalidParams("csv column '" + cols[i].name + "' has a different length");
  }
  out += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out += ',';
      out += config_detail::format_double(cols[i].values[r]);
    }
    out += '\n';
  }
  return out;
}

inline std::vector<std::vector<double>> read_csv(const std::string& text, std::vector<std::string>* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      if (header) *header = cells;
      first = false;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(config_detail::parse_double({c, rows.size() + 2, 1}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidParams("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw InvalidParams("write to '" + path.string() + "' failed");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidParams("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw InvalidParams("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string state_csv(const FieldState& s, const GridSpec& g) {
  return csv_text({{"x", g.nodes()}, {"u", s.u}, {"v", s.v}});
}

struct DiagnosticsRow {
  double t, E, M, E_plus, E_minus;
};

inline std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows) {
  std::vector<Column> cols{{"t", {}}, {"E", {}}, {"M", {}}, {"E_plus", {}}, {"E_minus", {}}};
  for (const auto& r : rows) {
    cols[0].values.push_back(r.t);
    cols[1].values.push_back(r.E);
    cols[2].values.push_back(r.M);
    cols[3].values.push_back(r.E_plus);
    cols[4].values.push_back(r.E_minus);
  }
  return csv_text(cols);
}

inline std::string profile_csv(const OdeSolution& sol, const SemiEnergyReport& rep) {
  std::vector<double> f, fp;
  for (std::size_t i = 0; i < sol.y.size(); ++i) {
    f.push_back(sol.f[i]);
    fp.push_back(sol.fprime[i]);
  }
  return csv_text({{"y", sol.y}, {"f", f}, {"fprime", fp}, {"Etilde", rep.Etilde_samples},
                   {"asymptotic_trace", rep.asymptotic_trace}});
}

inline std::string decay_csv(const std::vector<DecayRow>& rows) {
  Column t{"t", {}}, e{"ray_energy", {}};
  for (const auto& r : rows) {
    t.values.push_back(r.t);
    e.values.push_back(r.ray_energy);
  }
  return csv_text({t, e});
}

inline std::string cp_table_csv(const std::vector<double>& ps) {
  Column p{"p", ps}, beta{"beta", {}}, cp{"C_p", {}};
  for (double q : ps) {
    beta.values.push_back(2.0 / (q - 1.0));
    cp.values.push_back(cp_constant(q));
  }
  return csv_text({p, beta, cp});
}

/// Time column followed by every series recorded at the report times.
inline std::string series_csv(const ExperimentReport& rep) {
  std::vector<Column> cols{{"t", rep.t}};
  for (const auto& s : rep.series)
    if (s.values.size() == rep.t.size()) cols.push_back({s.name, s.values});
  return csv_text(cols);
}

/// The deterministic part of a manifest: version and the resolved config.
inline Json config_echo(const RunConfig& cfg, std::string_view subcommand) {
  Json c = Json::object();
  std::istringstream in(emit_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    c[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return Json{{"artifact_version", kArtifactVersion}, {"subcommand", subcommand}, {"config", c}};
}

inline Json thresholds_json(const Thresholds& th) {
  return Json{{"decay_ratio", th.decay_ratio},
              {"norm_ratio", th.norm_ratio},
              {"retraction_fraction", th.retraction_fraction},
              {"monotone_tol", th.monotone_tol},
              {"weak_probe_ratio", th.weak_probe_ratio},
              {"strong_probe_ratio", th.strong_probe_ratio},
              {"retract_threshold", th.retract_threshold},
              {"concentration_ratio", th.concentration_ratio},
              {"norm_blowup", th.norm_blowup},
              {"conservation_drift", th.conservation_drift},
              {"evenness_tol", th.evenness_tol},
              {"q_crosscheck", th.q_crosscheck}};
}

inline Json report_json(const ExperimentReport& rep, const RunConfig& cfg) {
  Json checks = Json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"verdict", to_string(c.verdict)}, {"detail", c.detail}});
  Json summary = Json::object();
  for (const auto& [k, v] : rep.summary) summary[k] = v;
  Json series = Json::object();
  for (const auto& s : rep.series) {
    if (s.values.empty()) continue;
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    series[s.name] = {{"first", s.values.front()}, {"last", s.values.back()}, {"min", *lo}, {"max", *hi}};
  }
  return Json{{"scenario", to_string(rep.scenario)},
              {"verdict", to_string(rep.verdict)},
              {"thresholds", thresholds_json(cfg.thresholds)},
              {"checks", checks},
              {"summary", summary},
              {"series_summary", series},
              {"notes", rep.notes},
              {"manifest", config_echo(cfg, to_string(rep.scenario))}};
}

inline Json flux_json(const FluxReport& rep) {
  Json edges = Json::array();
  for (const auto& e : rep.edges)
    edges.push_back({{"kind", to_string(e.edge.kind)},
                     {"from", {e.edge.from.x, e.edge.from.t}},
                     {"to", {e.edge.to.x, e.edge.to.t}},
                     {"value", e.value}});
  Json j{{"which", to_string(rep.which)}, {"edges", edges}, {"residual", rep.residual}, {"scale", rep.scale}};
  if (rep.decomposition) {
    const auto& d = *rep.decomposition;
    j["decomposition"] = {{"E_bottom", d.E_bottom}, {"E_top", d.E_top}, {"Q1", d.Q1},
                          {"Q2", d.Q2},             {"Q3", d.Q3},       {"Q4", d.Q4}};
  }
  return j;
}

inline Json trapezoid_json(const TrapezoidReport& r) {
  return Json{{"which", to_string(r.which)}, {"eta", r.eta},
              {"t1", r.t1},                  {"t2", r.t2},
              {"lhs", r.lhs},                {"lhs_right", r.lhs_right},
              {"rhs", r.rhs},                {"residual", r.residual()},
              {"residual_right", r.residual_right()}};
}

inline Json error_json(std::string_view kind, std::string_view message) {
  return Json{{"error", kind}, {"message", message}};
}

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Files a run wrote, in order, with their digests. Wall-clock times live
/// only here, so every other artifact is a pure function of the config.
struct RunManifest {
  std::string subcommand;
  RunConfig config;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, sha256
  std::vector<std::pair<std::string, std::string>> outputs;  // relative path, sha256
  std::string start_time;
  std::string end_time;

  Json to_json() const {
    Json in = Json::array(), out = Json::array();
    for (const auto& [p, d] : inputs) in.push_back({{"path", p}, {"sha256", d}});
    for (const auto& [p, d] : outputs) out.push_back({{"path", p}, {"sha256", d}});
    Json j = config_echo(config, subcommand);
    j["config_text"] = emit_config(config);
    j["inputs"] = in;
    j["outputs"] = out;
    j["start_time"] = start_time;
    j["end_time"] = end_time;
    return j;
  }

  static RunManifest from_json(const Json& j) {
    RunManifest m;
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config = parse_config(j.at("config_text").get<std::string>());
    for (const auto& e : j.at("inputs")) m.inputs.emplace_back(e.at("path"), e.at("sha256"));
    for (const auto& e : j.at("outputs")) m.outputs.emplace_back(e.at("path"), e.at("sha256"));
    m.start_time = j.value("start_time", "");
    m.end_time = j.value("end_time", "");
    return m;
  }
};

/// Writes artifacts under one directory and records them for the manifest.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& text) {
    write_text(dir_ / name, text);
    files_.emplace_back(name, sha256_hex(text));
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  const std::filesystem::path& dir() const { return dir_; }
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace nlwave::io
