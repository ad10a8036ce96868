#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "nlwave/config.hpp"
#include "nlwave/io.hpp"
#include "nlwave/runner.hpp"

using namespace nlwave;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("nlwave_test_" + name);
  fs::remove_all(p);
  return p;
}

template <class F>
ParseError parse_error_of(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no ParseError";
  return ParseError(0, 0, "");
}

std::string validation_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyTextGivesDocumentedDefaults) {
  const auto c = parse_config("");
  EXPECT_EQ(c.nl.p, 3.0);
  EXPECT_EQ(c.nl.sign, Sign::defocusing);
  EXPECT_EQ(c.init.kind, InitKind::gaussian);
  EXPECT_EQ(c.cfl, 1.0);
  EXPECT_EQ(c.dx, 2e-3);
  EXPECT_FALSE(c.x_min);
  EXPECT_EQ(c, RunConfig{});
}

TEST(Config, ValidationMessagesNameTheInvariant) {
  EXPECT_EQ(validation_message("nl.p = 0.5"), "p must exceed 1");
  EXPECT_EQ(validation_message("grid.cfl = 1.5"), "cfl in (0,1]");
  EXPECT_EQ(validation_message("grid.cfl = 0"), "cfl in (0,1]");
  EXPECT_EQ(validation_message("run.c = 1"), "c in (0,1)");
  EXPECT_EQ(validation_message("grid.dx = -1"), "grid.dx must be positive");
  EXPECT_EQ(validation_message("run.t_samples = 3, 2"), "run.t_samples must be increasing");
  EXPECT_EQ(validation_message("ode.delta = 1"), "ode.delta in (0,1)");
  EXPECT_EQ(validation_message("grid.x_min = 1\ngrid.x_max = -1"), "grid.x_max must exceed grid.x_min");
}

TEST(Config, ParseErrorsCarryLineAndColumn) {
  auto e = parse_error_of([] { parse_config("nl.p = 3\n\n  foo.bar = 1\n"); });
  EXPECT_EQ(e.line(), 3u);
  EXPECT_EQ(e.column(), 3u);
  e = parse_error_of([] { parse_config("# comment\ngrid.dx =  0.0x1"); });
  EXPECT_EQ(e.line(), 2u);
  EXPECT_EQ(e.column(), 12u);
  e = parse_error_of([] { parse_config("nl.sign = sideways"); });
  EXPECT_EQ(e.column(), 11u);
  e = parse_error_of([] { parse_config("run.t_samples = 1, 2, x"); });
  EXPECT_EQ(e.column(), 23u);
  e = parse_error_of([] { parse_config("nl.p 3"); });
  EXPECT_EQ(e.line(), 1u);
  e = parse_error_of([] { parse_config("nl.p = 3\nnl.p = 4"); });
  EXPECT_EQ(e.line(), 2u);
}

TEST(Config, CommentsWhitespaceAndOverrides) {
  const auto c = parse_config("  nl.p=5   # quintic\n\tnl.sign = focusing\r\ngrid.x_min = -30\n", {"nl.p=7", "run.eta=-1.5"});
  EXPECT_EQ(c.nl.p, 7.0);
  EXPECT_EQ(c.nl.sign, Sign::focusing);
  EXPECT_EQ(c.x_min, -30.0);
  EXPECT_EQ(c.eta, -1.5);
  EXPECT_THROW(parse_config("", {"no_such.key=1"}), ParseError);
}

TEST(Config, EmitParseRoundTrip) {
  RunConfig c;
  c.nl = {2.5, Sign::disabled};
  c.init.kind = InitKind::two_bump;
  c.init.amplitude = 0.1;
  c.init.coupling = 1.0 / 3.0;
  c.dx = 1.0 / 1024.0;
  c.cfl = 0.9;
  c.x_min = -12.25;
  c.t_end = 40.0;
  c.t_samples = {0.1, 0.2, 0.30000000000000004, 40.0};
  c.snapshots = {};
  c.thresholds.monotone_tol = 1e-300;
  c.flux.shape = FluxShape::hexagon;
  c.flux.right_leaning = false;
  c.flux.which = Going::minus;
  c.ode.ray_t = {};
  EXPECT_EQ(parse_config(emit_config(c)), c);
  EXPECT_EQ(parse_config(emit_config(RunConfig{})), RunConfig{});
}

TEST(Config, RandomConfigsRoundTrip) {
  std::mt19937_64 rng(20261018);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    RunConfig c;
    c.nl.p = 1.0 + 6.0 * unit(rng) + 1e-9;
    c.init.amplitude = std::ldexp(unit(rng) - 0.5, static_cast<int>(rng() % 40) - 20);
    c.init.center = unit(rng) - 0.5;
    c.dx = std::ldexp(unit(rng) + 0.01, -10);
    c.cfl = std::max(1e-3, unit(rng));
    c.t_end = 100.0 * unit(rng) + 1.0;
    for (int k = 0; k < 3; ++k) c.t_samples.push_back(c.t_end * (k + unit(rng)) / 3.0);
    c.probe.width = unit(rng) + 0.1;
    c.thresholds.decay_ratio = unit(rng);
    c.ode.a = 10.0 * (unit(rng) - 0.5);
    c.ode.b = std::numeric_limits<double>::denorm_min() * (trial + 1);
    if (trial % 2) c.x_max = 1e3 * unit(rng);
    ASSERT_EQ(parse_config(emit_config(c)), c) << emit_config(c);
  }
}

TEST(Config, EveryKeyIsEmittedOnce) {
  const auto keys = config_keys();
  const auto text = emit_config(RunConfig{});
  for (const auto& k : keys) {
    const auto first = text.find("\n" + k + " = ");
    const bool at_start = text.rfind(k + " = ", 0) == 0;
    EXPECT_TRUE(first != std::string::npos || at_start) << k;
  }
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), keys.size());
}

TEST(Config, LevineMultipleScalesTheThreshold) {
  const auto c = parse_config("nl.sign = focusing\ninit.kind = polynomial_bump\ninit.levine_multiple = 1.5");
  const auto init = make_initial_data(c);
  const double A = levine_threshold(InitialData::polynomial_bump(1.0), 3.0, -1.0, 1.0);
  EXPECT_NEAR(init.u0(0.0), 1.5 * A, 1e-12 * A);
  EXPECT_THROW(make_initial_data(parse_config("init.kind = zero\ninit.levine_multiple = 2")), ValidationError);
}

TEST(Config, GridResolution) {
  auto c = parse_config("grid.dx = 0.01\nrun.t_end = 10");
  const auto init = make_initial_data(c);
  const auto g = make_grid(c, init, c.t_end);
  EXPECT_GE(g.x_max, 10.0 + init.support()->hi + 2.0);
  EXPECT_EQ(g.x_min, -g.x_max);
  c = parse_config("grid.dx = 0.01\ngrid.x_min = -5\ngrid.x_max = 7");
  const auto h = make_grid(c, init, 1.0);
  EXPECT_EQ(h.x_min, -5.0);
  EXPECT_EQ(h.x_max, 7.0);
  EXPECT_EQ(h.n_cells, 1200u);
  const auto z = make_grid(parse_config("init.kind = zero\nrun.t_end = 3"), InitialData::zero(), 3.0);
  EXPECT_GE(z.x_max, 5.0);
}

TEST(Csv, ShortestRoundTripFormatting) {
  std::mt19937_64 rng(7);
  std::vector<double> a, b;
  for (int i = 0; i < 1000; ++i) {
    std::uint64_t bits = rng();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) v = 0.0;
    a.push_back(v);
    b.push_back(static_cast<double>(i) * 0.1);
  }
  std::vector<std::string> header;
  const auto rows = io::read_csv(io::csv_text({{"a", a}, {"b", b}}), &header);
  ASSERT_EQ(header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(rows.size(), a.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][0], a[i]);
    EXPECT_EQ(rows[i][1], b[i]);
  }
  EXPECT_EQ(io::csv_text({{"x", {0.1, 1e21, -2.5e-8}}}), "x\n0.1\n1e+21\n-2.5e-08\n");
  EXPECT_THROW(io::csv_text({{"x", {1.0}}, {"y", {}}}), InvalidParams);
}

TEST(Csv, CpTableHasTheCubicConstant) {
  const auto rows = io::read_csv(io::cp_table_csv({2.0, 3.0, 5.0}));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], 3.0);
  EXPECT_EQ(rows[1][1], 1.0);
  EXPECT_NEAR(rows[1][2], 5.0, 1e-12);
}

TEST(Digest, Sha256KnownVectors) {
  EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Runner, CpTableWritesCsvAndManifest) {
  const auto dir = scratch("cp");
  const auto res = runner::execute("cp-table", parse_config(""), dir, {});
  EXPECT_EQ(res.exit, 0);
  EXPECT_EQ(io::read_text(dir / "cp_table.csv").substr(0, 11), "p,beta,C_p\n");
  const auto m = io::RunManifest::from_json(io::Json::parse(io::read_text(dir / "manifest.json")));
  ASSERT_EQ(m.outputs.size(), 1u);
  EXPECT_EQ(m.outputs[0].first, "cp_table.csv");
  EXPECT_EQ(m.outputs[0].second, io::sha256_hex(io::read_text(dir / "cp_table.csv")));
  EXPECT_EQ(m.config, RunConfig{});
  fs::remove_all(dir);
}

TEST(Runner, SimulateZeroDataDumpsZeros) {
  const auto dir = scratch("zero");
  const auto res = runner::execute("simulate", parse_config("init.kind = zero\nrun.t_end = 2\ngrid.dx = 0.01"), dir, {});
  EXPECT_EQ(res.exit, 0);
  const auto state = io::read_csv(io::read_text(dir / "state_000.csv"));
  ASSERT_FALSE(state.empty());
  for (const auto& row : state) {
    EXPECT_EQ(row[1], 0.0);
    EXPECT_EQ(row[2], 0.0);
  }
  const auto diag = io::read_csv(io::read_text(dir / "diagnostics.csv"));
  EXPECT_EQ(diag.size(), 3u);
  fs::remove_all(dir);
}

TEST(Runner, ReportEchoesEveryDefault) {
  const auto dir = scratch("tail");
  const auto cfg = parse_config("run.t_end = 5\ngrid.dx = 0.01");
  const auto res = runner::execute("tail", cfg, dir, {});
  EXPECT_EQ(res.exit, 0);
  const auto j = io::Json::parse(io::read_text(dir / "report.json"));
  EXPECT_EQ(j.at("verdict"), "pass");
  const auto& echo = j.at("manifest").at("config");
  EXPECT_EQ(echo.size(), config_keys().size());
  for (const auto& k : config_keys()) EXPECT_TRUE(echo.contains(k)) << k;
  EXPECT_EQ(echo.at("grid.dx"), "0.01");
  fs::remove_all(dir);
}

TEST(Runner, ReplayReproducesDigests) {
  const auto dir = scratch("replay_a"), again = scratch("replay_b");
  runner::execute("retraction", parse_config("run.t_end = 6\ngrid.dx = 0.01"), dir, {});
  const auto res = runner::replay(dir / "manifest.json", again);
  EXPECT_EQ(res.exit, 0) << res.status;
  EXPECT_EQ(io::read_text(dir / "series.csv"), io::read_text(again / "series.csv"));
  EXPECT_EQ(io::read_text(dir / "report.json"), io::read_text(again / "report.json"));
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST(Runner, ReplayDetectsTampering) {
  const auto dir = scratch("tamper_a"), again = scratch("tamper_b");
  runner::execute("cp-table", parse_config(""), dir, {});
  auto j = io::Json::parse(io::read_text(dir / "manifest.json"));
  j["outputs"][0]["sha256"] = std::string(64, '0');
  io::write_text(dir / "manifest.json", j.dump(2));
  EXPECT_EQ(runner::replay(dir / "manifest.json", again).exit, 2);
  fs::remove_all(dir);
  fs::remove_all(again);
}

TEST(Runner, UnknownSubcommand) {
  io::OutputSet out(scratch("none"));
  EXPECT_THROW(runner::dispatch("plot", RunConfig{}, out), InvalidParams);
}
