#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "nlwave/experiments.hpp"

using namespace nlwave;

namespace {

ExperimentConfig gaussian_config(Scenario s, double t_end, double dx = 5e-3) {
  ExperimentConfig cfg;
  cfg.scenario = s;
  cfg.init = InitialData::gaussian(1.0);
  cfg.t_end = t_end;
  cfg.grid = default_domain(cfg.init, t_end, dx);
  return cfg;
}

ExperimentConfig zero_config(Scenario s, double t_end) {
  ExperimentConfig cfg;
  cfg.scenario = s;
  cfg.t_end = t_end;
  cfg.grid = GridSpec::with_spacing(-10.0, 10.0, 1e-2);
  return cfg;
}

bool all_zero(const std::vector<double>& v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

Verdict expected_verdict(const ExperimentReport& rep) {
  bool inconclusive = false;
  for (const auto& c : rep.checks) {
    if (c.name == "conservation" && c.verdict == Verdict::inconclusive) return Verdict::inconclusive;
    if (c.verdict == Verdict::fail) return Verdict::fail;
    if (c.verdict == Verdict::inconclusive) inconclusive = true;
  }
  return inconclusive ? Verdict::inconclusive : Verdict::pass;
}

// Composite Simpson with n (even) panels.
template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(Verdicts, NamesAndExitCodes) {
  EXPECT_EQ(exit_code(Verdict::pass), 0);
  EXPECT_EQ(exit_code(Verdict::fail), 2);
  EXPECT_EQ(exit_code(Verdict::inconclusive), 3);
  for (Scenario s : {Scenario::decay, Scenario::tail, Scenario::retraction, Scenario::conjecture,
                     Scenario::focusing, Scenario::concentration})
    EXPECT_EQ(scenario_from_string(to_string(s)), s);
  EXPECT_THROW(scenario_from_string("blowup"), ValidationError);
}

TEST(ProbeFunction, DerivativeMatchesDifference) {
  const ProbeFunction g{0.5, 1.5};
  EXPECT_EQ(g.value(g.lo()), 0.0);
  EXPECT_EQ(g.value(g.hi() + 1.0), 0.0);
  EXPECT_DOUBLE_EQ(g.value(0.5), 1.0);
  const double h = 1e-5;
  for (double s = -0.9; s < 1.9; s += 0.1)
    EXPECT_NEAR(g.derivative(s), (g.value(s + h) - g.value(s - h)) / (2 * h), 1e-8) << s;
}

TEST(LevineThreshold, MatchesClosedFormForQuarticBump) {
  // u0 = (1 - x^2)^2: int u0'^2 = 256/105, int u0^4 = int (1-x^2)^8 = 2^17 (8!)^2 / 17!
  const double grad = 256.0 / 105.0;
  const double pot = std::ldexp(1.0, 17) * std::pow(std::tgamma(9.0), 2) / std::tgamma(18.0);
  const double closed = std::sqrt(2.0 * grad / pot);
  const double A = levine_threshold(InitialData::polynomial_bump(1.0), 3.0, -1.0, 1.0);
  EXPECT_NEAR(A, closed, 1e-10 * closed);
}

TEST(LevineThreshold, EnergyChangesSignAtThreshold) {
  const auto shape = InitialData::gaussian(1.0, 0.0, 0.7);
  const double p = 5.0;
  const double A = levine_threshold(shape, p, -6.0, 6.0);
  auto energy = [&](double amp) {
    const double g = simpson([&](double x) { return std::pow(amp * shape.du0(x), 2); }, -6.0, 6.0, 20000);
    const double q = simpson([&](double x) { return std::pow(std::fabs(amp * shape.u0(x)), p + 1.0); }, -6.0, 6.0, 20000);
    return 0.5 * g - q / (p + 1.0);
  };
  EXPECT_GT(energy(0.99 * A), 0.0);
  EXPECT_LT(energy(1.01 * A), 0.0);
  EXPECT_THROW(levine_threshold(InitialData::zero(), 3.0, -1.0, 1.0), InvalidParams);
}

TEST(DefaultDomain, CoversTheLightCone) {
  const auto g = default_domain(InitialData::polynomial_bump(1.0, 0.0, 2.0), 10.0, 0.01);
  EXPECT_DOUBLE_EQ(g.x_min, -14.0);
  EXPECT_DOUBLE_EQ(g.x_max, 14.0);
  EXPECT_NEAR(g.dx(), 0.01, 1e-12);
  const auto h = default_domain(InitialData::gaussian(1.0), 60.0, 2e-3);
  const double cells = h.x_max / h.dx();
  EXPECT_NEAR(cells, std::round(cells), 1e-9);
  EXPECT_GE(h.x_max, 60.0 + InitialData::gaussian(1.0).support()->hi + 2.0);
  EXPECT_THROW(default_domain(InitialData::self_similar_trace(1.0, 0.0, 3.0), 10.0, 0.01), ValidationError);
}

TEST(Decay, ZeroDataPasses) {
  const auto rep = run_decay(zero_config(Scenario::decay, 5.0));
  EXPECT_EQ(rep.verdict, Verdict::pass);
  for (const char* name : {"E_plus_behind", "E_minus_ahead", "central_energy", "Lp1_norm", "sup_norm"})
    EXPECT_TRUE(all_zero(rep.get(name))) << name;
}

TEST(Decay, RightMoverLeavesNothingBehind) {
  ExperimentConfig cfg;
  cfg.nl.sign = Sign::disabled;
  cfg.init = InitialData::polynomial_bump(1.0, 0.0, 1.0, 3, -1.0);
  cfg.t_end = 20.0;
  cfg.grid = default_domain(cfg.init, cfg.t_end, 1e-2);
  cfg.t_samples = {4.0, 10.0, 20.0};
  const auto rep = run_decay(cfg);
  const auto& behind = rep.get("E_plus_behind");
  ASSERT_EQ(behind.size(), 4u);
  EXPECT_GT(behind[0], 0.0);  // t = 0
  for (std::size_t i = 1; i < behind.size(); ++i) EXPECT_EQ(behind[i], 0.0) << rep.t[i];
  EXPECT_EQ(rep.check("E_plus_behind").verdict, Verdict::pass);
}

TEST(Decay, GaussianEnergyGatesAndMorawetz) {
  const auto cfg = gaussian_config(Scenario::decay, 60.0);
  const auto rep = run_decay(cfg);
  EXPECT_DOUBLE_EQ(rep.t.front(), 0.0);
  EXPECT_GE(rep.t.back(), 60.0);
  EXPECT_LT(rep.t.back(), 60.0 + cfg.grid.dt());
  EXPECT_LE(rep.value("E_plus_behind_ratio"), 0.1);
  EXPECT_LE(rep.value("E_minus_ahead_ratio"), 0.1);
  EXPECT_LE(rep.value("central_energy_ratio"), 0.1);
  EXPECT_EQ(rep.check("morawetz_monotone").verdict, Verdict::pass);
  EXPECT_EQ(rep.check("conservation").verdict, Verdict::pass);
  // even data: the two halves mirror each other
  EXPECT_NEAR(rep.value("E_plus_behind_ratio"), rep.value("E_minus_ahead_ratio"), 1e-12);
  EXPECT_EQ(rep.verdict, expected_verdict(rep));
}

TEST(Decay, RejectsInvalidParameters) {
  auto cfg = gaussian_config(Scenario::decay, 5.0, 1e-2);
  cfg.c = 1.0;
  EXPECT_THROW(run_decay(cfg), ValidationError);
  cfg.c = 0.5;
  cfg.nl.sign = Sign::focusing;
  EXPECT_THROW(run_decay(cfg), InvalidParams);
  cfg.nl.sign = Sign::defocusing;
  cfg.t_samples = {3.0, 2.0};
  EXPECT_THROW(run_decay(cfg), ValidationError);
  cfg.t_samples = {6.0};
  EXPECT_THROW(run_decay(cfg), ValidationError);
}

TEST(Tail, ExactlyZeroBeyondTheCone) {
  auto cfg = gaussian_config(Scenario::tail, 30.0);
  const auto rep = run_tail(cfg);
  EXPECT_EQ(rep.verdict, Verdict::pass);
  EXPECT_EQ(rep.value("sup_tail_R0"), 0.0);
  EXPECT_EQ(rep.value("sup_tail_R0_plus_1"), 0.0);
  EXPECT_GT(rep.value("R0"), 5.0);
  EXPECT_LT(rep.value("R0"), 6.0);
}

TEST(Tail, ZeroDataAndNoncompactData) {
  const auto rep = run_tail(zero_config(Scenario::tail, 5.0));
  EXPECT_EQ(rep.verdict, Verdict::pass);
  EXPECT_TRUE(all_zero(rep.get("tail_R0")));
  auto cfg = zero_config(Scenario::tail, 5.0);
  cfg.init = InitialData::self_similar_trace(1.0, 0.0, 3.0);
  EXPECT_THROW(run_tail(cfg), InvalidParams);
}

TEST(Tail, NotesTheWiderLatticeConeBelowUnitCfl) {
  auto cfg = gaussian_config(Scenario::tail, 10.0, 1e-2);
  cfg.grid.cfl = 0.9;
  const auto rep = run_tail(cfg);
  EXPECT_FALSE(rep.notes.empty());
}

TEST(Retraction, GaussianCapturesEnergy) {
  auto cfg = gaussian_config(Scenario::retraction, 40.0);
  const auto rep = run_retraction(cfg);
  EXPECT_EQ(rep.verdict, Verdict::pass);
  EXPECT_GT(rep.value("final_fraction"), 0.01);
  EXPECT_EQ(rep.get("E_eta").front(), 0.0);
}

TEST(Retraction, NegativeShiftContainsDataAtOnce) {
  auto cfg = gaussian_config(Scenario::retraction, 5.0);
  cfg.eta = -5.0;
  cfg.t_samples = {1.0, 5.0};
  const auto rep = run_retraction(cfg);
  const auto& e = rep.get("E_eta");
  ASSERT_EQ(e.size(), 3u);
  const double E = rep.value("E");
  EXPECT_GT(e[1], 0.5 * E);
  EXPECT_GE(e[2], e[1]);
}

TEST(Retraction, ZeroDataIsInconclusive) {
  const auto rep = run_retraction(zero_config(Scenario::retraction, 5.0));
  EXPECT_EQ(rep.verdict, Verdict::inconclusive);
}

TEST(Conjecture, ZeroDataGivesZeroProbes) {
  auto cfg = zero_config(Scenario::conjecture, 5.0);
  cfg.eta = 1.0;
  const auto rep = run_conjecture_probe(cfg);
  EXPECT_EQ(rep.verdict, Verdict::inconclusive);
  for (const char* name : {"E_plus_beyond_ray", "weak_probe", "strong_probe"}) EXPECT_TRUE(all_zero(rep.get(name))) << name;
}

TEST(Conjecture, WeakProbeMatchesQuadratureAtInitialTime) {
  auto cfg = gaussian_config(Scenario::conjecture, 1.0, 1e-3);
  cfg.eta = 1.0;
  cfg.t_samples = {0.0};
  const auto rep = run_conjecture_probe(cfg);
  // int u_0'(s) g(s) ds with the analytic derivative
  const double oracle =
      simpson([&](double s) { return cfg.init.du0(s) * cfg.probe.value(s); }, cfg.probe.lo(), cfg.probe.hi(), 2000);
  EXPECT_NEAR(rep.get("weak_probe").front(), oracle, 1e-6 * std::fabs(oracle));
}

TEST(Conjecture, BeyondRayEnergyIsMonotone) {
  auto cfg = gaussian_config(Scenario::conjecture, 40.0);
  cfg.eta = 1.0;
  const auto rep = run_conjecture_probe(cfg);
  EXPECT_EQ(rep.check("beyond_ray_monotone").verdict, Verdict::pass);
  EXPECT_EQ(rep.check("strong_probe").verdict, Verdict::pass);
  EXPECT_NE(rep.verdict, Verdict::pass);
  EXPECT_GE(rep.t.front(), 5.0);
  EXPECT_LT(rep.t.front(), 5.0 + cfg.grid.dt());
}

TEST(Conjecture, NeverCertifiesTheOpenStatement) {
  auto cfg = gaussian_config(Scenario::conjecture, 20.0);
  cfg.eta = 1.0;
  cfg.thresholds.retract_threshold = 1.0;
  cfg.thresholds.weak_probe_ratio = 10.0;
  cfg.thresholds.strong_probe_ratio = 10.0;
  const auto rep = run_conjecture_probe(cfg);
  for (const auto& c : rep.checks) EXPECT_EQ(c.verdict, Verdict::pass) << c.name;
  EXPECT_EQ(rep.verdict, Verdict::inconclusive);
}

TEST(Conjecture, ProbeSupportMustLieRightOfTheRay) {
  auto cfg = gaussian_config(Scenario::conjecture, 5.0, 1e-2);
  cfg.eta = 1.0;
  cfg.probe = {0.0, 1.0};
  EXPECT_THROW(run_conjecture_probe(cfg), ValidationError);
}

TEST(Focusing, NegativeEnergyBlowsUp) {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::focusing;
  cfg.nl.sign = Sign::focusing;
  const double A = levine_threshold(InitialData::polynomial_bump(1.0), 3.0, -1.0, 1.0);
  cfg.init = InitialData::polynomial_bump(1.2 * A);
  cfg.t_end = 20.0;
  cfg.grid = default_domain(cfg.init, cfg.t_end, 2e-3);
  const auto rep = run_focusing(cfg);
  EXPECT_EQ(rep.verdict, Verdict::pass);
  EXPECT_EQ(rep.value("blowup_detected"), 1.0);
  EXPECT_LT(rep.value("blowup_time"), 20.0);
  EXPECT_LT(rep.value("energy"), 0.0);
  EXPECT_EQ(rep.value("norm_increasing_last10"), 1.0);
}

TEST(Focusing, SmallDataRunsToTheEnd) {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::focusing;
  cfg.nl.sign = Sign::focusing;
  const double A = levine_threshold(InitialData::polynomial_bump(1.0), 3.0, -1.0, 1.0);
  cfg.init = InitialData::polynomial_bump(0.01 * A);
  cfg.t_end = 20.0;
  cfg.grid = default_domain(cfg.init, cfg.t_end, 1e-2);
  const auto rep = run_focusing(cfg);
  EXPECT_EQ(rep.value("blowup_detected"), 0.0);
  EXPECT_GE(rep.t.back(), 20.0 - 1e-9);
  EXPECT_LT(rep.t.back(), 20.0 + cfg.grid.dt());
  EXPECT_EQ(rep.verdict, Verdict::fail);
}

TEST(Focusing, ZeroDataAndWrongSign) {
  auto cfg = zero_config(Scenario::focusing, 2.0);
  cfg.nl.sign = Sign::focusing;
  const auto rep = run_focusing(cfg);
  EXPECT_EQ(rep.verdict, Verdict::fail);
  EXPECT_TRUE(all_zero(rep.get("energy_norm")));
  cfg.nl.sign = Sign::defocusing;
  EXPECT_THROW(run_focusing(cfg), InvalidParams);
}

TEST(Concentration, SingleBumpCrossCheck) {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::concentration;
  cfg.init = InitialData::polynomial_bump(1.0, 0.0, 2.0);
  cfg.t_end = 2.0;
  cfg.grid = default_domain(cfg.init, cfg.t_end, 2e-3);
  cfg.t_samples = {0.0, 1.0, 2.0};
  const auto rep = run_concentration(cfg);
  EXPECT_LE(rep.value("q_crosscheck_relative"), 1e-10);
  EXPECT_EQ(rep.value("evenness_defect_max"), 0.0);
  EXPECT_EQ(rep.verdict, Verdict::pass);
}

TEST(Concentration, TwoBumpsStayApart) {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::concentration;
  cfg.init = InitialData::bumps({GaussianBump{1.0, -3.0, 1.0}, GaussianBump{1.0, 3.0, 1.0}}, 0.0);
  cfg.t_end = 50.0;
  cfg.grid = default_domain(cfg.init, cfg.t_end, 5e-3);
  const auto rep = run_concentration(cfg);
  EXPECT_EQ(rep.verdict, Verdict::pass);
  EXPECT_GE(rep.value("Q_min_ratio"), 0.2);
  EXPECT_EQ(rep.get("Q").size(), 46u);
}

TEST(Concentration, RejectsOddOrOffCentreData) {
  ExperimentConfig cfg;
  cfg.scenario = Scenario::concentration;
  cfg.init = InitialData::gaussian(1.0, 0.5);
  cfg.t_end = 5.0;
  cfg.grid = GridSpec::with_spacing(-12.0, 12.0, 1e-2);
  EXPECT_THROW(run_concentration(cfg), EvennessViolated);
  cfg.init = InitialData::gaussian(1.0, 0.0, 1.0, -1.0);  // odd velocity
  EXPECT_THROW(run_concentration(cfg), EvennessViolated);
  cfg.init = InitialData::gaussian(1.0);
  cfg.grid = GridSpec::with_spacing(-12.0, 13.0, 1e-2);
  EXPECT_THROW(run_concentration(cfg), InvalidParams);
}

TEST(Concentration, ZeroDataIsInconclusive) {
  const auto rep = run_concentration(zero_config(Scenario::concentration, 6.0));
  EXPECT_EQ(rep.verdict, Verdict::inconclusive);
  EXPECT_TRUE(all_zero(rep.get("Q")));
}

TEST(SideCondition, DriftBeyondToleranceIsInconclusive) {
  auto cfg = gaussian_config(Scenario::retraction, 10.0, 1e-2);
  cfg.thresholds.conservation_drift = 1e-14;
  const auto rep = run_retraction(cfg);
  EXPECT_EQ(rep.check("conservation").verdict, Verdict::inconclusive);
  EXPECT_EQ(rep.verdict, Verdict::inconclusive);
  EXPECT_EQ(rep.check("monotone").verdict, Verdict::pass);
}

TEST(Reports, AreDeterministic) {
  const auto cfg = gaussian_config(Scenario::decay, 10.0, 1e-2);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  ASSERT_EQ(a.series.size(), b.series.size());
  for (std::size_t i = 0; i < a.series.size(); ++i) EXPECT_EQ(a.series[i].values, b.series[i].values);
  EXPECT_EQ(a.t, b.t);
  EXPECT_EQ(a.verdict, b.verdict);
}
