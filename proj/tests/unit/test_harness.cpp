#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "strobe/harness.hpp"
#include "strobe/io.hpp"
#include "strobe/linalg.hpp"

using namespace strobe;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("strobe-test-" + name + "-" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, DefaultsAreValidAndRoundTrip) {
  ScenarioConfig c;
  EXPECT_TRUE(c.problems().empty());
  c.kind = ScenarioKind::Pump;
  c.theta = 0.3;
  c.phi = 0.07;
  c.chi_grid = {-0.2, 0.1};
  const auto back = ScenarioConfig::from_ini_string(c.to_ini());
  EXPECT_EQ(back.to_ini(), c.to_ini());
  EXPECT_EQ(back.hash(), c.hash());
  EXPECT_EQ(back.theta, 0.3);
  EXPECT_NE(ScenarioConfig{}.hash(), c.hash());
}

TEST(Config, ParsesIniSections) {
  const auto c = ScenarioConfig::from_ini_string(
      "[scenario]\nkind = cool-with-noise\nseed = 9\n[pump]\ntheta = pi/6\n"
      "[dissipation]\nratio_grid = 10, 100\n[angles]\nphi =\n");
  EXPECT_EQ(c.kind, ScenarioKind::Cool);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_NEAR(c.theta, 0.5235987755982988, 1e-15);
  EXPECT_EQ(c.ratio_grid, (std::vector<double>{10.0, 100.0}));
  EXPECT_FALSE(c.phi.has_value());
}

TEST(Config, EnumeratesEveryProblem) {
  try {
    ScenarioConfig::from_ini_string("[lattice]\nL = two\n[bogus]\nx = 1\n[noise]\nepg = 0.1\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.problems().size(), 2u);
  }
  ScenarioConfig c;
  c.kind = ScenarioKind::Thermalize;
  c.L = 3;
  c.p = 1.0;
  c.noise.epg = 0.5;
  c.phi_grid = {0.1, 0.11, 0.12, 0.13};
  c.g_grid = {0.5};
  EXPECT_EQ(c.problems().size(), 6u);
  EXPECT_THROW(run(c), ConfigError);
  NoiseModel n;
  n.channel = "amplitude";
  EXPECT_EQ(n.problems().size(), 1u);
}

TEST(Config, OutputDirectoryOverride) {
  ScenarioConfig c;
  c.output_dir = "here";
  ::setenv("STROBE_OUTPUT_DIR", "/tmp/elsewhere", 1);
  EXPECT_EQ(c.resolved_output_dir(), std::filesystem::path("/tmp/elsewhere"));
  ::unsetenv("STROBE_OUTPUT_DIR");
  EXPECT_EQ(c.resolved_output_dir(), std::filesystem::path("here"));
}

TEST(Config, EveryFieldIsSettable) {
  ScenarioConfig c;
  for (const auto& f : config_fields()) EXPECT_NE(f.help, "") << f.name;
  c.set("noise.epg", "1e-4");
  EXPECT_EQ(c.noise.epg, 1e-4);
  EXPECT_THROW(c.set("noise.nothing", "1"), ConfigError);
  EXPECT_THROW(c.set("lattice.L", "2.5"), ConfigError);
}

TEST(Noise, DepolarizingIsTracePreservingAndMixes) {
  MatrixXcd rho = MatrixXcd::Zero(4, 4);
  rho(0, 0) = 1.0;
  const MatrixXcd out = depolarize(rho, 0b11, 2, 0.3);
  EXPECT_NEAR(out.trace().real(), 1.0, 1e-14);
  EXPECT_NEAR(out(0, 0).real(), 0.7 + 0.3 * 3.0 / 15.0, 1e-14);
  // Full depolarization of the support: epg = 15/16 gives the maximally mixed state.
  const MatrixXcd full = depolarize(rho, 0b11, 2, 15.0 / 16.0);
  EXPECT_LT((full - MatrixXcd::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(depolarize(rho, 0b01, 2, 0.0), rho);
}

TEST(Entropy, ZeroWithoutNoiseAndNearlyLinear) {
  ScenarioConfig c;
  const auto rep = entropy_per_gate(c);
  EXPECT_EQ(rep.gates, 20u);
  ASSERT_EQ(rep.points.front().epg, 0.0);
  EXPECT_EQ(rep.points.front().delta_s, 0.0);
  for (std::size_t i = 1; i < rep.points.size(); ++i) {
    EXPECT_GT(rep.points[i].delta_s, rep.points[i - 1].delta_s);
  }
  EXPECT_NEAR(rep.exponent, 1.0, 0.15);
}

TEST(Cooling, EffectiveTemperature) {
  EXPECT_EQ(effective_temperature(0.0), 0.0);
  EXPECT_TRUE(std::isinf(effective_temperature(0.5)));
  const double t = 0.7;
  const double n = 1.0 / (1.0 + std::exp(2.0 / t));
  EXPECT_NEAR(effective_temperature(n), t, 1e-12);
}

TEST(Run, PumpScenarioWritesRecordAndIsDeterministic) {
  ScenarioConfig c;
  c.kind = ScenarioKind::Pump;
  c.output_dir = scratch("pump").string();
  const auto a = run(c);
  EXPECT_TRUE(a.passed());
  EXPECT_EQ(a.omega_definition, kOmegaDefinition);
  const auto first = slurp(std::filesystem::path(c.output_dir) / "pump_metrics.csv");
  const auto record = slurp(std::filesystem::path(c.output_dir) / "pump_record.json");
  const auto b = run(c);
  EXPECT_EQ(a.metrics_csv(), b.metrics_csv());
  EXPECT_EQ(slurp(std::filesystem::path(c.output_dir) / "pump_metrics.csv"), first);
  EXPECT_EQ(slurp(std::filesystem::path(c.output_dir) / "pump_record.json"), record);
  const auto j = nlohmann::json::parse(record);
  EXPECT_EQ(j["schema"], "strobe.run_record/1");
  EXPECT_NEAR(j["summary"]["pump"]["populations"][0].get<double>(), 0.5, 1e-4);
  std::filesystem::remove_all(c.output_dir);
}

TEST(Run, SequenceScanReportsSlopes) {
  ScenarioConfig c;
  c.kind = ScenarioKind::SequenceScan;
  c.output_dir = scratch("seq").string();
  const auto rec = run(c);
  bool found = false;
  for (const auto& a : rec.assertions) {
    if (a.name == "echoed residual slope >= 5.5") found = a.passed;
  }
  EXPECT_TRUE(found);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(c.output_dir) / "sequence-scan_order_fit.csv"));
  std::filesystem::remove_all(c.output_dir);
}

TEST(FigureData, SchemaMismatchOnReemit) {
  const TorusLattice lat(2);
  const auto scan = fidelity_scan(lat, std::vector<double>{0.0}, 0.05);
  const auto dir = scratch("fig");
  emit_figure_data(FigureKind::Spectrum, scan, dir / "s.csv");
  emit_figure_data(FigureKind::Spectrum, scan, dir / "s.csv");
  EXPECT_THROW(emit_figure_data(FigureKind::Fidelity, scan, dir / "s.csv"), SchemaMismatch);
  const auto text = slurp(dir / "s.csv");
  EXPECT_EQ(text.rfind("# schema: strobe.spectrum/1\n", 0), 0u);
  // one row per (chi, eigenvalue index)
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2 + 6);
  std::filesystem::remove_all(dir);
}

TEST(FigureData, GoldenL2FilesRegenerate) {
  const TorusLattice lat(2);
  ScanOptions opts;
  opts.eigen.seed = ScenarioConfig{}.seed;
  const std::vector<double> chis{0.0, 0.1, 0.2, 0.3};
  const auto scan = fidelity_scan(lat, chis, 0.05, opts);
  const std::filesystem::path golden = STROBE_GOLDEN_DIR;
  EXPECT_EQ(spectrum_csv(scan), slurp(golden / "spectrum_L2.csv"));
  EXPECT_EQ(fidelity_csv(scan), slurp(golden / "fidelity_L2.csv"));
}
