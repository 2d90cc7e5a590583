#include "zakharov/harness/run.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "test_util.hpp"

namespace zakharov::harness {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("zakharov_harness_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

RunConfig small_soliton(const fs::path& out) {
  RunConfig c;
  c.grid = {32.0 * kPi, 256};
  c.solver = SolverConfig{1e-2, 1.0, 10, true};
  c.physics = {0.9, 4.0, 0.01};
  c.data.generator = "soliton";
  c.data.x0 = 16.0 * kPi;
  c.experiment.kind = "simulate";
  c.output = {out.string(), 50};
  return c;
}

RunConfig small_rough() {
  RunConfig c;
  c.grid = {8.0 * kPi, 64};
  c.solver = SolverConfig{1e-3, 1.0, 10, true};
  c.physics = {0.9, 2.0, 0.01};
  c.data.generator = "rough";
  c.data.seed = 3;
  return c;
}

struct CliResult {
  int status;
  std::string output;
};

CliResult run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ZAKHAROV_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(log)};
}

// ---- fit_power_law ------------------------------------------------------------

TEST(FitPowerLaw, ExactPowerLaw) {
  std::vector<double> x, y;
  for (double v : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    x.push_back(v);
    y.push_back(3.0 * std::pow(v, 1.5));
  }
  const FitResult f = fit_power_law(x, y);
  EXPECT_NEAR(f.exponent, 1.5, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-12);
  EXPECT_EQ(f.n_points, 5u);
}

TEST(FitPowerLaw, ConstantGivesZeroExponent) {
  const std::vector<double> x = {1, 2, 3, 5}, y = {7, 7, 7, 7};
  EXPECT_NEAR(fit_power_law(x, y).exponent, 0.0, 1e-14);
}

TEST(FitPowerLaw, NoisySquareLaw) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    const double v = std::pow(2.0, 0.5 * i);
    x.push_back(v);
    y.push_back(v * v * (1.0 + noise(rng)));
  }
  EXPECT_NEAR(fit_power_law(x, y).exponent, 2.0, 0.05);
}

TEST(FitPowerLaw, RejectsBadInput) {
  const std::vector<double> x = {1, 2, 3}, bad = {1, 0, 2}, two = {1, 2};
  EXPECT_THROW(fit_power_law(x, bad), InvalidArgument);
  EXPECT_THROW(fit_power_law(two, two), InvalidArgument);
}

// ---- config ------------------------------------------------------------------

TEST(Config, RoundTripsBitExactly) {
  for (const char* name : {"soliton.json", "increment_sweep.json", "window_scaling.json", "growth.json",
                           "cutoff_scaling.json", "strichartz.json", "bilinear_ws.json", "bilinear_ss.json"}) {
    const RunConfig c = load_config(std::string(ZAKHAROV_CONFIG_DIR) + "/" + name);
    const std::string text = serialize(c);
    const RunConfig back = parse_config_text(text);
    EXPECT_TRUE(back == c) << name;
    EXPECT_EQ(serialize(back), text) << name;
  }
  RunConfig c = small_rough();
  c.grid.L = 0.1 + 0.2;
  c.physics.N = std::nextafter(3.0, 4.0);
  EXPECT_TRUE(parse_config_text(serialize(c)) == c);
}

TEST(Config, UnknownKeyIsNamed) {
  try {
    parse_config_text(R"({"solver": {"dt": 0.01, "T": 1, "stride": 3}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "solver.stride");
  }
  try {
    parse_config_text(R"({"data": {"generator": "soliton", "params": {"a": 1, "amp": 2}}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "data.params.amp");
  }
  try {
    parse_config_text(R"({"experiment": {"kind": "growth", "Ns": [8]}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "experiment.Ns");
  }
}

TEST(Config, TypeAndDomainErrorsNameTheKey) {
  auto key_of = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return e.key();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(key_of(R"({"grid": {"M": 64.5}})"), "grid.M");
  EXPECT_EQ(key_of(R"({"grid": {"M": 63}})"), "grid.M");
  EXPECT_EQ(key_of(R"({"solver": {"dt": "small"}})"), "solver.dt");
  EXPECT_EQ(key_of(R"({"data": {"seed": -1}})"), "data.seed");
  EXPECT_EQ(key_of(R"({"data": {"generator": "noise"}})"), "data.generator");
  EXPECT_EQ(key_of(R"({"experiment": {"kind": "sweep"}})"), "experiment.kind");
  EXPECT_EQ(key_of(R"({"grid": {"M": 64}, "experiment": {"kind": "increment-sweep", "Ns": [4, 8, 16]}})"),
            "experiment.Ns");
  EXPECT_EQ(key_of(R"({"grid": [1, 2]})"), "grid");
  EXPECT_EQ(key_of("{"), "<document>");
}

// ---- CSV and snapshots -------------------------------------------------------

TEST(Csv, NumbersRoundTrip) {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-300, 6.02214076e23, kPi}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Snapshot, RoundTripIsBitExact) {
  const fs::path dir = temp_dir("snapshot");
  std::mt19937_64 rng(8);
  const auto g = make_grid(8.0 * kPi, 64);
  const FirstOrderState f = to_first_order(testing::random_state(g, rng, 20));
  const Snapshot s = make_snapshot(f, 0.125, 0.9, 4.0);
  write_snapshot(dir / "a.zsnap", s);
  const Snapshot r = read_snapshot(dir / "a.zsnap");
  EXPECT_EQ(r.M, 64u);
  EXPECT_EQ(r.L, 8.0 * kPi);
  EXPECT_EQ(r.t, 0.125);
  EXPECT_EQ(r.s, 0.9);
  EXPECT_EQ(r.N, 4.0);
  ASSERT_EQ(r.u.size(), s.u.size());
  EXPECT_EQ(std::memcmp(r.u.data(), s.u.data(), 16 * s.M), 0);
  EXPECT_EQ(std::memcmp(r.n_plus.data(), s.n_plus.data(), 16 * s.M), 0);
  EXPECT_EQ(std::memcmp(r.n_minus.data(), s.n_minus.data(), 16 * s.M), 0);
  EXPECT_EQ(slurp(dir / "a.zsnap"), encode_snapshot(r));
}

TEST(Snapshot, LayoutMatchesFormat) {
  Snapshot s;
  s.M = 1;
  s.L = 2.0;
  s.t = 0.5;
  s.s = 0.9;
  s.N = 8.0;
  s.u = {Complex(1.0, -1.0)};
  s.n_plus = {Complex(2.0, 0.25)};
  s.n_minus = {Complex(2.0, -0.25)};
  const std::string b = encode_snapshot(s);
  ASSERT_EQ(b.size(), 8u + 4u + 8u + 4u * 8u + 3u * 16u);
  EXPECT_EQ(b.substr(0, 8), "ZAKSNAP1");
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 1u);  // version, little-endian
  EXPECT_EQ(static_cast<unsigned char>(b[12]), 1u);  // M
  double L;
  std::memcpy(&L, b.data() + 20, 8);
  EXPECT_EQ(L, 2.0);
  double re;
  std::memcpy(&re, b.data() + 52 + 16, 8);
  EXPECT_EQ(re, 2.0);
  EXPECT_THROW(decode_snapshot(b.substr(0, b.size() - 1)), IoError);
  EXPECT_THROW(decode_snapshot("ZAKSNAP2" + b.substr(8)), IoError);
}

// ---- experiments -------------------------------------------------------------

TEST(Simulate, WritesManifestDiagnosticsAndSnapshots) {
  const fs::path dir = temp_dir("simulate");
  const RunConfig c = small_soliton(dir / "run");
  const fs::path cfg = write_config(dir, "c.json", serialize(c));
  const CliResult r = run_cli("simulate --config " + cfg.string(), dir / "log.txt");
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "run" / "manifest.json"));
  const std::string csv = slurp(dir / "run" / "diagnostics.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "t,mass,E_total,E_kinetic,E_wave,E_coupling,E_modified,flux,flux_18,flux_19,flux_20,Hs_u,Hsm1_n,Hsm1_v");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 11);
  std::vector<std::string> snaps;
  for (const auto& e : fs::directory_iterator(dir / "run" / "snapshots")) snaps.push_back(e.path().filename());
  std::sort(snaps.begin(), snaps.end());
  EXPECT_EQ(snaps, (std::vector<std::string>{"step_0000000000.zsnap", "step_0000000050.zsnap",
                                             "step_0000000100.zsnap"}));
  const Snapshot last = read_snapshot(dir / "run" / "snapshots" / snaps.back());
  EXPECT_NEAR(last.t, 1.0, 1e-12);

  const Json m = Json::parse(slurp(dir / "run" / "manifest.json"));
  EXPECT_EQ(m["status"], "ok");
  EXPECT_TRUE(parse_config(m["config"]) == c);
  EXPECT_EQ(m["seeds"]["data"], 0u);
  EXPECT_TRUE(m["versions"].contains("fftw"));
}

TEST(Simulate, IdenticalConfigGivesIdenticalCsv) {
  const fs::path dir = temp_dir("determinism");
  RunConfig c = small_rough();
  c.output.dir = (dir / "a").string();
  const fs::path cfg = write_config(dir, "c.json", serialize(c));
  ASSERT_EQ(run_cli("simulate --config " + cfg.string(), dir / "a.txt").status, 0);
  ASSERT_EQ(run_cli("simulate --config " + cfg.string() + " --out " + (dir / "b").string() + " --threads 3",
                    dir / "b.txt")
                .status,
            0);
  const std::string a = slurp(dir / "a" / "diagnostics.csv");
  EXPECT_GT(a.size(), 1000u);
  EXPECT_EQ(a, slurp(dir / "b" / "diagnostics.csv"));
  ASSERT_EQ(run_cli("simulate --config " + cfg.string() + " --out " + (dir / "c").string() + " --seed 4",
                    dir / "c.txt")
                .status,
            0);
  EXPECT_NE(a, slurp(dir / "c" / "diagnostics.csv"));
}

TEST(Cli, MalformedConfigExitsTwoNamingKey) {
  const fs::path dir = temp_dir("malformed");
  const fs::path cfg = write_config(dir, "c.json", R"({"grid": {"L": 6.283, "MM": 64}})");
  const CliResult r = run_cli("simulate --config " + cfg.string() + " --out " + (dir / "o").string(), dir / "log");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.output.find("grid.MM"), std::string::npos) << r.output;
  EXPECT_EQ(run_cli("simulate --config " + (dir / "missing.json").string(), dir / "log2").status, 2);
  EXPECT_EQ(run_cli("simulate", dir / "log3").status, 2);
  const fs::path other = write_config(dir, "g.json", R"({"experiment": {"kind": "growth"}})");
  const CliResult mismatch = run_cli("simulate --config " + other.string(), dir / "log4");
  EXPECT_EQ(mismatch.status, 2);
  EXPECT_NE(mismatch.output.find("experiment.kind"), std::string::npos);
}

TEST(Cli, NonFiniteDataExitsThree) {
  const fs::path dir = temp_dir("blowup");
  RunConfig c = small_rough();
  c.data.amp = 1e200;
  c.output.dir = (dir / "o").string();
  const fs::path cfg = write_config(dir, "c.json", serialize(c));
  const CliResult r = run_cli("simulate --config " + cfg.string(), dir / "log");
  EXPECT_EQ(r.status, 3) << r.output;
  EXPECT_TRUE(fs::exists(dir / "o" / "manifest.json"));
}

TEST(Growth, RejectsRegularityAtOrBelowThreshold) {
  RunConfig c = small_rough();
  try {
    growth_experiment(c, 0.8, 1.0);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("s > 5/6"), std::string::npos);
  }
  EXPECT_THROW(growth_experiment(c, 5.0 / 6.0, 1.0), InvalidArgument);
  EXPECT_THROW(growth_experiment(c, 1.0, 1.0), InvalidArgument);
  EXPECT_NEAR(growth_exponent_bound(0.9), 0.5, 1e-12);
}

TEST(Growth, ZeroDataHasZeroSigmaAndExponent) {
  RunConfig c = small_rough();
  c.data.generator = "zero";
  const GrowthReport r = growth_experiment(c, 0.9, 1.0);
  ASSERT_EQ(r.sigma.size(), 101u);
  for (double v : r.sigma) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.fit.exponent, 0.0);
  EXPECT_FALSE(r.blew_up);
}

TEST(Growth, RoughRunStaysBounded) {
  RunConfig c = small_rough();
  const GrowthReport r = growth_experiment(c, 0.9, 2.0);
  EXPECT_FALSE(r.blew_up);
  EXPECT_GT(r.initial(), 0.0);
  EXPECT_GE(r.peak(), r.initial());
  EXPECT_LT(r.peak(), 10.0 * r.initial());
}

TEST(IncrementSweep, ControlRowIsIdentityAndRowsAreFinite) {
  RunConfig c = small_rough();
  c.grid = {2.0 * kPi, 64};
  c.solver = SolverConfig{1e-5, 0.01, 10, true};
  c.data.amp = 0.05;
  const std::vector<double> Ns = {2, 4, 8};
  const SweepTable t = increment_sweep(c, Ns, 0.01);
  ASSERT_EQ(t.rows.size(), 4u);
  const SweepRow* ctl = t.control();
  ASSERT_NE(ctl, nullptr);
  EXPECT_EQ(ctl->N, make_grid(2.0 * kPi, 64)->nyquist());
  for (double f : ctl->integrated_flux) EXPECT_LT(f, 1e-14);
  for (const auto& r : t.rows) {
    EXPECT_TRUE(std::isfinite(r.dE));
    EXPECT_TRUE(std::isfinite(r.x_Iu));
    EXPECT_GT(r.x_In_plus, 0.0);
  }
  EXPECT_NEAR(t.reached, 0.01, 1e-15);
  EXPECT_FALSE(t.blew_up);
  const std::vector<double> too_high = {2, 4, 16};
  EXPECT_THROW(increment_sweep(c, too_high, 0.01), InvalidArgument);
}

TEST(IncrementSweep, BlowUpGivesFlaggedPartialTable) {
  RunConfig c = small_rough();
  c.data.amp = 1e200;
  const std::vector<double> Ns = {0.5, 1, 2};
  const SweepTable t = increment_sweep(c, Ns, 0.1);
  EXPECT_TRUE(t.blew_up);
  EXPECT_EQ(t.rows.size(), 4u);
}

TEST(WindowScaling, ZeroAmplitudeKeepsFullHorizonAndLargerDataShortens) {
  RunConfig c = small_rough();
  c.solver = SolverConfig{1e-3, 1.0, 5, true};
  const std::vector<double> amps = {0.0, 8.0, 16.0, 32.0};
  const WindowTable t = window_scaling(c, amps);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0].W, 1.0);
  EXPECT_EQ(t.rows[0].status, "horizon");
  EXPECT_EQ(t.rows[0].data_norm, 0.0);
  for (const auto& r : t.rows) EXPECT_NE(r.status, "blowup");
  EXPECT_TRUE(t.monotone);
  EXPECT_NEAR(t.rows[2].data_norm, 2.0 * t.rows[1].data_norm, 1e-9 * t.rows[2].data_norm);
}

TEST(CutoffScaling, ConfigDrivenRunMatchesLibrary) {
  const RunConfig c = load_config(std::string(ZAKHAROV_CONFIG_DIR) + "/cutoff_scaling.json");
  const CutoffScalingReport r = cutoff_scaling_run(c);
  EXPECT_EQ(r.deltas.size(), 6u);
  EXPECT_NEAR(r.fit.exponent, 0.2, 0.15);
}

}  // namespace
}  // namespace zakharov::harness
