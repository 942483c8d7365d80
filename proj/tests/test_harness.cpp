#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "blowup/config.hpp"
#include "blowup/experiment.hpp"

using namespace blowup;
using namespace blowup::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("blowup_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int cli(const std::string& args) {
  const std::string cmd = std::string(BLOWUP_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> small(1, 12);
  ExperimentConfig c;
  c.command = known_commands()[rng() % known_commands().size()];
  c.output = "out_" + std::to_string(small(rng));
  c.threads = small(rng);
  c.seed = static_cast<int>(rng() % 1000000);
  c.nonlinearity = u(rng) < 0.5 ? "exponential" : "power";
  c.p = 1.0 + 9.0 * u(rng) + 1e-3;
  c.N = small(rng);
  c.R = 0.1 + 10.0 * u(rng);
  c.M = 8 + static_cast<int>(rng() % 8192);
  c.alpha = 20.0 * u(rng);
  c.alpha_lo = u(rng);
  c.alpha_hi = c.alpha_lo + 1.0 + 30.0 * u(rng);
  c.scan_grid = 2 + small(rng) * 50;
  c.t = 1e-3 + 5.0 * u(rng);
  c.q = 1.0 + 3.0 * u(rng);
  c.beta = 1.0 + 3.0 * u(rng);
  c.r = 2.0 * u(rng);
  c.xi = 3.0 * u(rng) - 1.5;
  c.draws = small(rng) * 100;
  c.bump_width = 0.1 + u(rng);
  c.amplitude = 20.0 * u(rng);
  c.dt_max = std::pow(10.0, -6.0 * u(rng));
  c.Y = 1.0 + 20.0 * u(rng);
  c.source = u(rng) < 0.5 ? "exact" : "run";
  c.tau_final = std::pow(10.0, -12.0 * u(rng));
  c.x_lo = 1e-4 + 1e-3 * u(rng);
  c.x_hi = c.x_lo * (2.0 + 100.0 * u(rng));
  c.tol_prof = 0.1 * u(rng) + 1e-9;
  c.halvings = small(rng);
  c.suite = known_suites()[rng() % known_suites().size()];
  return c;
}

ExperimentConfig with_output(ExperimentConfig c, const fs::path& dir) {
  c.output = dir.string();
  return c;
}

ExperimentConfig command(const std::string& name) {
  ExperimentConfig c;
  c.command = name;
  return c;
}

}  // namespace

TEST(Config, MinimalConfigFillsDefaults) {
  const auto c = parse_config("command=profile.shoot\nalpha=1.0\nN=3");
  ExperimentConfig expected;
  expected.command = "profile.shoot";
  expected.alpha = 1.0;
  EXPECT_EQ(c, expected);
  EXPECT_EQ(c.M, 2048);
  EXPECT_EQ(c.nonlinearity, "exponential");
  EXPECT_DOUBLE_EQ(c.tol_prof, 0.05);
}

TEST(Config, NonIntegerDimensionIsRejected) {
  const auto msg = config_error("command=profile.shoot\nN=2.5");
  EXPECT_NE(msg.find("N must be integer"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyNamesItsLine) {
  const auto msg = config_error("command=profile.shoot\n# comment\n\nfoo = 1\n");
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("unknown key: foo"), std::string::npos) << msg;
}

TEST(Config, SectionsScopeTheirKeys) {
  EXPECT_NO_THROW(parse_config("[general]\ncommand = verify.theorem2\n[verify]\ntol_prof = 0.1  # looser\n"));
  EXPECT_NE(config_error("[general]\ncommand=profile.shoot\n[problem]\nalpha=1").find("line 4"), std::string::npos);
  EXPECT_NE(config_error("command=profile.shoot\n[nowhere]\n").find("unknown section"), std::string::npos);
}

TEST(Config, DuplicateAndMalformedLinesAreRejected) {
  EXPECT_NE(config_error("command=profile.shoot\nN=3\nN=4").find("duplicate key"), std::string::npos);
  EXPECT_NE(config_error("command=profile.shoot\nN 3").find("expected key=value"), std::string::npos);
  EXPECT_NE(config_error("command=profile.shoot\nR=abc").find("R must be a real number"), std::string::npos);
}

TEST(Config, MissingOrUnknownCommandIsRejected) {
  EXPECT_NE(config_error("N=3").find("missing required key: command"), std::string::npos);
  EXPECT_NE(config_error("command=profile.melt").find("unknown command"), std::string::npos);
}

TEST(Config, RangeValidation) {
  EXPECT_NE(config_error("command=profile.shoot\nN=0").find("N must be >= 1"), std::string::npos);
  EXPECT_NE(config_error("command=verify.theorem2\ntol_prof=-1").find("tolerances must be positive"),
            std::string::npos);
  EXPECT_NE(config_error("command=suite\nsuite=nope").find("unknown suite"), std::string::npos);
}

TEST(Config, SerializedConfigsRoundTrip) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    const auto c = random_config(rng);
    ASSERT_NO_THROW(validate(c)) << serialize(c);
    EXPECT_EQ(parse_config(serialize(c)), c) << serialize(c);
  }
}

TEST(Config, OverridesFollowTheFileTypeRules) {
  ExperimentConfig c;
  set_value(c, "M", "4096");
  set_value(c, "Y", "2.5");
  set_value(c, "source", "run");
  EXPECT_EQ(c.M, 4096);
  EXPECT_DOUBLE_EQ(c.Y, 2.5);
  EXPECT_EQ(c.source, "run");
  EXPECT_THROW(set_value(c, "M", "1e3"), ConfigError);
  EXPECT_THROW(set_value(c, "nope", "1"), ConfigError);
}

TEST(Experiment, ShootWithZeroAlphaWritesArtifacts) {
  const auto dir = scratch("shoot");
  auto c = with_output(command("profile.shoot"), dir);
  const auto out = run_experiment(c);
  EXPECT_EQ(out.exit_code, kExitPass);
  EXPECT_FALSE(out.verifying);
  for (const char* f : {"profile.csv", "manifest.json", "config.ini", "reports.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto m = manifest(dir);
  EXPECT_EQ(m["summary"]["classification"], "Trivial");
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_EQ(m["seed"], c.seed);
  EXPECT_TRUE(m["versions"].contains("boost"));
  EXPECT_TRUE(m.contains("wall_time_seconds"));
}

TEST(Experiment, ExponentialFinalProfilePassesOnExactPipeline) {
  const auto dir = scratch("theorem2");
  const auto out = run_experiment(with_output(command("verify.theorem2"), dir));
  EXPECT_EQ(out.exit_code, kExitPass);
  const auto m = manifest(dir);
  ASSERT_EQ(m["verdicts"].size(), 1u);
  EXPECT_EQ(m["verdicts"][0]["verdict"], "pass");
  EXPECT_TRUE(fs::exists(dir / "window.csv"));
}

TEST(Experiment, ManifestConfigReproducesTheRun) {
  const auto dir = scratch("rerun");
  auto c = with_output(command("verify.theorem4"), dir);
  c.nonlinearity = "power";
  c.N = 5;
  c.M = 1024;
  ASSERT_EQ(run_experiment(c).exit_code, kExitPass);
  const auto again = parse_config(manifest(dir)["config"].get<std::string>());
  EXPECT_EQ(again, c);
  EXPECT_EQ(parse_config(slurp(dir / "config.ini")), c);
}

TEST(Experiment, FailingCheckExitsOne) {
  const auto dir = scratch("tight");
  auto c = with_output(command("verify.theorem2"), dir);
  c.tol_prof = 1e-9;
  const auto out = run_experiment(c);
  EXPECT_EQ(out.exit_code, kExitFail);
  EXPECT_EQ(manifest(dir)["verdicts"][0]["verdict"], "fail");
}

TEST(Experiment, UnwritableOutputIsReported) {
  const auto base = scratch("unwritable");
  fs::create_directories(base);
  std::ofstream(base / "file") << "x";
  const auto out = run_experiment(with_output(command("profile.shoot"), base / "file" / "sub"));
  EXPECT_NE(out.exit_code, 0);
  EXPECT_EQ(out.error["error"], "output not writable");
}

TEST(Experiment, InvalidParametersAreUsageErrors) {
  const auto dir = scratch("invalid");
  auto c = with_output(command("verify.theorem4"), dir);
  c.N = 3;  // L^{p-1} vanishes for p = 3, N = 3
  const auto out = run_experiment(c);
  EXPECT_EQ(out.exit_code, kExitUsage);
  EXPECT_FALSE(out.error.is_null());
  EXPECT_TRUE(fs::exists(dir / "error.json"));
  EXPECT_EQ(manifest(dir)["exit_code"], kExitUsage);
}

TEST(Experiment, IdenticalConfigGivesByteIdenticalCsv) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  auto c = command("evolve.run");
  c.M = 512;
  ASSERT_EQ(run_experiment(with_output(c, a)).exit_code, kExitPass);
  ASSERT_EQ(run_experiment(with_output(c, b)).exit_code, kExitPass);
  for (const char* f : {"trace.csv", "final.csv"}) {
    const auto x = slurp(a / f);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(b / f)) << f;
  }
}

TEST(Experiment, RunSummaryRecordsFitAndCaps) {
  const auto dir = scratch("run");
  auto c = with_output(command("evolve.run"), dir);
  c.M = 512;
  ASSERT_EQ(run_experiment(c).exit_code, kExitPass);
  const auto m = manifest(dir);
  EXPECT_TRUE(m["summary"]["fit"]["reliable"].get<bool>());
  EXPECT_GT(m["summary"]["fit"]["T"].get<double>(), 0.0);
  EXPECT_EQ(m["summary"]["caps"]["u_stop"], 25.0);
  EXPECT_EQ(m["summary"]["grid"]["M"], 512);
  EXPECT_EQ(slurp(dir / "trace.csv").substr(0, 27), "t,sup_norm,dt,grad_margin\n0");
}

TEST(Experiment, ClassifierRowsMatchExpectedLabels) {
  const auto dir = scratch("classify");
  auto c = with_output(command("verify.classify"), dir);
  c.p = 3.0;
  c.N = 5;
  const auto out = run_experiment(c);
  EXPECT_EQ(out.exit_code, kExitPass);
  ASSERT_EQ(out.reports.size(), 3u);
  c.N = 3;  // p = 3 does not exceed the Sobolev exponent 5
  EXPECT_EQ(run_experiment(c).reports.at(0).verdict, Verdict::Inapplicable);
}

TEST(Experiment, OutputRootFromEnvironment) {
  const auto root = scratch("root");
  ::setenv("BLOWUP_OUTPUT_ROOT", root.c_str(), 1);
  EXPECT_EQ(resolve_output_dir(command("profile.scan")), root / "profile.scan");
  ::unsetenv("BLOWUP_OUTPUT_ROOT");
  EXPECT_EQ(resolve_output_dir(command("profile.scan")), fs::path("blowup_out") / "profile.scan");
  auto c = command("profile.scan");
  c.output = "elsewhere";
  EXPECT_EQ(resolve_output_dir(c), fs::path("elsewhere"));
}

TEST(Suite, UnknownSuiteIsUsageError) {
  std::ostringstream sink;
  EXPECT_THROW(run_suite("nope", 1, sink), ConfigError);
  auto c = command("suite");
  c.suite = "nope";
  EXPECT_EQ(run_experiment(c).exit_code, kExitUsage);
}

TEST(Suite, ProfilesSuitePrintsOneLinePerCriterion) {
  const auto dir = scratch("suite");
  std::ostringstream sink;
  set_suite_stream(&sink);
  auto c = with_output(command("suite"), dir);
  c.suite = "profiles";
  const auto out = run_experiment(c);
  set_suite_stream(nullptr);
  EXPECT_EQ(out.exit_code, kExitPass);
  EXPECT_EQ(out.reports.size(), 3u);
  EXPECT_NE(sink.str().find("3/3 criteria passed"), std::string::npos) << sink.str();
  EXPECT_TRUE(fs::exists(dir / "verdict_table.csv"));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  EXPECT_EQ(cli("suite nope"), kExitUsage);
  EXPECT_EQ(cli("profile shoot --set N=2.5"), kExitUsage);
  EXPECT_EQ(cli("profile"), kExitUsage);
  EXPECT_EQ(cli("verify theorem2 --output " + (dir / "t2").string()), kExitPass);
  EXPECT_EQ(cli("--set tol_prof=1e-9 verify theorem2 --output " + (dir / "t2f").string()), kExitFail);
  std::ofstream(dir / "t.ini") << "[general]\ncommand = profile.shoot\noutput = " << (dir / "shoot").string() << "\n";
  EXPECT_EQ(cli("run --config " + (dir / "t.ini").string()), kExitPass);
  EXPECT_TRUE(fs::exists(dir / "shoot" / "profile.csv"));
  EXPECT_EQ(cli("run --config " + (dir / "missing.ini").string()), kExitUsage);
}
