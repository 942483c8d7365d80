#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blowup/config.hpp"
#include "blowup/experiment.hpp"
#include "blowup/io.hpp"

namespace {

using namespace blowup::harness;

int fail(const std::string& kind, const std::string& message, int code) {
  std::cout << error_json(kind, message, code).dump() << '\n';
  return code;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void apply_override(ExperimentConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + assignment);
  set_value(c, assignment.substr(0, eq), assignment.substr(eq + 1));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blow-up profile experiments for radial semilinear heat equations"};
  app.set_version_flag("--version", std::string("blowup ") + kVersion);
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path, output;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Config file in key=value format with [section] headers");
  app.add_option("--set", overrides, "Override one config key (key=value); repeatable")->take_all();
  app.add_option("--output", output, "Artifact directory (overrides the output key)");

  std::string command;
  auto leaf = [&](CLI::App* group, const std::string& name, const std::string& help) {
    group->add_subcommand(name, help)->callback([&command, group, name] { command = group->get_name() + "." + name; });
  };

  auto* profile = app.add_subcommand("profile", "Self-similar profiles");
  profile->require_subcommand(1);
  leaf(profile, "shoot", "Shoot one profile from alpha");
  leaf(profile, "scan", "Scan alpha for tail-convergent candidates");
  leaf(profile, "singular", "Closed-form singular steady state");

  auto* semigroup = app.add_subcommand("semigroup", "Mehler semigroup and Hermite estimates");
  semigroup->require_subcommand(1);
  leaf(semigroup, "norm", "Shifted weighted norms of a bump field");
  leaf(semigroup, "mehler", "Apply the Mehler semigroup to a bump field");
  leaf(semigroup, "check", "Hermite regularization check and seeded sweep");

  auto* evolve = app.add_subcommand("evolve", "Parabolic evolution");
  evolve->require_subcommand(1);
  leaf(evolve, "run", "Run until blow-up and fit the blow-up time");
  leaf(evolve, "wframe", "Evolve a profile in similarity variables");

  auto* verify = app.add_subcommand("verify", "Theorem-level checks");
  verify->require_subcommand(1);
  leaf(verify, "convergence", "Similarity-variable convergence to a profile");
  leaf(verify, "theorem2", "Final-time profile for the exponential nonlinearity");
  leaf(verify, "theorem4", "Final-time profile for the power nonlinearity");
  leaf(verify, "loglog", "Log-log corrected final profile");
  leaf(verify, "classify", "Matano-Merle classification of final profiles");
  leaf(verify, "refined", "Refined-scaling profile fit");

  std::string suite_name;
  auto* suite = app.add_subcommand("suite", "Run an acceptance suite");
  suite->add_option("name", suite_name, "Suite name")->required()->check(CLI::IsMember(known_suites()));
  suite->callback([&] { command = "suite"; });

  auto* run = app.add_subcommand("run", "Run the command named in the config file");
  run->callback([&] { command.clear(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kExitUsage);
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = parse_config_unvalidated(read_file(config_path));
    for (const auto& o : overrides) apply_override(cfg, o);
    if (!output.empty()) cfg.output = output;
    if (!command.empty()) cfg.command = command;
    if (command == "suite") cfg.suite = suite_name;
    validate(cfg);
  } catch (const ConfigError& e) {
    return fail("usage", e.what(), kExitUsage);
  }

  set_suite_stream(&std::cout);
  const auto outcome = run_experiment(cfg);
  if (!outcome.error.is_null()) {
    std::cout << outcome.error.dump() << '\n';
    return outcome.exit_code;
  }
  for (const auto& r : outcome.reports) std::cout << r.check_name << ": " << to_string(r.verdict) << '\n';
  if (!outcome.verifying) std::cout << cfg.command << ": done (non-verifying)\n";
  std::cout << "artifacts: " << outcome.output_dir.string() << '\n';
  return outcome.exit_code;
}
