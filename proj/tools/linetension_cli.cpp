// Command-line front end for the line-tension approximation experiments.

#include "linetension/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace linetension;

int main(int argc, char** argv) {
  CLI::App app{"divergence-free line-measure approximation and energy experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string format_override;
  std::uint64_t seed_override = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* cmd, bool need_config = true) {
    auto* copt = cmd->add_option("--config", config_path, "path to the JSON run configuration");
    if (need_config) copt->required();
    cmd->add_option("--out", out_override, "output directory (overrides the config)");
    cmd->add_option("--seed", seed_override, "seed override")->each([&](const std::string&) {
      seed_set = true;
    });
    cmd->add_option("--format", format_override, "geometry export format: obj|csv");
  };

  auto* approximate =
      app.add_subcommand("approximate", "build the lattice measures mu_k and report convergence");
  add_common(approximate);
  auto* energy =
      app.add_subcommand("energy", "run the upper-bound experiment and lower-bound diagnostics");
  add_common(energy);
  auto* envelope = app.add_subcommand("envelope", "convex-envelope values and certificates");
  add_common(envelope);
  auto* verify = app.add_subcommand("verify", "run the invariant suites at desk scale");
  add_common(verify);
  auto* report = app.add_subcommand("report", "regenerate the summary from run artifacts");
  report->add_option("--out", out_override, "run directory to summarize")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) return cmd_report(out_override, std::cout);

    RunConfig cfg = load_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (!format_override.empty()) cfg.geometry_format = format_override;
    if (seed_set) {
      cfg.seed = seed_override;
      cfg.construction.seed = seed_override;
    }
    std::vector<std::string> errs;
    detail::config_errors(cfg, errs);
    if (!errs.empty()) {
      std::cerr << "invalid config after overrides:\n";
      for (const auto& e : errs) std::cerr << "  - " << e << "\n";
      return 2;
    }

    if (approximate->parsed()) return cmd_approximate(cfg, std::cout);
    if (energy->parsed()) return cmd_energy(cfg, std::cout);
    if (envelope->parsed()) return cmd_envelope(cfg, std::cout);
    if (verify->parsed()) return cmd_verify(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
