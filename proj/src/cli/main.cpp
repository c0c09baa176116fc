#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"

#ifndef WFDIFF_VERSION
#define WFDIFF_VERSION "0.0.0"
#endif

int main(int argc, char** argv) {
  CLI::App app{
      "Wright-Fisher chain vs limiting diffusion: simulation, explicit "
      "error bounds, and gap certification"};
  app.set_version_flag("--version", std::string(WFDIFF_VERSION));
  app.require_subcommand(1);

  wfdiff::cli::CommonArgs args;
  std::uint64_t seed_val = 0;
  int workers_val = 0;

  struct SubOpts {
    CLI::App* sub;
    CLI::Option* seed;
    CLI::Option* workers;
  };
  std::vector<SubOpts> subs;
  auto add_sub = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config_path, "experiment config JSON")
        ->required();
    CLI::Option* seed =
        sub->add_option("--seed", seed_val, "override the config seed");
    CLI::Option* workers =
        sub->add_option("--workers", workers_val,
                        "worker threads (0 = all cores)")
            ->envname("WFDIFF_WORKERS");
    sub->add_option("--out", args.out_dir, "output directory (default .)");
    subs.push_back({sub, seed, workers});
    return sub;
  };

  CLI::App* simulate = add_sub(
      "simulate", "write chain distributions/paths and diffusion paths");
  CLI::App* bounds =
      add_sub("bounds", "emit the chain-vs-diffusion bound reports");
  CLI::App* certify = add_sub(
      "certify", "measure the chain-vs-diffusion gap and test domination");
  CLI::App* verify =
      add_sub("verify", "run the model/scheme property checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  for (const SubOpts& s : subs) {
    if (!s.sub->parsed()) continue;
    if (s.seed->count() > 0) args.seed = seed_val;
    if (s.workers->count() > 0) args.workers = workers_val;
  }

  try {
    if (simulate->parsed()) return wfdiff::cli::cmd_simulate(args);
    if (bounds->parsed()) return wfdiff::cli::cmd_bounds(args);
    if (certify->parsed()) return wfdiff::cli::cmd_certify(args);
    if (verify->parsed()) return wfdiff::cli::cmd_verify(args);
  } catch (const wfdiff::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 70;
  }
  return 64;
}
