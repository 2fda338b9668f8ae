// focktomo: simulate pulsed homodyne data of heralded Fock states and
// reconstruct the state from it.
//
//   focktomo all --config run.cfg --seed 42 --out run
//   focktomo report --out run
//
// Exit codes: 0 success, 1 stage failure, 2 invalid configuration.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "focktomo/config.hpp"
#include "focktomo/errors.hpp"
#include "focktomo/pipeline.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Flags {
  std::string config;
  std::optional<std::string> seed;
  std::optional<std::string> eta;
  std::optional<std::string> samples;
  std::optional<std::string> out;
};

focktomo::RunConfig resolve(const Flags& flags) {
  using focktomo::apply_setting;
  auto cfg = focktomo::default_config();
  if (const char* env = std::getenv("FOCKTOMO_SEED"); env && *env) {
    apply_setting(cfg, "seed", env, "FOCKTOMO_SEED");
  }
  if (!flags.config.empty()) cfg = focktomo::load_config(flags.config, cfg);
  if (flags.seed) apply_setting(cfg, "seed", *flags.seed, "--seed");
  if (flags.eta) apply_setting(cfg, "eta", *flags.eta, "--eta");
  if (flags.samples) apply_setting(cfg, "samples", *flags.samples, "--samples");
  if (flags.out) apply_setting(cfg, "out", *flags.out, "--out");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulsed homodyne tomography of heralded Fock states"};
  app.require_subcommand(1, 1);

  Flags flags;
  app.add_option("--config", flags.config, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "random seed (overrides config and FOCKTOMO_SEED)");
  app.add_option("--eta", flags.eta, "overall detection efficiency");
  app.add_option("--samples", flags.samples, "number of heralded frames");
  app.add_option("--out", flags.out, "run directory");

  for (const char* name : {"simulate", "ingest", "reconstruct", "all", "report"}) {
    app.add_subcommand(name)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const std::string stage_name = app.get_subcommands().front()->get_name();
  try {
    const auto cfg = resolve(flags);
    focktomo::run_pipeline(cfg, focktomo::parse_stage(stage_name));
  } catch (const focktomo::ConfigError& e) {
    std::cerr << "focktomo: invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const focktomo::Error& e) {
    std::cerr << "focktomo " << stage_name << ": " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "focktomo " << stage_name << ": " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
