#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "vpem/parallel.hpp"
#include "vpem/runner.hpp"

namespace {

int exit_code_for(const std::string& category) {
  if (category == "config") return 2;
  if (category == "io") return 4;
  return 3;  // numerical, truncation, convention, search, sampling
}

struct CommonFlags {
  std::string out_dir;
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int cutoff = 0;
  long long samples = 0;

  vpem::RunOptions options() const {
    vpem::RunOptions opt;
    opt.out_dir = out_dir;
    opt.threads = threads;
    if (seed_set) opt.seed_override = seed;
    if (cutoff > 0) opt.cutoff_override = cutoff;
    if (samples > 0) opt.samples_override = samples;
    return opt;
  }
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--out-dir", flags.out_dir, "Output directory (overrides the config)");
  cmd->add_option("--threads", flags.threads, "Worker threads (0 = hardware default)");
  cmd->add_option("--seed", flags.seed, "Replace the seed list with this single seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--cutoff", flags.cutoff, "Override the per-mode Fock cutoff");
  cmd->add_option("--samples", flags.samples, "Override the sample budget N_s");
}

void print_artifacts(const vpem::RunArtifacts& artifacts) {
  for (const auto& file : artifacts.files) std::printf("wrote %s\n", file.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interferometric phase estimation with virtual-purification error mitigation"};
  app.require_subcommand(1);

  CommonFlags run_flags, figure_flags, refpoint_flags, coeffs_flags;
  std::string run_config, refpoint_config, coeffs_config, figure_name;
  bool list_figures = false;

  CLI::App* run = app.add_subcommand("run", "Execute a scenario config and emit CSV records");
  run->add_option("config", run_config, "Scenario config (JSON)")->required();
  add_common_flags(run, run_flags);

  CLI::App* figure = app.add_subcommand("figure", "Reproduce a canonical result dataset");
  figure->add_option("name", figure_name, "Figure name");
  figure->add_flag("--list", list_figures, "List figure names");
  add_common_flags(figure, figure_flags);

  CLI::App* refpoint =
      app.add_subcommand("refpoint", "Resolve optimal reference points for a config");
  refpoint->add_option("config", refpoint_config, "Scenario config (JSON)")->required();
  add_common_flags(refpoint, refpoint_flags);

  CLI::App* coeffs =
      app.add_subcommand("coeffs", "Extract perturbation-series coefficients for a config");
  coeffs->add_option("config", coeffs_config, "Scenario config (JSON)")->required();
  add_common_flags(coeffs, coeffs_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      print_artifacts(vpem::run_scenario(vpem::ScenarioConfig::load(run_config),
                                         run_flags.options()));
    } else if (figure->parsed()) {
      if (list_figures) {
        for (const auto& name : vpem::figure_names()) std::printf("%s\n", name.c_str());
        return 0;
      }
      if (figure_name.empty()) {
        std::fprintf(stderr, "error[config]: figure name required (or --list)\n");
        return 2;
      }
      print_artifacts(vpem::reproduce_figure(figure_name, figure_flags.options()));
    } else if (refpoint->parsed()) {
      print_artifacts(vpem::run_refpoint(vpem::ScenarioConfig::load(refpoint_config),
                                         refpoint_flags.options()));
    } else if (coeffs->parsed()) {
      print_artifacts(vpem::run_coeffs(vpem::ScenarioConfig::load(coeffs_config),
                                       coeffs_flags.options()));
    }
  } catch (const vpem::Error& ex) {
    std::fprintf(stderr, "error[%s]: %s\n", ex.category().c_str(), ex.what());
    return exit_code_for(ex.category());
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error[internal]: %s\n", ex.what());
    return 5;
  }
  return 0;
}
