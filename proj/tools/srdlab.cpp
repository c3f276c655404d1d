// srdlab: config-driven runner for the self-repelling diffusion laboratory.
//
//   srdlab <tensors|bounds|simulate|galerkin|compare> [--config FILE]
//          [--output-dir DIR] [--set key.path=value]...
//
// Precedence: built-in defaults < --config file < $SRD_OUTPUT_DIR < --set < --output-dir.
// Exit codes: 0 success, 2 validation error, 3 numerical non-convergence.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <json.hpp>

#include "srd/commands.hpp"
#include "srd/errors.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for self-repelling diffusions on the circle"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(srd::kVersion));

  std::string config_path;
  std::string output_dir;
  std::vector<std::string> assignments;
  bool print_config = false;
  app.add_option("-c,--config", config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  app.add_option("-o,--output-dir", output_dir, "output directory (overrides config and $SRD_OUTPUT_DIR)");
  app.add_option("-s,--set", assignments, "override a config key, e.g. --set truncation.D=8")->take_all();
  app.add_flag("--print-config", print_config, "print the effective configuration before running");

  using Command = srd::CommandResult (*)(const srd::ExperimentConfig&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"tensors", "chi tensors, selection rule and aggregate report", &srd::cmd_tensors},
      {"bounds", "closed-form bounds and sigma sweeps", &srd::cmd_bounds},
      {"simulate", "stationary Monte Carlo ensemble and goodness-of-fit", &srd::cmd_simulate},
      {"galerkin", "relaxation-time sweep and operator verification", &srd::cmd_galerkin},
      {"compare", "bounds and measured relaxation times side by side", &srd::cmd_compare}};
  for (const auto& [name, help, fn] : commands) app.add_subcommand(name, help)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    srd::ConfigSources sources;
    if (!config_path.empty()) sources.file = config_path;
    if (const char* env = std::getenv(srd::kOutputDirEnv)) sources.env_output_dir = env;
    sources.assignments = assignments;
    if (!output_dir.empty()) sources.output_dir_flag = output_dir;
    const auto config = srd::load_config(sources);
    if (print_config) std::cout << config.tree.dump(2) << '\n';

    for (const auto& [name, help, fn] : commands) {
      if (!app.got_subcommand(name)) continue;
      const auto result = fn(config);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& f : result.files) std::cout << f.string() << '\n';
      return result.exit_code;
    }
  } catch (const srd::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const srd::DegenerateModeError& e) {
    std::cerr << "validation error: degenerate mode: " << e.what() << '\n';
    return kExitValidation;
  } catch (const srd::ConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << '\n';
    return kExitNonConvergence;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
