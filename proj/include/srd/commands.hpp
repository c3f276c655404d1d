#pragma once

// Subcommands of the experiment runner. Every command reads only the
// validated configuration and writes its declared files atomically into the
// configured output directory.

#include <filesystem>
#include <string>
#include <vector>

#include "srd/bounds.hpp"
#include "srd/config.hpp"
#include "srd/galerkin.hpp"

namespace srd {

struct CommandResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
  int exit_code = 0;  // 0 ok, 3 numerical non-convergence in at least one row
};

/// chi_entries.csv and chi_summary.json.
CommandResult cmd_tensors(const ExperimentConfig& config);
/// bounds.json with both sum conventions and sigma sweeps per L.
CommandResult cmd_bounds(const ExperimentConfig& config);
/// stats.csv from a stationary ensemble.
CommandResult cmd_simulate(const ExperimentConfig& config);
/// trel_sweep.csv and verification.json.
CommandResult cmd_galerkin(const ExperimentConfig& config);
/// compare.csv: bounds and measured relaxation times side by side.
CommandResult cmd_compare(const ExperimentConfig& config);

/// One (L, sigma) point of the relaxation-time sweep.
struct SweepRow {
  double L = 0.0;
  double sigma = 0.0;
  bool sigma_is_star = false;
  TrelReport trel;
  bool failed = false;          // bracket exhaustion (no contraction found)
  std::string failure;
  double lower_bound = 0.0;
  double nu_inverse = 0.0;      // 1 / rate_nu with the configured C and T
  double upper_proxy = 0.0;     // sigma^2 C2^2 + sigma^-2 (C1^2 + 1/eta)
  double comparison = 0.0;      // comparison bound with the configured C
  [[nodiscard]] bool sandwich_ok() const { return !failed && trel.t_rel >= lower_bound; }
};

/// Resolves "star" entries to the per-frequency optimum at each L.
double resolve_sigma(const SigmaSpec& spec, const BoundsReport& report);

std::vector<SweepRow> run_trel_sweep(const ExperimentConfig& config);

/// Operator-level verification at the configured model and truncation.
nlohmann::json run_verification(const ExperimentConfig& config);

}  // namespace srd
