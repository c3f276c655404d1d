#pragma once

// Experiment configuration: a JSON tree merged from built-in defaults, an
// optional config file, the SRD_OUTPUT_DIR environment variable and
// command-line overrides (in that order of increasing precedence), then
// validated field by field.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "srd/galerkin.hpp"
#include "srd/model.hpp"
#include "srd/simulate.hpp"

namespace srd {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "SRD_OUTPUT_DIR";

/// A diffusivity grid entry: a number or "star" (the per-frequency optimum at
/// each L of the grid).
struct SigmaSpec {
  bool star = false;
  double value = 0.0;
};

struct ExperimentConfig {
  double L = 1.0;
  std::vector<int> frequencies;
  std::vector<double> coefficients;
  std::vector<double> l_grid;
  std::vector<SigmaSpec> sigma_grid;

  Truncation truncation;
  int max_refinements = 2;
  double convergence_threshold = 0.02;

  IntegratorConfig integrator;
  EnsembleConfig ensemble;

  double C_universal = 1.0;
  std::optional<double> horizon_T;  // default m^{-1/2}

  std::filesystem::path output_directory;
  std::vector<std::string> formats;

  nlohmann::json tree;      // effective merged configuration
  std::uint64_t hash = 0;   // FNV-1a of the canonical tree without "output"

  [[nodiscard]] SpectralModel model() const { return model_at(L); }
  [[nodiscard]] SpectralModel model_at(double L_value) const;
  [[nodiscard]] std::string hash_hex() const;
  /// "# srdlab <version> config_hash=<hex>".
  [[nodiscard]] std::string header_comment() const;
};

nlohmann::json default_config_json();

/// Validates a complete tree; throws ValidationError naming the field.
ExperimentConfig parse_config(const nlohmann::json& tree);

struct ConfigSources {
  std::optional<std::filesystem::path> file;
  std::optional<std::string> env_output_dir;       // value of SRD_OUTPUT_DIR
  std::vector<std::string> assignments;            // "a.b.c=<json or string>"
  std::optional<std::string> output_dir_flag;
};

/// defaults < file < env < assignments < output_dir_flag.
ExperimentConfig load_config(const ConfigSources& sources);

std::uint64_t fnv1a64(std::string_view data);

/// Write to `<path>.tmp` and rename over `path`; creates parent directories.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace srd
