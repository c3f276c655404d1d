#include "srd/commands.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include "srd/csv.hpp"
#include "srd/errors.hpp"
#include "srd/simulate.hpp"
#include "srd/tensors.hpp"

namespace srd {

namespace {

using json = nlohmann::json;

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json stamp(const ExperimentConfig& c, json j) {
  j["config_hash"] = c.hash_hex();
  j["version"] = std::string(kVersion);
  return j;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
  return s;
}

double horizon(const ExperimentConfig& c, const BoundsReport& r) {
  return c.horizon_T ? *c.horizon_T : r.default_horizon();
}

double nu_inverse(const ExperimentConfig& c, const BoundsReport& r, double sigma) {
  if (!(sigma > 0.0) || r.degenerate) return std::numeric_limits<double>::infinity();
  return 1.0 / r.rate_nu(sigma, horizon(c, r), c.C_universal, r.convention);
}

}  // namespace

double resolve_sigma(const SigmaSpec& spec, const BoundsReport& report) {
  return spec.star ? report.sigma_star() : spec.value;
}

CommandResult cmd_tensors(const ExperimentConfig& config) {
  CommandResult res;
  const auto model = config.model();
  const auto t = compute_chi(model);
  const auto agreement = check_selection_rule(model, t);

  std::ostringstream csv;
  csv << config.header_comment() << '\n';
  write_chi_csv(csv, t);
  const auto csv_path = config.output_directory / "chi_entries.csv";
  write_file_atomic(csv_path, csv.str());
  res.files.push_back(csv_path);

  const double L = model.L();
  const double unit = 1.0 / (4.0 * std::numbers::pi * L);
  json j;
  j["L"] = L;
  j["frequencies"] = model.frequencies();
  j["coefficients"] = model.frequency_coefficients();
  j["d"] = model.dim();
  j["chi"] = t.chi;
  j["chi_tilde"] = t.chi_tilde;
  j["chi_times_4piL"] = t.chi / unit;
  j["chi_tilde_times_4piL"] = t.chi_tilde / unit;
  j["selection_rule"] = {{"rule_nonzero", agreement.rule_nonzero},
                         {"partition_nonzero", agreement.partition_nonzero},
                         {"quadrature_nonzero", agreement.quadrature_nonzero},
                         {"mismatches", agreement.mismatches},
                         {"max_abs_ruled_zero", agreement.max_abs_ruled_zero}};
  if (model.n_frequencies() == 1) {
    const auto adj = adjudicate_single_frequency(model, t);
    j["single_frequency"] = {{"entry_cccc", t.chi_at(0, 0, 0, 0)},
                             {"entry_ccss", t.chi_at(0, 0, 1, 1)},
                             {"expected_pure", 3.0 * unit},
                             {"expected_mixed", unit},
                             {"pure_count", adj.pure_count},
                             {"mixed_count", adj.mixed_count},
                             {"aggregate_quadrature", adj.quadrature_chi},
                             {"aggregate_six_mixed", adj.aggregate_with_6},
                             {"aggregate_eight_mixed_sqrt26", adj.aggregate_with_8},
                             {"quadrature_matches_six", adj.quadrature_matches_6},
                             {"quadrature_matches_eight", adj.quadrature_matches_8}};
  }
  const auto json_path = config.output_directory / "chi_summary.json";
  write_file_atomic(json_path, stamp(config, j).dump(2) + "\n");
  res.files.push_back(json_path);
  return res;
}

CommandResult cmd_bounds(const ExperimentConfig& config) {
  CommandResult res;
  json per_l = json::array();
  for (double L : config.l_grid) {
    const auto model = config.model_at(L);
    const auto report = make_bounds_report(model, compute_chi(model));
    json entry = to_json(report);
    entry["lower_bound_torus_formula"] = num(lower_bound_trel_torus(model));
    entry["horizon_T"] = num(horizon(config, report));
    entry["C_universal"] = config.C_universal;
    if (!report.degenerate) {
      const double s_star = report.sigma_star();
      const double a = model.frequency_coefficients().front();
      entry["minimized_upper_proxy"] = num(report.upper_proxy(s_star));
      entry["sqrt_L_plus_L3_over_a"] = std::sqrt((L + L * L * L) / a);
      entry["comparison_sigma_star"] = num(comparison_sigma_star(model));
      entry["comparison_minimum"] =
          num(comparison_bound(model, comparison_sigma_star(model), config.C_universal));
    }
    json sweep = json::array();
    for (const auto& spec : config.sigma_grid) {
      const double sigma = resolve_sigma(spec, report);
      json row{{"sigma", sigma}, {"star", spec.star}};
      if (sigma > 0.0 && !report.degenerate) {
        for (auto conv : {SumConvention::per_frequency, SumConvention::per_member}) {
          const std::string key = conv == SumConvention::per_frequency ? "per_frequency" : "per_member";
          const double nu = report.rate_nu(sigma, horizon(config, report), config.C_universal, conv);
          row["rate_nu"][key] = num(nu);
          row["nu_inverse"][key] = num(1.0 / nu);
          row["upper_proxy"][key] = num(report.upper_proxy(sigma, conv));
        }
        row["comparison_bound"] = num(comparison_bound(model, sigma, config.C_universal));
      } else {
        row["note"] = "rate undefined at sigma = 0 or for degenerate modes";
      }
      sweep.push_back(row);
    }
    entry["sigma_sweep"] = sweep;
    per_l.push_back(entry);
  }
  json j{{"frequencies", config.frequencies}, {"coefficients", config.coefficients}, {"per_L", per_l}};
  const auto path = config.output_directory / "bounds.json";
  write_file_atomic(path, stamp(config, j).dump(2) + "\n");
  res.files.push_back(path);
  return res;
}

CommandResult cmd_simulate(const ExperimentConfig& config) {
  CommandResult res;
  const auto model = config.model();
  res.warnings = config.integrator.validate(model);
  const auto stats = run_stationary_ensemble(model, config.integrator, config.ensemble);
  const auto law = invariant_law(model);
  // Endpoints of independent trajectories are independent draws.
  const double effective = static_cast<double>(stats.sample_count());
  DistributionReport report;
  bool insufficient = false;
  try {
    report = ks_circular_and_gaussian(stats.u_samples, stats.x_samples, effective, law, model.L());
  } catch (const InsufficientSamplesError& e) {
    insufficient = true;
    res.warnings.push_back(std::string(e.what()) + "; KS/Kuiper values reported but below the required sample size");
    report = ks_circular_and_gaussian(stats.u_samples, stats.x_samples, effective, law, model.L(), 0.0);
  }
  std::ostringstream csv;
  csv << config.header_comment() << '\n';
  write_stats_csv(csv, stats, &report);
  csv << "diagnostic,insufficient_effective_samples,0," << (insufficient ? 1 : 0) << '\n';
  const auto path = config.output_directory / "stats.csv";
  write_file_atomic(path, csv.str());
  res.files.push_back(path);
  return res;
}

std::vector<SweepRow> run_trel_sweep(const ExperimentConfig& config) {
  std::vector<SweepRow> rows;
  for (double L : config.l_grid) {
    const auto model = config.model_at(L);
    const auto report = make_bounds_report(model, compute_chi(model));
    for (const auto& spec : config.sigma_grid) {
      SweepRow row;
      row.L = L;
      row.sigma = resolve_sigma(spec, report);
      row.sigma_is_star = spec.star;
      row.lower_bound = lower_bound_trel(model);
      row.nu_inverse = nu_inverse(config, report, row.sigma);
      row.upper_proxy = row.sigma > 0.0 ? report.upper_proxy(row.sigma) : std::numeric_limits<double>::infinity();
      row.comparison = row.sigma > 0.0 ? comparison_bound(model, row.sigma, config.C_universal)
                                       : std::numeric_limits<double>::infinity();
      try {
        row.trel = measure_trel_adaptive(model, config.truncation, row.sigma, config.max_refinements,
                                         config.convergence_threshold);
      } catch (const ConvergenceError& e) {
        row.failed = true;
        row.failure = e.what();
        row.trel.t_rel = row.trel.t_rel_refined = std::numeric_limits<double>::infinity();
        row.trel.truncation = config.truncation;
        row.trel.refined = config.truncation.refined();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

nlohmann::json run_verification(const ExperimentConfig& config) {
  const auto model = config.model();
  Truncation t = config.truncation;
  json j;
  j["truncation"] = {{"D", t.max_hermite_degree}, {"J", t.max_fourier_frequency}};

  const auto op0 = build_operator(model, t, 0.0);
  const auto op1 = build_operator(model, t, 1.0);
  const auto s = check_structure(op1);
  j["structure"] = {{"antisymmetry", s.antisymmetry},
                    {"constant_row_col", s.constant_row_col},
                    {"delta_asymmetry", s.delta_asymmetry},
                    {"delta_max_diagonal", s.delta_max_eigen},
                    {"rotation_commutator", s.rotation_commutator},
                    {"pass", s.antisymmetry < 1e-12 && s.constant_row_col < 1e-12}};
  for (const auto* op : {&op0, &op1}) {
    const auto lift = verify_lift_conditions(*op);
    j["lift"]["sigma_" + std::to_string(static_cast<int>(op->sigma()))] = {
        {"orthogonality", lift.orthogonality},
        {"energy", lift.energy},
        {"pairs", lift.pairs},
        {"pass", lift.orthogonality < 1e-10 && lift.energy < 1e-10}};
  }
  const int deg = std::max(1, t.max_hermite_degree - 2);
  const auto boch = verify_bochner(model, deg, 100, config.integrator.seed);
  j["bochner"] = {{"max_residual", boch.max_residual}, {"cases", boch.cases}, {"pass", boch.max_residual < 1e-10}};
  const auto drift = verify_drift_inequality(model, deg, 100, config.integrator.seed + 1);
  j["drift_inequality"] = {{"min_relative_slack", drift.min_slack},
                      {"violations", drift.violations},
                      {"cases", drift.cases},
                      {"pass", drift.violations == 0}};

  Truncation tl = t;
  tl.max_hermite_degree = std::max(3, tl.max_hermite_degree);
  tl.max_fourier_frequency = std::max(tl.max_fourier_frequency, 2 * model.max_frequency());
  const auto opl = build_operator(model, tl, 0.0);
  const auto c1 = c1_squared(model, compute_chi(model));
  if (lstar_l_work(opl) <= kMaxLStarLWork) {
    const auto ll = verify_lstar_l(opl, c1.per_frequency, 20, config.integrator.seed + 2);
    j["lstar_l"] = {{"max_residual", ll.max_residual},
                    {"max_norm_ratio", ll.max_norm_ratio},
                    {"c1_per_frequency", ll.c1},
                    {"c1_per_member", std::sqrt(c1.per_member)},
                    {"cases", ll.cases},
                    {"pass", ll.max_residual < 1e-10 && ll.within_c1}};
  } else {
    j["lstar_l"] = {{"skipped", "product quadrature too large (" + std::to_string(lstar_l_work(opl)) +
                                    " node-basis evaluations)"}};
  }

  const auto cb = collapsed_ou_block(op0);
  double collapse_err = 0.0;
  {
    std::vector<Eigen::Index> deg1;
    for (std::size_t i = 0; i < cb.indices.size(); ++i) {
      int tot = 0;
      for (int a : cb.indices[i]) tot += a;
      if (tot == 1) deg1.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd block(static_cast<Eigen::Index>(deg1.size()), static_cast<Eigen::Index>(deg1.size()));
    for (std::size_t a = 0; a < deg1.size(); ++a)
      for (std::size_t b = 0; b < deg1.size(); ++b) block(a, b) = cb.matrix(deg1[a], deg1[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    std::vector<double> theta;
    for (std::size_t k = 0; k < model.dim(); ++k) theta.push_back(-model.stiffness(k) / (2.0 * model.volume()));
    std::sort(theta.begin(), theta.end());
    for (std::size_t k = 0; k < theta.size(); ++k) collapse_err = std::max(collapse_err, std::abs(es.eigenvalues()[k] - theta[k]));
  }
  j["collapse_degree1"] = {{"max_error", collapse_err}, {"pass", collapse_err < 1e-10}};

  if (op1.size() <= 400) {
    const double dev = max_deviation_from_quadrature(op1);
    j["quadrature_agreement"] = {{"max_deviation", dev}, {"pass", dev < 1e-10}};
  } else {
    j["quadrature_agreement"] = {{"skipped", "basis larger than 400"}};
  }
  bool all = true;
  for (const auto& [k, v] : j.items())
    if (v.is_object() && v.contains("pass")) all = all && v["pass"].get<bool>();
  for (const auto& [k, v] : j["lift"].items()) all = all && v["pass"].get<bool>();
  j["all_pass"] = all;
  return j;
}

CommandResult cmd_galerkin(const ExperimentConfig& config) {
  CommandResult res;
  const auto rows = run_trel_sweep(config);
  std::ostringstream csv;
  csv << config.header_comment() << '\n';
  csv << "L,a,k,sigma,D,J,t_rel,abscissa,lower_bound,nu_inverse,t_rel_refined,relative_change,converged,"
         "sandwich_ok,basis_size,refined_basis_size,sigma_is_star\n";
  const std::string a = join(config.coefficients), k = join(config.frequencies);
  for (const auto& r : rows) {
    csv << format_double(r.L) << ',' << a << ',' << k << ',' << format_double(r.sigma) << ','
        << r.trel.truncation.max_hermite_degree << ',' << r.trel.truncation.max_fourier_frequency << ','
        << format_double(r.trel.t_rel) << ',' << format_double(r.trel.abscissa) << ','
        << format_double(r.lower_bound) << ',' << format_double(r.nu_inverse) << ','
        << format_double(r.trel.t_rel_refined) << ',' << format_double(r.trel.relative_change) << ','
        << (r.trel.converged ? 1 : 0) << ',' << (r.sandwich_ok() ? 1 : 0) << ',' << r.trel.basis_size << ','
        << r.trel.refined_basis_size << ',' << (r.sigma_is_star ? 1 : 0) << '\n';
    if (r.failed) {
      res.warnings.push_back("L=" + format_double(r.L) + " sigma=" + format_double(r.sigma) + ": " + r.failure);
      res.exit_code = 3;
    } else if (!r.trel.converged) {
      res.warnings.push_back("L=" + format_double(r.L) + " sigma=" + format_double(r.sigma) +
                             ": truncation not converged (relative change " + format_double(r.trel.relative_change) + ")");
      res.exit_code = 3;
    }
  }
  const auto csv_path = config.output_directory / "trel_sweep.csv";
  write_file_atomic(csv_path, csv.str());
  res.files.push_back(csv_path);

  const auto ver = run_verification(config);
  const auto json_path = config.output_directory / "verification.json";
  write_file_atomic(json_path, stamp(config, ver).dump(2) + "\n");
  res.files.push_back(json_path);
  if (!ver["all_pass"].get<bool>()) res.warnings.push_back("verification report has failing checks");
  return res;
}

CommandResult cmd_compare(const ExperimentConfig& config) {
  CommandResult res;
  const auto rows = run_trel_sweep(config);
  std::ostringstream csv;
  csv << config.header_comment() << '\n';
  csv << "L,sigma,t_rel,converged,lower_bound,nu_inverse,upper_proxy,comparison_bound,t_rel_over_lower,"
         "t_rel_over_proxy\n";
  // t_rel is the refined (D + 2, J + 2) value, the best estimate of each row.
  for (const auto& r : rows) {
    csv << format_double(r.L) << ',' << format_double(r.sigma) << ',' << format_double(r.trel.t_rel_refined) << ','
        << (r.trel.converged ? 1 : 0) << ',' << format_double(r.lower_bound) << ',' << format_double(r.nu_inverse)
        << ',' << format_double(r.upper_proxy) << ',' << format_double(r.comparison) << ','
        << format_double(r.trel.t_rel_refined / r.lower_bound) << ',' << format_double(r.trel.t_rel_refined / r.upper_proxy)
        << '\n';
    if (r.failed || !r.trel.converged) res.exit_code = 3;
  }
  const auto path = config.output_directory / "compare.csv";
  write_file_atomic(path, csv.str());
  res.files.push_back(path);
  return res;
}

}  // namespace srd
