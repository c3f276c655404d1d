#include "srd/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "srd/errors.hpp"

namespace srd {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ValidationError(field + ": " + msg);
}

// Reject keys that the defaults do not declare, so typos are not ignored.
void check_known_keys(const json& value, const json& reference, const std::string& prefix) {
  if (!value.is_object() || !reference.is_object()) return;
  for (const auto& [key, v] : value.items()) {
    const std::string field = prefix.empty() ? key : prefix + "." + key;
    if (!reference.contains(key)) fail(field, "unknown key");
    check_known_keys(v, reference.at(key), field);
  }
}

const json& at(const json& tree, const std::string& path) {
  const json* cur = &tree;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object() || !cur->contains(key)) fail(path, "missing");
    cur = &cur->at(key);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return *cur;
}

double number(const json& tree, const std::string& path) {
  const json& v = at(tree, path);
  if (!v.is_number()) fail(path, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

double positive(const json& tree, const std::string& path) {
  const double x = number(tree, path);
  if (!(x > 0.0)) fail(path, "must be > 0");
  return x;
}

std::int64_t integer(const json& tree, const std::string& path, std::int64_t min_value) {
  const json& v = at(tree, path);
  if (!v.is_number_integer()) fail(path, "must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < min_value) fail(path, "must be >= " + std::to_string(min_value));
  return x;
}

std::string text(const json& tree, const std::string& path) {
  const json& v = at(tree, path);
  if (!v.is_string()) fail(path, "must be a string");
  return v.get<std::string>();
}

std::vector<double> number_list(const json& tree, const std::string& path) {
  const json& v = at(tree, path);
  if (!v.is_array()) fail(path, "must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

json parse_assignment_value(const std::string& raw) {
  try {
    return json::parse(raw);
  } catch (const json::parse_error&) {
    return raw;
  }
}

void apply_assignment(json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail("--set " + assignment, "expected key.path=value");
  const std::string path = assignment.substr(0, eq);
  std::string pointer = "/" + path;
  for (auto& c : pointer)
    if (c == '.') c = '/';
  tree[json::json_pointer(pointer)] = parse_assignment_value(assignment.substr(eq + 1));
}

}  // namespace

json default_config_json() {
  return json::parse(R"({
    "model": {"L": 1.0, "frequencies": [1], "coefficients": [1.0]},
    "l_grid": [],
    "sigma_grid": [0.5, 1.0, 2.0, "star"],
    "truncation": {"D": 6, "J": 6, "max_refinements": 3, "convergence_threshold": 0.02},
    "integrator": {"dt": 0.001, "scheme": "strang_splitting", "seed": 20240101, "sigma": 1.0,
                   "n_steps": 5000, "n_trajectories": 10000, "record_every": 100,
                   "n_bins": 32, "max_lag": 40},
    "bounds": {"C_universal": 1.0, "T": null},
    "output": {"directory": "srd_output", "formats": ["csv", "json"]}
  })");
}

SpectralModel ExperimentConfig::model_at(double L_value) const {
  return SpectralModel::torus(L_value, frequencies, coefficients);
}

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::string ExperimentConfig::header_comment() const {
  return "# srdlab " + std::string(kVersion) + " config_hash=" + hash_hex();
}

ExperimentConfig parse_config(const json& tree) {
  if (!tree.is_object()) fail("config", "must be a JSON object");
  check_known_keys(tree, default_config_json(), "");
  ExperimentConfig c;
  c.tree = tree;

  c.L = positive(tree, "model.L");
  const json& freqs = at(tree, "model.frequencies");
  if (!freqs.is_array()) fail("model.frequencies", "must be an array");
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (!freqs[i].is_number_integer()) fail("model.frequencies[" + std::to_string(i) + "]", "must be an integer");
    c.frequencies.push_back(freqs[i].get<int>());
  }
  c.coefficients = number_list(tree, "model.coefficients");
  (void)c.model();  // model-level validation with field names

  c.l_grid = number_list(tree, "l_grid");
  for (std::size_t i = 0; i < c.l_grid.size(); ++i)
    if (!(c.l_grid[i] > 0.0) || !std::isfinite(c.l_grid[i])) fail("l_grid[" + std::to_string(i) + "]", "must be > 0");
  if (c.l_grid.empty()) c.l_grid.push_back(c.L);

  const json& sg = at(tree, "sigma_grid");
  if (!sg.is_array() || sg.empty()) fail("sigma_grid", "must be a non-empty array");
  for (std::size_t i = 0; i < sg.size(); ++i) {
    const std::string field = "sigma_grid[" + std::to_string(i) + "]";
    if (sg[i].is_string()) {
      if (sg[i].get<std::string>() != "star") fail(field, "string entries must be \"star\"");
      c.sigma_grid.push_back({true, 0.0});
    } else if (sg[i].is_number()) {
      const double s = sg[i].get<double>();
      if (!(s >= 0.0) || !std::isfinite(s)) fail(field, "must be finite and >= 0");
      c.sigma_grid.push_back({false, s});
    } else {
      fail(field, "must be a number or \"star\"");
    }
  }

  c.truncation.max_hermite_degree = static_cast<int>(integer(tree, "truncation.D", 1));
  c.truncation.max_fourier_frequency = static_cast<int>(integer(tree, "truncation.J", 1));
  const int kmax = c.model().max_frequency();
  if (c.truncation.max_fourier_frequency < kmax)
    fail("truncation.J", "must be >= the largest model frequency " + std::to_string(kmax));
  c.max_refinements = static_cast<int>(integer(tree, "truncation.max_refinements", 0));
  c.convergence_threshold = positive(tree, "truncation.convergence_threshold");

  c.integrator.dt = positive(tree, "integrator.dt");
  c.integrator.scheme = parse_scheme(text(tree, "integrator.scheme"));
  c.integrator.seed = static_cast<std::uint64_t>(integer(tree, "integrator.seed", 0));
  c.integrator.sigma = number(tree, "integrator.sigma");
  if (c.integrator.sigma < 0.0) fail("integrator.sigma", "must be >= 0");
  c.ensemble.n_steps = static_cast<std::uint64_t>(integer(tree, "integrator.n_steps", 1));
  c.ensemble.n_trajectories = static_cast<std::uint64_t>(integer(tree, "integrator.n_trajectories", 1));
  c.ensemble.record_every = static_cast<std::uint64_t>(integer(tree, "integrator.record_every", 1));
  c.ensemble.n_bins = static_cast<std::size_t>(integer(tree, "integrator.n_bins", 1));
  c.ensemble.max_lag = static_cast<std::size_t>(integer(tree, "integrator.max_lag", 0));

  c.C_universal = positive(tree, "bounds.C_universal");
  if (!at(tree, "bounds.T").is_null()) c.horizon_T = positive(tree, "bounds.T");

  c.output_directory = text(tree, "output.directory");
  if (c.output_directory.empty()) fail("output.directory", "must not be empty");
  const json& formats = at(tree, "output.formats");
  if (!formats.is_array()) fail("output.formats", "must be an array");
  for (std::size_t i = 0; i < formats.size(); ++i) {
    const std::string field = "output.formats[" + std::to_string(i) + "]";
    if (!formats[i].is_string()) fail(field, "must be a string");
    const auto f = formats[i].get<std::string>();
    if (f != "csv" && f != "json") fail(field, "must be \"csv\" or \"json\"");
    c.formats.push_back(f);
  }

  json hashed = tree;
  hashed.erase("output");
  c.hash = fnv1a64(hashed.dump());
  return c;
}

ExperimentConfig load_config(const ConfigSources& sources) {
  json tree = default_config_json();
  if (sources.file) {
    std::ifstream in(*sources.file);
    if (!in) fail("--config", "cannot open " + sources.file->string());
    json file;
    try {
      file = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
      fail("--config", std::string("JSON parse error: ") + e.what());
    }
    if (!file.is_object()) fail("--config", "top level must be an object");
    check_known_keys(file, tree, "");
    tree.merge_patch(file);
    // merge_patch drops keys set to null; keep the documented T = null default.
    if (!tree["bounds"].contains("T")) tree["bounds"]["T"] = nullptr;
  }
  if (sources.env_output_dir && !sources.env_output_dir->empty())
    tree["output"]["directory"] = *sources.env_output_dir;
  for (const auto& a : sources.assignments) apply_assignment(tree, a);
  if (sources.output_dir_flag) tree["output"]["directory"] = *sources.output_dir_flag;
  return parse_config(tree);
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace srd
