#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "srd/commands.hpp"
#include "srd/errors.hpp"

using namespace srd;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

// A fresh scratch directory per use, removed on scope exit.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name) : path_(fs::temp_directory_path() / ("srd_cli_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  [[nodiscard]] const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig config_with(const fs::path& out, std::vector<std::string> sets = {}) {
  ConfigSources src;
  src.assignments = std::move(sets);
  src.output_dir_flag = out.string();
  return load_config(src);
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(SRDLAB_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults validate and carry a stable hash") {
  const auto c = load_config({});
  CHECK(c.L == 1.0);
  CHECK(c.frequencies == std::vector<int>{1});
  CHECK(c.l_grid == std::vector<double>{1.0});
  CHECK(c.sigma_grid.size() == 4);
  CHECK(c.sigma_grid.back().star);
  CHECK(c.truncation.max_hermite_degree == 6);
  CHECK(c.integrator.scheme == Scheme::strang_splitting);
  CHECK_FALSE(c.horizon_T.has_value());
  CHECK(c.hash_hex().size() == 16);
  CHECK(c.header_comment() == "# srdlab 0.1.0 config_hash=" + c.hash_hex());
  CHECK(load_config({}).hash == c.hash);
}

TEST_CASE("validation names the offending field") {
  auto message = [](std::vector<std::string> sets) -> std::string {
    ConfigSources src;
    src.assignments = std::move(sets);
    try {
      (void)load_config(src);
    } catch (const ValidationError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message({"model.colour=1"}).find("model.colour: unknown key") != std::string::npos);
  CHECK_FALSE(message({"model.frequencies=[]", "model.coefficients=[]"}).empty());
  CHECK(message({"model.coefficients=[]"}).find("coefficient") != std::string::npos);
  CHECK(message({"model.L=-1"}).find("model.L") != std::string::npos);
  CHECK(message({"truncation.J=0"}).find("truncation.J") != std::string::npos);
  CHECK(message({"sigma_grid=[\"best\"]"}).find("sigma_grid[0]") != std::string::npos);
  CHECK(message({"integrator.scheme=rk4"}).find("scheme") != std::string::npos);
  CHECK(message({"output.formats=[\"xml\"]"}).find("output.formats[0]") != std::string::npos);
  CHECK(message({"bounds.T=0"}).find("bounds.T") != std::string::npos);
  CHECK(message({"nonsense"}).find("expected key.path=value") != std::string::npos);
}

TEST_CASE("source precedence and hash scope") {
  ScratchDir dir("precedence");
  const auto file = dir.path() / "cfg.json";
  {
    std::ofstream out(file);
    out << R"({"model": {"L": 2.0}, "truncation": {"D": 4}, "output": {"directory": "from_file"}})";
  }
  ConfigSources src;
  src.file = file;
  CHECK(load_config(src).L == 2.0);
  CHECK(load_config(src).truncation.max_hermite_degree == 4);
  CHECK(load_config(src).truncation.max_fourier_frequency == 6);
  CHECK(load_config(src).output_directory == "from_file");
  src.env_output_dir = "from_env";
  CHECK(load_config(src).output_directory == "from_env");
  src.assignments = {"output.directory=from_set", "model.L=3"};
  CHECK(load_config(src).output_directory == "from_set");
  CHECK(load_config(src).L == 3.0);
  src.output_dir_flag = "from_flag";
  const auto c = load_config(src);
  CHECK(c.output_directory == "from_flag");
  // The output section does not enter the hash; model parameters do.
  ConfigSources moved = src;
  moved.output_dir_flag = "elsewhere";
  CHECK(load_config(moved).hash == c.hash);
  ConfigSources changed = src;
  changed.assignments.push_back("model.L=3.5");
  CHECK(load_config(changed).hash != c.hash);

  std::ofstream(dir.path() / "bad.json") << R"({"modle": {}})";
  src.file = dir.path() / "bad.json";
  CHECK_THROWS_AS(load_config(src), ValidationError);
}

TEST_CASE("tensors command on the single pair") {
  ScratchDir dir("tensors");
  const auto c = config_with(dir.path());
  const auto res = cmd_tensors(c);
  CHECK(res.exit_code == 0);
  const auto csv = slurp(dir.path() / "chi_entries.csv");
  CHECK(csv.rfind(c.header_comment() + "\n", 0) == 0);
  CHECK(csv.find("i,j,k,l,kind,value\n") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir.path() / "chi_summary.json"));
  CHECK(j["config_hash"] == c.hash_hex());
  CHECK(j["version"] == "0.1.0");
  const auto& sf = j["single_frequency"];
  CHECK(sf["entry_cccc"].get<double>() == doctest::Approx(3.0 / (4 * pi)).epsilon(1e-12));
  CHECK(sf["entry_ccss"].get<double>() == doctest::Approx(1.0 / (4 * pi)).epsilon(1e-12));
  CHECK(j["chi_times_4piL"].get<double>() == doctest::Approx(std::sqrt(24.0)).epsilon(1e-12));
  CHECK(sf["aggregate_eight_mixed_sqrt26"].get<double>() ==
        doctest::Approx(std::sqrt(26.0) / (4 * pi)).epsilon(1e-12));
  CHECK(j["selection_rule"]["mismatches"] == 0);
}

TEST_CASE("tensors command with four frequencies") {
  ScratchDir dir("tensors4");
  const auto c = config_with(dir.path(), {"model.frequencies=[1,2,3,5]", "model.coefficients=[1,1,1,1]"});
  (void)cmd_tensors(c);
  const auto j = nlohmann::json::parse(slurp(dir.path() / "chi_summary.json"));
  CHECK(j["selection_rule"]["mismatches"] == 0);
  CHECK(j["selection_rule"]["rule_nonzero"] == j["selection_rule"]["quadrature_nonzero"]);
  CHECK(j["selection_rule"]["rule_nonzero"].get<int>() > 0);
}

TEST_CASE("bounds command") {
  ScratchDir dir("bounds");
  const auto c = config_with(dir.path(), {"l_grid=[1,2]"});
  (void)cmd_bounds(c);
  const auto j = nlohmann::json::parse(slurp(dir.path() / "bounds.json"));
  CHECK(j["config_hash"] == c.hash_hex());
  REQUIRE(j["per_L"].size() == 2);
  const auto& l1 = j["per_L"][0];
  CHECK(l1["t_rel_lower"].get<double>() == doctest::Approx(std::sqrt(pi / 2)).epsilon(1e-14));
  CHECK(l1["c2_sq"].get<double>() == doctest::Approx(8 * pi).epsilon(1e-14));
  CHECK(j["per_L"][1]["c2_sq"].get<double>() == doctest::Approx(16 * pi).epsilon(1e-14));
  CHECK(l1["sigma_sweep"].size() == 4);
  CHECK(l1["sigma_sweep"][3]["star"] == true);
  CHECK(l1["sigma_sweep"][0]["rate_nu"].contains("per_member"));
  CHECK(l1.contains("minimized_upper_proxy"));
  CHECK(l1["sqrt_L_plus_L3_over_a"].get<double>() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("simulate command is seeded and flags small samples") {
  ScratchDir dir("simulate");
  const std::vector<std::string> sets{"integrator.n_trajectories=200", "integrator.n_steps=200",
                                      "integrator.record_every=20", "integrator.max_lag=4"};
  const auto c = config_with(dir.path() / "a", sets);
  const auto first = cmd_simulate(c);
  const auto again = cmd_simulate(config_with(dir.path() / "b", sets));
  CHECK(slurp(dir.path() / "a" / "stats.csv") == slurp(dir.path() / "b" / "stats.csv"));
  CHECK(first.warnings.size() == 1);  // 200 < 10^4 effective samples
  CHECK(slurp(dir.path() / "a" / "stats.csv").find("diagnostic,insufficient_effective_samples,0,1") !=
        std::string::npos);

  auto zero = sets;
  zero.push_back("integrator.sigma=0");
  const auto quiet = cmd_simulate(config_with(dir.path() / "c", zero));
  bool flagged = false;
  for (const auto& w : quiet.warnings) flagged = flagged || w.find("possibly not unique") != std::string::npos;
  CHECK(flagged);
}

TEST_CASE("galerkin and compare commands") {
  ScratchDir dir("galerkin");
  const auto c = config_with(dir.path(), {"truncation.D=4", "truncation.J=4", "truncation.max_refinements=0",
                                          "truncation.convergence_threshold=0.5", "sigma_grid=[1.0,\"star\"]"});
  const auto res = cmd_galerkin(c);
  CHECK(res.exit_code == 0);
  const auto csv = slurp(dir.path() / "trel_sweep.csv");
  CHECK(csv.rfind(c.header_comment(), 0) == 0);
  CHECK(csv.find("L,a,k,sigma,D,J,t_rel,") != std::string::npos);
  const auto ver = nlohmann::json::parse(slurp(dir.path() / "verification.json"));
  CHECK(ver["all_pass"] == true);

  const auto rows = run_trel_sweep(c);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK_FALSE(r.failed);
    CHECK(r.sandwich_ok());
  }
  CHECK(rows[1].sigma_is_star);

  (void)cmd_compare(c);
  const auto cmp = slurp(dir.path() / "compare.csv");
  CHECK(cmp.find("L,sigma,t_rel,converged,lower_bound,") != std::string::npos);
}

TEST_CASE("binary exit codes") {
  ScratchDir dir("binary");
  const std::string out = " --output-dir " + dir.path().string();
  CHECK(run_binary("tensors" + out) == 0);
  CHECK(fs::exists(dir.path() / "chi_entries.csv"));
  CHECK(run_binary("bounds --set model.coefficients=[]" + out) == 2);
  CHECK(run_binary("bounds --set model.zeta=1" + out) == 2);
  CHECK(run_binary("galerkin --set model.coefficients=[0]" + out) == 2);
  // Two steps at D = J = 2 cannot satisfy a 1e-6 agreement threshold.
  CHECK(run_binary("galerkin --set truncation.D=2 truncation.J=2 truncation.max_refinements=0 "
                   "truncation.convergence_threshold=1e-6 sigma_grid=[1.0]" + out) == 3);
  CHECK(run_binary("--version") == 0);
  CHECK(run_binary("") != 0);
}

}  // TEST_SUITE
