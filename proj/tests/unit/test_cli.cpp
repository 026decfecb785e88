#include "fjp/cli/config.hpp"
#include "fjp/cli/pipelines.hpp"
#include "fjp/cli/plot_data.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fjp;
using namespace fjp::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fjp_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("INI parsing") {
  const auto ini = parse_ini("# comment\n[run]\ncommand = stationary\nseed=7\n\n; other\n[stationary]\nk = 4\n");
  CHECK(ini.at("run").at("command") == "stationary");
  CHECK(ini.at("run").at("seed") == "7");
  CHECK(ini.at("stationary").at("k") == "4");
  CHECK_THROWS_AS(parse_ini("k = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_ini("[run\n"), ConfigError);
  CHECK_THROWS_AS(parse_ini("[run]\nnovalue\n"), ConfigError);
}

TEST_CASE("applying a config file") {
  ExperimentSpec spec;
  spec.params["k"] = "5";
  apply_config(spec, parse_ini("[run]\ncommand = stationary\nseed = 9\nout = x\n[stationary]\nk = 4\nn-max = 6\n"
                               "[moments]\nk = 2\n"));
  CHECK(spec.command == "stationary");
  CHECK(spec.seed == 9);
  CHECK(spec.output_dir == fs::path("x"));
  CHECK(spec.params.at("k") == "5");
  CHECK(spec.params.at("n-max") == "6");
  CHECK_NOTHROW(spec.validate());
  ExperimentSpec bad;
  CHECK_THROWS_AS(apply_config(bad, parse_ini("[nonsense]\na = 1\n")), ConfigError);
  ExperimentSpec bad2;
  CHECK_THROWS_AS(apply_config(bad2, parse_ini("[run]\ncommand = stationary\n[stationary]\nbogus = 1\n")), ConfigError);
  ExperimentSpec bad3;
  CHECK_THROWS_AS(apply_config(bad3, parse_ini("[run]\ncolour = red\n")), ConfigError);
}

TEST_CASE("parameter validation and typed access") {
  ExperimentSpec spec;
  spec.command = "mgf-check";
  spec.params["z"] = "0.05+0.1i,i,-0.2i";
  CHECK_NOTHROW(spec.validate());
  const Params p(spec);
  const auto z = p.get_complex_list("z");
  REQUIRE(z.size() == 3);
  CHECK(z[0] == std::complex<double>(0.05, 0.1));
  CHECK(z[1] == std::complex<double>(0, 1));
  CHECK(z[2] == std::complex<double>(0, -0.2));
  CHECK(p.get_uint("k") == 3);
  CHECK(p.get_real_list("times") == std::vector<double>{0.5, 1, 2});
  spec.params["k"] = "three";
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.params.erase("k");
  spec.params["unknown"] = "1";
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK_THROWS_AS(command_spec("nope"), ConfigError);
  CHECK(parse_complex("-0.1") == std::complex<double>(-0.1, 0));
  CHECK_THROWS_AS(parse_complex("1+"), ConfigError);
  CHECK_THROWS_AS(parse_uint("-1"), ConfigError);
  CHECK(parse_bool("true"));
  CHECK_FALSE(parse_bool("false"));
  CHECK_THROWS_AS(parse_real("1e"), ConfigError);
}

TEST_CASE("checked-in schema matches the program") {
  CHECK(read_json(FJP_SCHEMA_FILE) == schema_json());
  ExperimentSpec spec;
  apply_config(spec, read_ini(FJP_EXAMPLE_CONFIG));
  CHECK(spec.command == "full-verify");
  CHECK_NOTHROW(spec.validate());
}

TEST_CASE("pipelines write artifacts and a manifest") {
  for (const std::string command : {"stationary", "expansion-verify", "cumulants"}) {
    ExperimentSpec spec;
    spec.command = command;
    spec.output_dir = scratch_dir(command);
    if (command == "expansion-verify") spec.params["n-max"] = "10";
    std::ostringstream log;
    const auto outcome = run_with_outcome(spec, log);
    INFO(log.str());
    CHECK(outcome.exit_code == kExitOk);
    CHECK_FALSE(outcome.checks.empty());
    const auto manifest = read_json(spec.output_dir / "manifest.json");
    CHECK(manifest["status"] == "pass");
    CHECK(manifest["spec"]["command"] == command);
    for (const auto& a : outcome.artifacts) CHECK(fs::exists(spec.output_dir / a));
    CHECK_FALSE(fs::exists(spec.output_dir / "manifest.json.tmp"));
  }
}

TEST_CASE("moments pipeline and verification failure") {
  ExperimentSpec spec;
  spec.command = "moments";
  spec.output_dir = scratch_dir("moments");
  spec.params = {{"k", "3"}, {"t-end", "1"}, {"n-max", "4"}};
  std::ostringstream log;
  CHECK(run(spec, log) == kExitOk);
  CHECK(fs::exists(spec.output_dir / "moments.csv"));
  CHECK(fs::exists(spec.output_dir / "moment_vs_t.csv"));

  spec.tolerance = 1e-300;
  spec.command = "characteristics";
  spec.params = {{"k", "3"}, {"t-end", "0.1"}};
  spec.output_dir = scratch_dir("strict");
  std::ostringstream log2;
  CHECK(run(spec, log2) == kExitVerificationFailed);
  CHECK(read_json(spec.output_dir / "manifest.json")["status"] == "fail");

  ExperimentSpec broken;
  broken.command = "stationary";
  broken.params = {{"k", "1"}};
  broken.output_dir = scratch_dir("broken");
  std::ostringstream log3;
  CHECK(run(broken, log3) == kExitConfigError);
}

TEST_CASE("plot data") {
  CHECK(plot_kind_from_string("moment-vs-t") == PlotKind::moment_vs_t);
  CHECK(to_string(PlotKind::histogram) == "histogram");
  CHECK_THROWS_AS(plot_kind_from_string("scatter"), std::invalid_argument);
  std::ostringstream os;
  const std::vector<double> eig{0.1, 0.2, 0.3, 0.35};
  write_histogram_csv(os, eig, 3, 4);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "bin_left,bin_right,bin_center,count,empirical_density,stationary_density");
  unsigned rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
  PlotInputs none;
  std::ostringstream sink;
  CHECK_THROWS_AS(emit_plot_data(PlotKind::moment_vs_t, none, sink), std::invalid_argument);
  const std::vector<ResidualRow> res{{"pde0", 3, 1.0, 8, 1e-9}};
  std::ostringstream rs;
  write_residual_csv(rs, res);
  CHECK(rs.str().rfind("check,k,t,order,residual\npde0,3,1,8,", 0) == 0);
}
