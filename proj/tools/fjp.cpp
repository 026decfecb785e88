// Batch runner for the free Jacobi verification pipelines.

#include "fjp/cli/config.hpp"
#include "fjp/cli/pipelines.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>
#include <string>

namespace {

const char* kFooter = R"(Config files are INI text. Section [run] takes command, seed, out,
tolerance and threads; a section named after the command takes its
parameters (same names as the flags, without dashes). Flags override the
file. Unknown sections and keys are errors. See config/schema.json.

Exit status: 0 success, 1 verification failure, 2 configuration error.)";

}  // namespace

int main(int argc, char** argv) {
  using namespace fjp::cli;
  CLI::App app{"Free Jacobi process and unitary Brownian motion verification runner", "fjp"};
  app.footer(kFooter);
  app.require_subcommand(0, 1);

  std::string config_path;
  std::uint64_t seed = 1;
  std::string out = "out";
  double tolerance = 0.0;
  unsigned threads = 0;
  bool print_schema = false;
  auto* o_config = app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  auto* o_seed = app.add_option("--seed", seed, "master seed (u64)");
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_tol = app.add_option("--tolerance", tolerance, "override the verification threshold");
  auto* o_threads = app.add_option("--threads", threads, "worker threads, 0 = all cores");
  app.add_flag("--print-schema", print_schema, "print the parameter schema as JSON and exit");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  for (const auto& spec : command_specs()) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    sub->fallthrough();
    for (const auto& p : spec.params) {
      std::string help = p.help + " [" + to_string(p.type) + "]";
      if (!p.default_value.empty()) help += " (default " + p.default_value + ")";
      options[spec.name][p.name] = sub->add_option("--" + p.name, values[spec.name][p.name], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  if (print_schema) {
    std::cout << schema_json().dump(2) << '\n';
    return kExitOk;
  }

  ExperimentSpec spec;
  for (const auto* sub : app.get_subcommands()) {
    spec.command = sub->get_name();
    for (const auto& [name, opt] : options[spec.command]) {
      if (opt->count() > 0) spec.params[name] = values[spec.command][name];
    }
  }
  try {
    if (o_config->count() > 0) {
      apply_config(spec, read_ini(config_path));
    } else if (spec.command.empty()) {
      std::cerr << app.help() << '\n';
      return kExitConfigError;
    }
    if (o_seed->count() > 0) spec.seed = seed;
    if (o_out->count() > 0) spec.output_dir = out;
    if (o_tol->count() > 0) spec.tolerance = tolerance;
    if (o_threads->count() > 0) spec.threads = threads;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return run(spec, std::cout);
}
