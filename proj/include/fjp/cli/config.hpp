#pragma once

// Experiment specification for the batch runner: the parameter schema of
// every command, INI config files and typed parameter access.

#include "fjp/exact.hpp"

#include <nlohmann/json.hpp>

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fjp::cli {

/// Bad flags, unknown keys or values that fail to parse. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParamType { uint, real, rational, string, boolean, real_list, complex_list };

std::string to_string(ParamType type);

struct ParamSpec {
  std::string name;
  ParamType type;
  std::string default_value;  // empty: derived from other parameters
  std::string help;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<ParamSpec> params;
};

const std::vector<CommandSpec>& command_specs();
/// Throws ConfigError for an unknown command.
const CommandSpec& command_spec(std::string_view command);

/// The schema as JSON; matches config/schema.json.
nlohmann::json schema_json();

struct ExperimentSpec {
  std::string command;
  std::map<std::string, std::string> params;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;
  std::optional<double> tolerance;
  unsigned threads = 0;

  /// Every key is checked against the command schema; values are parsed
  /// once to surface errors early. Throws ConfigError.
  void validate() const;
  /// Parameters with defaults filled in (derived defaults stay empty).
  std::map<std::string, std::string> resolved_params() const;
  nlohmann::json to_json() const;
};

/// Sections of an INI file. Lines are `key = value`, `[section]` headers,
/// blank, or comments starting with '#' or ';'. Throws ConfigError.
using IniData = std::map<std::string, std::map<std::string, std::string>>;
IniData parse_ini(std::string_view text);
IniData read_ini(const std::filesystem::path& path);

/// Applies a config file: section [run] may set command, seed, out,
/// tolerance, threads (command only when spec.command is empty); the section
/// named after the command holds its parameters, where keys already in
/// spec.params win. Sections of other commands are ignored. Unknown sections
/// and keys are rejected.
void apply_config(ExperimentSpec& spec, const IniData& ini);

/// Typed view of resolved parameters.
class Params {
 public:
  Params(const ExperimentSpec& spec);  // NOLINT(google-explicit-constructor)

  bool has(const std::string& name) const;
  unsigned get_uint(const std::string& name) const;
  double get_real(const std::string& name) const;
  Rational get_rational(const std::string& name) const;
  std::string get_string(const std::string& name) const;
  bool get_bool(const std::string& name) const;
  std::vector<double> get_real_list(const std::string& name) const;
  std::vector<std::complex<double>> get_complex_list(const std::string& name) const;

 private:
  const std::string& raw(const std::string& name) const;
  std::map<std::string, std::string> values_;
};

/// "0.1", "-0.2i", "0.05+0.1i", "i". Throws ConfigError.
std::complex<double> parse_complex(std::string_view text);
double parse_real(std::string_view text);
unsigned parse_uint(std::string_view text);
bool parse_bool(std::string_view text);

}  // namespace fjp::cli
