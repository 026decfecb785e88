#include "fjp/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fjp::cli {

std::string to_string(ParamType type) {
  switch (type) {
    case ParamType::uint: return "uint";
    case ParamType::real: return "real";
    case ParamType::rational: return "rational";
    case ParamType::string: return "string";
    case ParamType::boolean: return "bool";
    case ParamType::real_list: return "real_list";
    case ParamType::complex_list: return "complex_list";
  }
  return "string";
}

const std::vector<CommandSpec>& command_specs() {
  using T = ParamType;
  static const std::vector<CommandSpec> specs = {
      {"moments",
       "Integrate a moment ODE system and write m_n(t) on a grid.",
       {{"k", T::uint, "3", "number of motions; sets theta = 1/k when theta is empty"},
        {"lambda", T::rational, "1", "tau(P) / tau(Q)"},
        {"theta", T::rational, "", "tau(Q); default 1/k"},
        {"n-max", T::uint, "8", "highest moment"},
        {"t-end", T::real, "5", "final time"},
        {"dt", T::real, "0.1", "output grid spacing"},
        {"family", T::string, "m", "m, w (s_n and r_n) or complement"}}},
      {"stationary",
       "Stationary moments by the Catalan, Legendre and word-algebra routes.",
       {{"k", T::uint, "3", "number of motions"}, {"n-max", T::uint, "12", "highest moment"}}},
      {"expansion-verify",
       "Expand [(1+a)(1+b)]^n and compare K_{n,j} with (k-1)^{n-j} binom(2n, n-j).",
       {{"n-max", T::uint, "20", "highest power, at most 64"}}},
      {"cumulants",
       "Free cumulants of a projection: Legendre formula against NC Moebius inversion.",
       {{"alpha", T::rational, "1/2", "trace of the projection"}, {"n-max", T::uint, "12", "highest order"}}},
      {"mgf-check",
       "Extract rho_{t,k}, check the MGF relation and the transport pde residuals.",
       {{"k", T::uint, "3", "number of motions"},
        {"order", T::uint, "8", "series order of the pde residual checks"},
        {"mgf-order", T::uint, "16", "series order of the MGF relation check"},
        {"times", T::real_list, "0.5,1,2", "check times"},
        {"fd-step", T::real, "0.001", "central-difference spacing"},
        {"z", T::complex_list, "0.05,0.1i,-0.1", "sample points for the MGF relation"}}},
      {"characteristics",
       "Trace characteristic curves and the conserved quantity.",
       {{"k", T::uint, "3", "number of motions"},
        {"z0", T::complex_list, "0.05,0.1i", "starting points"},
        {"t-end", T::real, "0.5", "final time"},
        {"order", T::uint, "16", "series truncation order"},
        {"output-step", T::real, "0.01", "row spacing of the path CSV"}}},
      {"simulate",
       "Monte Carlo of k unitary Brownian motions of size N.",
       {{"N", T::uint, "200", "matrix size"},
        {"k", T::uint, "3", "number of motions"},
        {"t-end", T::real, "1", "final time"},
        {"dt", T::real, "0.001", "time step"},
        {"trajectories", T::uint, "50", "independent trajectories"},
        {"n-moments", T::uint, "3", "highest empirical moment, at most 12"},
        {"times", T::real_list, "", "observation times (multiples of dt); default t-end"},
        {"method", T::string, "spectral", "spectral or eigendecomposition"},
        {"observables", T::string, "density_matrix,w_moments",
         "comma list of density_matrix, w_moments, compressed_jacobi, complement"},
        {"p", T::rational, "", "rank fraction of P for compressed_jacobi; default 1/k"},
        {"q", T::rational, "", "rank fraction of Q; default p"},
        {"reproject-every", T::uint, "100", "steps between polar re-projections"},
        {"keep-samples", T::boolean, "false", "write every eigenvalue to samples.csv"},
        {"bins", T::uint, "40", "histogram bins when samples are kept"}}},
      {"full-verify",
       "Exact identities, ODE cross-checks, rho inversion, pde0 residual and a Monte Carlo comparison.",
       {{"k", T::uint, "3", "number of motions"},
        {"n-max", T::uint, "8", "highest moment"},
        {"t-end", T::real, "5", "final time"},
        {"mc-N", T::uint, "60", "Monte Carlo matrix size"},
        {"mc-trajectories", T::uint, "20", "Monte Carlo trajectories"},
        {"mc-dt", T::real, "0.01", "Monte Carlo time step"}}},
  };
  return specs;
}

const CommandSpec& command_spec(std::string_view command) {
  for (const auto& spec : command_specs()) {
    if (spec.name == command) return spec;
  }
  throw ConfigError("unknown command: " + std::string(command));
}

nlohmann::json schema_json() {
  nlohmann::json commands = nlohmann::json::object();
  for (const auto& spec : command_specs()) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& p : spec.params) {
      params[p.name] = {{"type", to_string(p.type)}, {"default", p.default_value}, {"help", p.help}};
    }
    commands[spec.name] = {{"help", spec.help}, {"params", std::move(params)}};
  }
  nlohmann::json run = {
      {"command", {{"type", "string"}, {"default", ""}, {"help", "command to run"}}},
      {"seed", {{"type", "uint"}, {"default", "1"}, {"help", "master seed"}}},
      {"out", {{"type", "string"}, {"default", "out"}, {"help", "output directory"}}},
      {"tolerance", {{"type", "real"}, {"default", ""}, {"help", "overrides the verification threshold"}}},
      {"threads", {{"type", "uint"}, {"default", "0"}, {"help", "worker threads; 0 = all cores"}}}};
  return {{"format", "INI: [run] section plus one section per command, key = value"},
          {"run", std::move(run)},
          {"commands", std::move(commands)}};
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const ParamSpec* find_param(const CommandSpec& spec, const std::string& name) {
  for (const auto& p : spec.params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void check_value(const ParamSpec& p, const std::string& value) {
  if (value.empty()) return;
  switch (p.type) {
    case ParamType::uint: parse_uint(value); break;
    case ParamType::real: parse_real(value); break;
    case ParamType::rational:
      try {
        parse_rational(value);
      } catch (const std::exception& e) {
        throw ConfigError(p.name + ": " + e.what());
      }
      break;
    case ParamType::boolean: parse_bool(value); break;
    case ParamType::real_list:
      for (const auto& v : split_list(value)) parse_real(v);
      break;
    case ParamType::complex_list:
      for (const auto& v : split_list(value)) parse_complex(v);
      break;
    case ParamType::string: break;
  }
}

}  // namespace

double parse_real(std::string_view text) {
  const std::string s = trim(text);
  double value = 0.0;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || result.ec != std::errc() || result.ptr != s.data() + s.size()) {
    throw ConfigError("not a number: '" + s + "'");
  }
  return value;
}

unsigned parse_uint(std::string_view text) {
  const std::string s = trim(text);
  unsigned long long value = 0;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || result.ec != std::errc() || result.ptr != s.data() + s.size() || value > 0xffffffffULL) {
    throw ConfigError("not an unsigned integer: '" + s + "'");
  }
  return static_cast<unsigned>(value);
}

bool parse_bool(std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("not a boolean: '" + s + "'");
}

std::complex<double> parse_complex(std::string_view text) {
  std::string s = trim(text);
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
  if (s.empty()) throw ConfigError("empty complex number");
  if (s.back() != 'i') return {parse_real(s), 0.0};
  s.pop_back();
  // Split at the last sign that is not the leading one or part of an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  auto imag_of = [](const std::string& part) {
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    return parse_real(part[0] == '+' ? part.substr(1) : part);
  };
  if (split == std::string::npos) return {0.0, imag_of(s)};
  return {parse_real(s.substr(0, split)), imag_of(s.substr(split))};
}

void ExperimentSpec::validate() const {
  const CommandSpec& spec = command_spec(command);
  for (const auto& [key, value] : params) {
    const ParamSpec* p = find_param(spec, key);
    if (p == nullptr) throw ConfigError("unknown parameter '" + key + "' for command " + command);
    check_value(*p, value);
  }
  if (tolerance && !(*tolerance > 0)) throw ConfigError("tolerance must be positive");
}

std::map<std::string, std::string> ExperimentSpec::resolved_params() const {
  std::map<std::string, std::string> out;
  for (const auto& p : command_spec(command).params) out[p.name] = p.default_value;
  for (const auto& [key, value] : params) out[key] = value;
  return out;
}

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json j = {{"command", command},
                      {"params", resolved_params()},
                      {"output_dir", output_dir.string()},
                      {"seed", seed},
                      {"threads", threads}};
  j["tolerance"] = tolerance ? nlohmann::json(*tolerance) : nlohmann::json(nullptr);
  return j;
}

IniData parse_ini(std::string_view text) {
  IniData out;
  std::string section;
  std::stringstream ss{std::string(text)};
  std::string line;
  unsigned number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("line " + std::to_string(number) + ": bad section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError("line " + std::to_string(number) + ": empty section name");
      out[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(number) + ": key outside a section");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    if (out[section].count(key)) throw ConfigError("line " + std::to_string(number) + ": duplicate key " + key);
    out[section][key] = value;
  }
  return out;
}

IniData read_ini(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_ini(buffer.str());
}

void apply_config(ExperimentSpec& spec, const IniData& ini) {
  auto run = ini.find("run");
  if (run != ini.end()) {
    for (const auto& [key, value] : run->second) {
      if (key == "command") {
        if (spec.command.empty()) spec.command = value;
      } else if (key == "seed") {
        const std::string v = trim(value);
        std::uint64_t seed = 0;
        const auto r = std::from_chars(v.data(), v.data() + v.size(), seed);
        if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size()) {
          throw ConfigError("seed: not an unsigned integer");
        }
        spec.seed = seed;
      } else if (key == "out") {
        spec.output_dir = value;
      } else if (key == "tolerance") {
        spec.tolerance = parse_real(value);
      } else if (key == "threads") {
        spec.threads = parse_uint(value);
      } else {
        throw ConfigError("unknown key '" + key + "' in [run]");
      }
    }
  }
  if (spec.command.empty()) throw ConfigError("no command given");
  command_spec(spec.command);
  for (const auto& [section, values] : ini) {
    if (section == "run") continue;
    if (section != spec.command) {
      bool known = false;
      for (const auto& c : command_specs()) known = known || c.name == section;
      if (!known) throw ConfigError("unknown section [" + section + "]");
      continue;  // sections for other commands are allowed and ignored
    }
    for (const auto& [key, value] : values) {
      if (find_param(command_spec(spec.command), key) == nullptr) {
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      }
      spec.params.try_emplace(key, value);
    }
  }
}

Params::Params(const ExperimentSpec& spec) : values_(spec.resolved_params()) {}

bool Params::has(const std::string& name) const {
  auto it = values_.find(name);
  return it != values_.end() && !it->second.empty();
}

const std::string& Params::raw(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("parameter not in schema: " + name);
  return it->second;
}

unsigned Params::get_uint(const std::string& name) const { return parse_uint(raw(name)); }
double Params::get_real(const std::string& name) const { return parse_real(raw(name)); }
std::string Params::get_string(const std::string& name) const { return raw(name); }
bool Params::get_bool(const std::string& name) const { return parse_bool(raw(name)); }

Rational Params::get_rational(const std::string& name) const {
  try {
    return parse_rational(raw(name));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

std::vector<double> Params::get_real_list(const std::string& name) const {
  std::vector<double> out;
  for (const auto& v : split_list(raw(name))) out.push_back(parse_real(v));
  return out;
}

std::vector<std::complex<double>> Params::get_complex_list(const std::string& name) const {
  std::vector<std::complex<double>> out;
  for (const auto& v : split_list(raw(name))) out.push_back(parse_complex(v));
  return out;
}

}  // namespace fjp::cli
