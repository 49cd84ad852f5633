#include "chb/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "chb/errors.hpp"
#include "chb/io.hpp"

namespace chb {

namespace {

struct KeyValues {
  std::map<std::string, std::string> kv;
  std::set<std::string> consumed;
  std::string origin;

  bool has(const std::string& k) const { return kv.count(k) > 0; }

  std::string get_string(const std::string& k, const std::string& def) {
    consumed.insert(k);
    auto it = kv.find(k);
    return it == kv.end() ? def : it->second;
  }

  double get_double(const std::string& k, double def) {
    consumed.insert(k);
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    try {
      size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(origin + ": key '" + k + "' is not a number: " + it->second);
    }
  }

  long get_int(const std::string& k, long def) {
    consumed.insert(k);
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    try {
      size_t pos = 0;
      const long v = std::stol(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(origin + ": key '" + k + "' is not an integer: " + it->second);
    }
  }

  bool get_bool(const std::string& k, bool def) {
    consumed.insert(k);
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError(origin + ": key '" + k + "' is not a boolean: " + it->second);
  }

  std::vector<double> get_list(const std::string& k, std::vector<double> def) {
    consumed.insert(k);
    auto it = kv.find(k);
    if (it == kv.end()) return def;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      out.push_back(std::stod(item));
    }
    return out;
  }
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

SplitPotential parse_potential(KeyValues& kvs, const std::string& prefix) {
  const std::string kind = kvs.get_string(prefix + ".kind", "polynomial");
  if (kind == "polynomial")
    return SplitPotential::polynomial(kvs.get_double(prefix + ".alpha", 1.0));
  if (kind == "logarithmic")
    return SplitPotential::logarithmic(kvs.get_double(prefix + ".theta", 1.0),
                                       kvs.get_double(prefix + ".theta_c", 2.0));
  if (kind == "obstacle") {
    kvs.get_double(prefix + ".alpha", 1.0);  // tolerated, unused
    return SplitPotential::double_obstacle();
  }
  throw ValidationError("potential: unknown kind '" + kind +
                        "' (expected polynomial | logarithmic | obstacle)");
}

CoefficientFn parse_coefficient(KeyValues& kvs, const std::string& prefix,
                                const std::string& name, double default_value,
                                double hard_lo) {
  const std::string kind = kvs.get_string(prefix + ".kind", "constant");
  if (kind == "constant") {
    const double v = kvs.get_double(prefix + ".value", default_value);
    return CoefficientFn::constant(name, v);
  }
  if (kind == "affine") {
    const double lo = kvs.get_double(prefix + ".lower", hard_lo);
    const double hi = kvs.get_double(prefix + ".upper", std::max(1.0, lo));
    return CoefficientFn::clamped_affine(name, kvs.get_double(prefix + ".offset", 1.0),
                                         kvs.get_double(prefix + ".slope", 0.0), lo, hi);
  }
  throw ValidationError("coefficient " + name + ": unknown kind '" + kind +
                        "' (expected constant | affine)");
}

InitialCondition parse_initial(KeyValues& kvs, const std::string& prefix) {
  InitialCondition ic;
  const std::string kind = kvs.get_string(prefix + ".kind", "constant");
  if (kind == "constant")
    ic.kind = InitialCondition::Kind::Constant;
  else if (kind == "cos_product")
    ic.kind = InitialCondition::Kind::CosProduct;
  else if (kind == "cos_x")
    ic.kind = InitialCondition::Kind::CosX;
  else if (kind == "random")
    ic.kind = InitialCondition::Kind::Random;
  else if (kind == "tanh_x")
    ic.kind = InitialCondition::Kind::TanhX;
  else
    throw ValidationError(
        "initial data: unknown kind '" + kind +
        "' (expected constant | cos_product | cos_x | random | tanh_x)");
  ic.mean = kvs.get_double(prefix + ".mean", 0.0);
  ic.amplitude = kvs.get_double(prefix + ".amplitude", 0.0);
  ic.kx = kvs.get_double(prefix + ".kx", 1.0);
  ic.ky = kvs.get_double(prefix + ".ky", 1.0);
  ic.steepness = kvs.get_double(prefix + ".steepness", 10.0);
  return ic;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& origin) {
  KeyValues kvs;
  kvs.origin = origin;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
    if (kvs.kv.count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key " + key);
    kvs.kv[key] = val;
  }

  RunConfig rc;
  rc.source_path = origin;
  rc.source_hash = fnv1a_hash(text);
  rc.n = static_cast<int>(kvs.get_int("domain.n", 16));

  ModelConfig& m = rc.model;
  m.K = kvs.get_double("model.K", 0.0);
  m.flow_enabled = kvs.get_bool("model.flow_enabled", true);

  const std::string mode = kvs.get_string("potential.mode", "regular");
  if (mode == "regular")
    m.potentials.singular_mode = false;
  else if (mode == "singular")
    m.potentials.singular_mode = true;
  else
    throw ValidationError("potential.mode must be 'regular' or 'singular', got " + mode);
  m.potentials.yosida_eps = kvs.get_double("potential.epsilon", 0.125);
  m.potentials.kappa1 = kvs.get_double("potential.kappa1", 1.0);
  m.potentials.kappa2 = kvs.get_double("potential.kappa2", 1.0);
  m.potentials.bulk = parse_potential(kvs, "potential.bulk");
  m.potentials.surface = parse_potential(kvs, "potential.surface");

  m.coeffs.nu = parse_coefficient(kvs, "coeffs.nu", "nu", 1.0, 1e-8);
  m.coeffs.lambda = parse_coefficient(kvs, "coeffs.lambda", "lambda", 0.0, 0.0);
  m.coeffs.gamma = parse_coefficient(kvs, "coeffs.gamma", "gamma", 0.0, 0.0);
  m.coeffs.mob_bulk = parse_coefficient(kvs, "coeffs.mobility_bulk", "M_Omega", 1.0, 1e-8);
  m.coeffs.mob_surf = parse_coefficient(kvs, "coeffs.mobility_surface", "M_Gamma", 1.0, 1e-8);

  m.dt = kvs.get_double("time.dt", 1e-4);
  m.t_final = kvs.get_double("time.T", 1e-2);
  m.newton.tol = kvs.get_double("solver.newton_tol", 1e-10);
  m.newton.max_iter = static_cast<int>(kvs.get_int("solver.newton_max_iter", 30));
  m.max_step_halvings = static_cast<int>(kvs.get_int("solver.max_step_halvings", 8));
  {
    const std::string fs = kvs.get_string("solver.flow", "direct");
    if (fs == "iterative")
      m.flow_solver.iterative = true;
    else if (fs != "direct")
      throw ValidationError("solver.flow must be 'direct' or 'iterative', got " + fs);
    m.flow_solver.tol = kvs.get_double("solver.flow_tol", 1e-10);
    m.flow_solver.max_iter = static_cast<int>(kvs.get_int("solver.flow_max_iter", 4000));
  }
  m.phi0 = parse_initial(kvs, "init.phi");
  m.psi0_offset = kvs.get_double("init.psi_offset", 0.0);
  m.seed = static_cast<unsigned long long>(kvs.get_int("seed", 0));

  rc.output.dir = kvs.get_string("output.dir", "out");
  rc.output.fields_every = static_cast<int>(kvs.get_int("output.fields_every", 0));

  rc.k_list = kvs.get_list("sweep.k_list", {1e-1, 1e-2, 1e-3, 1e-4, 0.0});
  rc.eps_list = kvs.get_list("sweep.eps_list",
                             {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128});
  rc.delta_list = kvs.get_list("sweep.delta_list", {1e-2, 5e-3, 2.5e-3});
  {
    std::vector<double> lv = kvs.get_list("mms.levels", {4, 8, 16, 32});
    rc.mms_levels.clear();
    for (double v : lv) rc.mms_levels.push_back(static_cast<int>(v));
  }

  for (const auto& [k, v] : kvs.kv)
    if (!kvs.consumed.count(k))
      throw ValidationError(origin + ": unknown configuration key '" + k + "'");
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read configuration file: " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config(buf.str(), path);
}

void RunConfig::validate() const {
  if (n < 1) throw ValidationError("domain.n must be >= 1");
  model.validate();
  if (output.fields_every < 0)
    throw ValidationError("output.fields_every must be nonnegative");
}

}  // namespace chb
