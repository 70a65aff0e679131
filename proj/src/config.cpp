#include "h2flow/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "h2flow/errors.hpp"

namespace h2flow {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, int line, const std::string& key) {
  const std::string t = trim(text);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    throw ParseError(line, key + ": expected a finite number, got '" + t + "'");
  return v;
}

long long parse_integer(const std::string& text, int line, const std::string& key) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ParseError(line, key + ": expected an integer, got '" + t + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text, int line, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(item, line, key));
  }
  return out;
}

CFunction parse_cfunction(const std::string& text, int line) {
  const std::string t = trim(text);
  if (t == "min") return CFunction::min;
  if (t == "fischer_burmeister") return CFunction::fischer_burmeister;
  throw ParseError(line, "solver.c_function: expected min or fischer_burmeister, got '" + t + "'");
}

DiffusionClosure parse_closure(const std::string& text, int line) {
  const std::string t = trim(text);
  if (t == "dissolved_mass") return DiffusionClosure::dissolved_mass;
  if (t == "water_molar") return DiffusionClosure::water_molar;
  throw ParseError(line, "fluid.diffusion_closure: expected dissolved_mass or water_molar");
}

std::string closure_name(DiffusionClosure c) {
  return c == DiffusionClosure::dissolved_mass ? "dissolved_mass" : "water_molar";
}

struct Key {
  const char* name;
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::string&, int)> set;
};

Key real(const char* name, double Config::*outer) {
  return {name, [outer](const Config& c) { return format_double(c.*outer); },
          [outer, name](Config& c, const std::string& v, int line) {
            c.*outer = parse_double(v, line, name);
          }};
}

template <typename Part>
Key real(const char* name, Part Config::*part, double Part::*field) {
  return {name, [=](const Config& c) { return format_double(c.*part.*field); },
          [=](Config& c, const std::string& v, int line) {
            c.*part.*field = parse_double(v, line, name);
          }};
}

template <typename Part>
Key integer(const char* name, Part Config::*part, int Part::*field) {
  return {name, [=](const Config& c) { return std::to_string(c.*part.*field); },
          [=](Config& c, const std::string& v, int line) {
            const long long n = parse_integer(v, line, name);
            if (n < -1000000 || n > 1000000) throw ParseError(line, std::string(name) + ": out of range");
            c.*part.*field = static_cast<int>(n);
          }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"grid.n_cells", [](const Config& c) { return std::to_string(c.n_cells); },
       [](Config& c, const std::string& v, int line) {
         c.n_cells = static_cast<Eigen::Index>(parse_integer(v, line, "grid.n_cells"));
       }},
      real("grid.length_m", &Config::length),
      real("medium.permeability_m2", &Config::medium, &MediumParams::permeability),
      real("medium.porosity", &Config::medium, &MediumParams::porosity),
      real("medium.vg_pressure_pa", &Config::medium, &MediumParams::vg_pressure),
      real("medium.n", &Config::medium, &MediumParams::vg_n),
      real("medium.residual_liquid_sat", &Config::medium, &MediumParams::residual_liquid_sat),
      real("medium.residual_gas_sat", &Config::medium, &MediumParams::residual_gas_sat),
      real("fluid.viscosity_liquid_pa_s", &Config::fluid, &FluidParams::viscosity_liquid),
      real("fluid.viscosity_gas_pa_s", &Config::fluid, &FluidParams::viscosity_gas),
      real("fluid.liquid_density_kg_m3", &Config::fluid, &FluidParams::liquid_density),
      real("fluid.henry_mol_pa_m3", &Config::fluid, &FluidParams::henry_molar),
      real("fluid.molar_mass_water_kg_mol", &Config::fluid, &FluidParams::molar_mass_water),
      real("fluid.molar_mass_hydrogen_kg_mol", &Config::fluid, &FluidParams::molar_mass_hydrogen),
      real("fluid.diffusion_m2_s", &Config::fluid, &FluidParams::diffusion),
      real("fluid.temperature_k", &Config::fluid, &FluidParams::temperature),
      real("fluid.reference_gas_density_kg_m3", &Config::fluid,
           &FluidParams::reference_gas_density),
      {"fluid.diffusion_closure",
       [](const Config& c) { return closure_name(c.fluid.diffusion_closure); },
       [](Config& c, const std::string& v, int line) {
         c.fluid.diffusion_closure = parse_closure(v, line);
       }},
      real("schedule.dt_years", &Config::schedule, &ScheduleConfig::dt_years),
      real("schedule.total_years", &Config::schedule, &ScheduleConfig::total_years),
      real("schedule.injection_end_years", &Config::schedule,
           &ScheduleConfig::injection_end_years),
      {"schedule.snapshot_years",
       [](const Config& c) {
         std::string out;
         for (std::size_t i = 0; i < c.schedule.snapshot_years.size(); ++i)
           out += (i ? ", " : "") + format_double(c.schedule.snapshot_years[i]);
         return out;
       },
       [](Config& c, const std::string& v, int line) {
         c.schedule.snapshot_years = parse_list(v, line, "schedule.snapshot_years");
       }},
      real("solver.eps", &Config::solver, &SolverSettings::eps),
      integer("solver.max_iter", &Config::solver, &SolverSettings::max_iter),
      {"solver.c_function", [](const Config& c) { return to_string(c.solver.c_function); },
       [](Config& c, const std::string& v, int line) {
         c.solver.c_function = parse_cfunction(v, line);
       }},
      integer("solver.max_halvings", &Config::solver, &SolverSettings::max_halvings),
      real("initial.s_l", &Config::initial, &InitialConfig::s_l),
      real("initial.p_l_pa", &Config::initial, &InitialConfig::p_l),
      real("initial.chi_h_l", &Config::initial, &InitialConfig::chi_h_l),
      real("boundary.q_h_in_kg_m2_year", &Config::boundary, &BoundaryConfig::q_h_in_per_year),
      real("boundary.p_right_pa", &Config::boundary, &BoundaryConfig::p_right),
      real("stationarity.grad_tol_pa_m", &Config::stationarity, &StationarityConfig::grad_tol),
      real("stationarity.state_tol", &Config::stationarity, &StationarityConfig::state_tol),
      real("regularization.s_eps", &Config::regularization, &CurveRegularization::s_eps),
      real("regularization.top_band", &Config::regularization, &CurveRegularization::top_band),
  };
  return table;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : keys())
    if (name == k.name) return &k;
  return nullptr;
}

void require(bool ok, const char* key, const char* constraint) {
  if (!ok) throw ValidationError(key, constraint);
}

}  // namespace

std::vector<std::string> profile_names() { return {"benchmark", "table1-as-printed"}; }

Config profile_config(const std::string& name) {
  Config c;
  c.profile = name;
  c.medium = MediumParams::create(5e-20, 0.15, 2e6, 1.49, 0.4, 0.0);
  double mu_l = 1e-3;
  double mu_g = 9e-6;
  if (name == "table1-as-printed") {
    mu_l = 1e-9;
    mu_g = 9e-9;
  } else if (name != "benchmark") {
    throw ValidationError("profile", "unknown profile '" + name + "'");
  }
  c.fluid = FluidParams::create(mu_l, mu_g, 1e3, 7.65e-6, 1e-2, 2e-3, 3e-9, 303.0, 8e-2);
  return c;
}

void Config::validate() const {
  require(n_cells >= 2, "grid.n_cells", "must be >= 2");
  require(length > 0.0, "grid.length_m", "must be > 0");

  require(medium.permeability > 0.0, "medium.permeability_m2", "must be > 0");
  require(medium.porosity > 0.0 && medium.porosity < 1.0, "medium.porosity",
          "must lie in (0, 1)");
  require(medium.vg_pressure > 0.0, "medium.vg_pressure_pa", "must be > 0");
  require(medium.vg_n > 1.0, "medium.n", "must be > 1");
  require(medium.vg_m == 1.0 - 1.0 / medium.vg_n, "medium.n", "vg_m must equal 1 - 1/n");
  require(medium.residual_liquid_sat >= 0.0, "medium.residual_liquid_sat", "must be >= 0");
  require(medium.residual_gas_sat >= 0.0, "medium.residual_gas_sat", "must be >= 0");
  require(medium.residual_liquid_sat + medium.residual_gas_sat < 1.0,
          "medium.residual_liquid_sat", "S_lr + S_gr must be < 1");

  require(fluid.viscosity_liquid > 0.0, "fluid.viscosity_liquid_pa_s", "must be > 0");
  require(fluid.viscosity_gas > 0.0, "fluid.viscosity_gas_pa_s", "must be > 0");
  require(fluid.liquid_density > 0.0, "fluid.liquid_density_kg_m3", "must be > 0");
  require(fluid.henry_molar > 0.0, "fluid.henry_mol_pa_m3", "must be > 0");
  require(fluid.molar_mass_water > 0.0, "fluid.molar_mass_water_kg_mol", "must be > 0");
  require(fluid.molar_mass_hydrogen > 0.0, "fluid.molar_mass_hydrogen_kg_mol", "must be > 0");
  require(fluid.diffusion > 0.0, "fluid.diffusion_m2_s", "must be > 0");
  require(fluid.temperature > 0.0, "fluid.temperature_k", "must be > 0");
  require(fluid.reference_gas_density > 0.0, "fluid.reference_gas_density_kg_m3", "must be > 0");
  require(fluid.henry_mass == fluid.henry_molar * fluid.molar_mass_hydrogen,
          "fluid.henry_mol_pa_m3", "henry_mass must equal henry_molar * M_h");
  require(std::abs(fluid.gas_compressibility * 1e5 - fluid.reference_gas_density) <=
              0.02 * fluid.reference_gas_density,
          "fluid.reference_gas_density_kg_m3",
          "must agree with M_h/(R T) * 1e5 Pa within 2%");

  require(schedule.dt_years > 0.0, "schedule.dt_years", "must be > 0");
  require(schedule.total_years > 0.0, "schedule.total_years", "must be > 0");
  require(schedule.injection_end_years >= 0.0 &&
              schedule.injection_end_years <= schedule.total_years,
          "schedule.injection_end_years", "must lie in [0, total_years]");
  require(std::is_sorted(schedule.snapshot_years.begin(), schedule.snapshot_years.end()),
          "schedule.snapshot_years", "must be sorted");
  for (double t : schedule.snapshot_years)
    require(t >= 0.0 && t <= schedule.total_years, "schedule.snapshot_years",
            "must lie in [0, total_years]");

  require(solver.eps > 0.0, "solver.eps", "must be > 0");
  require(solver.max_iter >= 1, "solver.max_iter", "must be >= 1");
  require(solver.max_halvings >= 0, "solver.max_halvings", "must be >= 0");

  require(initial.s_l > medium.residual_liquid_sat && initial.s_l <= 1.0, "initial.s_l",
          "must lie in (S_lr, 1]");
  require(initial.p_l > 0.0, "initial.p_l_pa", "must be > 0");
  require(initial.chi_h_l >= 0.0 && initial.chi_h_l <= 1.0, "initial.chi_h_l",
          "must lie in [0, 1]");

  require(boundary.q_h_in_per_year >= 0.0, "boundary.q_h_in_kg_m2_year", "must be >= 0");
  require(boundary.p_right > 0.0, "boundary.p_right_pa", "must be > 0");

  require(stationarity.grad_tol > 0.0, "stationarity.grad_tol_pa_m", "must be > 0");
  require(stationarity.state_tol > 0.0, "stationarity.state_tol", "must be > 0");

  require(regularization.s_eps > 0.0 && regularization.s_eps < 0.5, "regularization.s_eps",
          "must lie in (0, 0.5)");
  require(regularization.top_band > 0.0 && regularization.top_band < 0.5,
          "regularization.top_band", "must lie in (0, 0.5)");
}

Config parse_config(const std::string& text, const std::string& profile_override) {
  struct Entry {
    std::string key;
    std::string value;
    int line;
  };
  std::vector<Entry> entries;
  std::string profile = "benchmark";
  std::map<std::string, int> seen;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh)
      throw ParseError(line_no, "duplicate key '" + key + "' (first on line " +
                                    std::to_string(it->second) + ")");
    if (key == "profile") {
      profile = value;
      continue;
    }
    if (!find_key(key)) throw ParseError(line_no, "unknown key '" + key + "'");
    entries.push_back({key, value, line_no});
  }
  if (!profile_override.empty()) profile = profile_override;

  Config config = profile_config(profile);
  for (const auto& e : entries) find_key(e.key)->set(config, e.value, e.line);

  // Derived quantities follow their inputs.
  config.medium.vg_m = 1.0 - 1.0 / config.medium.vg_n;
  config.fluid.henry_mass = config.fluid.henry_molar * config.fluid.molar_mass_hydrogen;
  config.fluid.gas_compressibility =
      config.fluid.molar_mass_hydrogen / (kGasConstant * config.fluid.temperature);
  config.validate();
  return config;
}

Config load_config(const std::string& path, const std::string& profile_override) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), profile_override);
}

std::string serialize_config(const Config& config) {
  std::string out = "profile = " + config.profile + "\n";
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(config) + "\n";
  return out;
}

bool operator==(const Config& a, const Config& b) {
  return serialize_config(a) == serialize_config(b);
}

}  // namespace h2flow
