#ifndef H2FLOW_CONFIG_HPP
#define H2FLOW_CONFIG_HPP

// Run configuration and its line-based text format:
//
//   # comment
//   profile = benchmark
//   grid.n_cells = 200
//   schedule.dt_years = 5000
//   schedule.snapshot_years = 1e4, 2e4, 5e4
//
// `profile` selects the base parameter set (`benchmark` or
// `table1-as-printed`) and may appear anywhere; every other key overrides one
// field of that base. Unknown keys are rejected.

#include <string>
#include <vector>

#include "h2flow/constitutive.hpp"
#include "h2flow/ncp.hpp"

namespace h2flow {

struct ScheduleConfig {
  double dt_years = 5000.0;
  double total_years = 1e6;
  double injection_end_years = 5e5;
  std::vector<double> snapshot_years{1e4, 2e4, 5e4, 1e5, 1.5e5, 3e5, 5e5, 6e5, 8e5, 1e6};
};

struct SolverSettings {
  double eps = 1e-10;
  int max_iter = 50;
  CFunction c_function = CFunction::min;
  int max_halvings = 4;
};

struct InitialConfig {
  double s_l = 1.0;
  double p_l = 1e6;
  double chi_h_l = 0.0;
};

struct BoundaryConfig {
  double q_h_in_per_year = 5.57e-6;  // kg/(m^2 year)
  double p_right = 1e6;              // Pa
};

struct StationarityConfig {
  double grad_tol = 1.0;     // Pa/m
  double state_tol = 1e-8;   // scaled per-step change
};

struct Config {
  std::string profile = "benchmark";
  Eigen::Index n_cells = 200;
  double length = 200.0;
  MediumParams medium{};
  FluidParams fluid{};
  ScheduleConfig schedule;
  SolverSettings solver;
  InitialConfig initial;
  BoundaryConfig boundary;
  StationarityConfig stationarity;
  CurveRegularization regularization;

  /// Re-checks every physical invariant; throws ValidationError.
  void validate() const;
};

/// Built-in parameter sets: "benchmark" (physical viscosities) and
/// "table1-as-printed" (viscosities exactly as tabulated, 1e-9 / 9e-9).
Config profile_config(const std::string& name);
std::vector<std::string> profile_names();

/// Parses the text format above. `profile_override`, when non-empty,
/// replaces any `profile` line. Throws ParseError or ValidationError.
Config parse_config(const std::string& text, const std::string& profile_override = {});
Config load_config(const std::string& path, const std::string& profile_override = {});

/// Writes every key with round-trip precision; parse_config(serialize(c)) == c.
std::string serialize_config(const Config& config);

bool operator==(const Config& a, const Config& b);

}  // namespace h2flow

#endif  // H2FLOW_CONFIG_HPP
