#ifndef H2FLOW_SIMULATION_HPP
#define H2FLOW_SIMULATION_HPP

#include <optional>
#include <string>
#include <vector>

#include "h2flow/config.hpp"
#include "h2flow/discretization.hpp"
#include "h2flow/ncp.hpp"

namespace h2flow {

/// Cells with s_g above this count as gas-bearing.
inline constexpr double kGasSaturationThreshold = 1e-10;

/// Time schedule in SI units.
struct Schedule {
  double injection_flux = 0.0;  // kg/(m^2 s)
  double injection_end = 0.0;   // s
  double total_time = 0.0;      // s
  double dt = 0.0;              // s
  std::vector<double> snapshot_times;  // s

  static Schedule from_config(const Config& config);
  void validate() const;
};

/// Hydrogen influx on the left boundary; right-open step function.
double injection_flux_at(double t, const Schedule& schedule);

struct Snapshot {
  double time_years = 0.0;       // time of the captured step
  double requested_years = 0.0;  // snapshot time it stands for
  Eigen::VectorXd x, s_l, s_g, p_l, p_g, chi_h_l, rho_h_total;
};

Snapshot make_snapshot(const TwoPhaseModel& model, const StateVector& state, double t_seconds,
                       double requested_seconds);

/// Diagnostics of one accepted time step.
struct StepRecord {
  int step = 0;
  double time = 0.0;  // end of step, s
  double dt = 0.0;    // s
  int halvings = 0;
  NewtonReport report;
  Eigen::Index gas_cells = 0;
  Eigen::Index rightmost_gas_cell = -1;
  double max_gas_saturation = 0.0;
  double max_liquid_pressure = 0.0;
  double max_pressure_gradient = 0.0;  // Pa/m
  double dissolved_hydrogen = 0.0;     // kg/m^2
  double gas_hydrogen = 0.0;           // kg/m^2
  double hydrogen_influx = 0.0;        // kg/m^2 entering during the step
  double water_outflow = 0.0;          // kg/m^2 leaving on the right during the step
  double hydrogen_outflow = 0.0;       // kg/m^2
  double min_complementarity = 0.0;    // min_i min(F_i, G_i) / scale
  double max_complementarity = 0.0;    // max_i |min(F_i, G_i)| / scale
  double min_f = 0.0;
  double min_g = 0.0;                  // unscaled, kg/m^3
  double state_change = 0.0;           // scaled max per-step change
};

struct EventLog {
  std::optional<double> first_gas_appearance;    // years
  std::optional<double> last_gas_disappearance;  // years
  std::optional<double> stationarity;            // years
  double injection_end = 0.0;                    // years
};

struct RunResult {
  Config config;
  EquationScales scales;
  std::vector<Snapshot> snapshots;
  std::vector<StepRecord> steps;
  EventLog events;
  StateVector initial_state;
  StateVector final_state;
  double final_time = 0.0;  // s
  bool completed = false;
  std::string failure;  // set when the run aborted on StepFailure
};

StateVector initial_state(const Grid& grid, const Config& config);

/// Largest |dp_l/dx| over interior faces and the right Dirichlet face.
double max_pressure_gradient(const TwoPhaseModel& model, const StateVector& x, double p_right);

struct StepOutcome {
  StateVector state;
  NewtonReport report;
  double dt = 0.0;
  int halvings = 0;
};

/// Advances from (state, t) by dt with Newton-min, warm-started from the
/// previous state. On solver failure dt is halved and retried up to
/// settings.max_halvings times; then StepFailure is thrown.
StepOutcome advance_step(const TwoPhaseModel& model, const StateVector& state, double t,
                         double dt, const Schedule& schedule, double p_right,
                         const SolverSettings& settings, const EquationScales& scales);

/// Runs the configured experiment. A StepFailure ends the run early with
/// completed = false and the partial results kept.
RunResult run(const Config& config);

TwoPhaseModel make_model(const Config& config);

}  // namespace h2flow

#endif  // H2FLOW_SIMULATION_HPP
