#include "h2flow/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "h2flow/block_tridiag.hpp"

namespace h2flow {

Schedule Schedule::from_config(const Config& config) {
  Schedule s;
  s.injection_flux = config.boundary.q_h_in_per_year / kSecondsPerYear;
  s.injection_end = config.schedule.injection_end_years * kSecondsPerYear;
  s.total_time = config.schedule.total_years * kSecondsPerYear;
  s.dt = config.schedule.dt_years * kSecondsPerYear;
  for (double t : config.schedule.snapshot_years) s.snapshot_times.push_back(t * kSecondsPerYear);
  s.validate();
  return s;
}

void Schedule::validate() const {
  if (!(dt > 0.0)) throw DomainError("Schedule: dt must be > 0");
  if (!(injection_end <= total_time)) throw DomainError("Schedule: injection_end > total_time");
  if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()))
    throw DomainError("Schedule: snapshot_times must be sorted");
  for (double t : snapshot_times)
    if (t < 0.0 || t > total_time) throw DomainError("Schedule: snapshot time outside the run");
}

double injection_flux_at(double t, const Schedule& schedule) {
  return t < schedule.injection_end ? schedule.injection_flux : 0.0;
}

TwoPhaseModel make_model(const Config& config) {
  return TwoPhaseModel(Grid::uniform(config.n_cells, config.length), config.medium, config.fluid,
                       config.regularization);
}

StateVector initial_state(const Grid& grid, const Config& config) {
  std::vector<CellState> cells(static_cast<std::size_t>(grid.n_cells),
                               CellState{config.initial.s_l, config.initial.p_l,
                                         config.initial.chi_h_l});
  return flatten(cells);
}

Snapshot make_snapshot(const TwoPhaseModel& model, const StateVector& state, double t_seconds,
                       double requested_seconds) {
  const Eigen::Index n = model.grid().n_cells;
  Snapshot s;
  s.time_years = t_seconds / kSecondsPerYear;
  s.requested_years = requested_seconds / kSecondsPerYear;
  s.x = model.grid().cell_centers;
  s.s_l.resize(n);
  s.s_g.resize(n);
  s.p_l.resize(n);
  s.p_g.resize(n);
  s.chi_h_l.resize(n);
  s.rho_h_total.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.s_l[i] = state[kUnknownsPerCell * i + kSaturation];
    s.s_g[i] = 1.0 - s.s_l[i];
    s.p_l[i] = state[kUnknownsPerCell * i + kPressure];
    s.p_g[i] = model.gas_pressure(state, i);
    s.chi_h_l[i] = state[kUnknownsPerCell * i + kMolarFraction];
    s.rho_h_total[i] = model.hydrogen_content(state, i);
  }
  return s;
}

double max_pressure_gradient(const TwoPhaseModel& model, const StateVector& x, double p_right) {
  const Eigen::Index n = model.grid().n_cells;
  const double dx = model.grid().dx;
  double g = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    g = std::max(g, std::abs(x[kUnknownsPerCell * (i + 1) + kPressure] -
                             x[kUnknownsPerCell * i + kPressure]) /
                        dx);
  g = std::max(g, std::abs(p_right - x[kUnknownsPerCell * (n - 1) + kPressure]) / (0.5 * dx));
  return g;
}

StepOutcome advance_step(const TwoPhaseModel& model, const StateVector& state, double t,
                         double dt, const Schedule& schedule, double p_right,
                         const SolverSettings& settings, const EquationScales& scales) {
  const NewtonOptions options{settings.eps, settings.max_iter, settings.c_function};
  std::string last_error;
  double trial_dt = dt;
  for (int halvings = 0; halvings <= settings.max_halvings; ++halvings, trial_dt *= 0.5) {
    // Piecewise-constant influx over the step, sampled at its midpoint.
    const BoundarySpec bc{injection_flux_at(t + 0.5 * trial_dt, schedule), p_right};
    const TimeStepProblem problem(model, state, trial_dt, bc, scales);
    try {
      auto result = newton_min_solve(problem, state, options, BlockThomasSolver{});
      return {std::move(result.x), std::move(result.report), trial_dt, halvings};
    } catch (const SolverError& e) {
      last_error = e.what();
    }
  }
  throw StepFailure("time step at t = " + std::to_string(t / kSecondsPerYear) +
                    " years failed after " + std::to_string(settings.max_halvings) +
                    " halvings: " + last_error);
}

namespace {

struct StateSummary {
  Eigen::Index gas_cells = 0;
  Eigen::Index rightmost_gas_cell = -1;
  double max_gas_saturation = 0.0;
  double max_liquid_pressure = 0.0;
  double dissolved = 0.0;
  double gas = 0.0;
};

StateSummary summarize(const TwoPhaseModel& model, const StateVector& x) {
  StateSummary s;
  const double phi = model.medium().porosity;
  const double dx = model.grid().dx;
  s.max_liquid_pressure = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < model.grid().n_cells; ++i) {
    const double sl = x[kUnknownsPerCell * i + kSaturation];
    const double sg = 1.0 - sl;
    if (sg > kGasSaturationThreshold) {
      ++s.gas_cells;
      s.rightmost_gas_cell = i;
    }
    s.max_gas_saturation = std::max(s.max_gas_saturation, sg);
    s.max_liquid_pressure = std::max(s.max_liquid_pressure, x[kUnknownsPerCell * i + kPressure]);
    s.dissolved += phi * sl * model.fluid().liquid_density *
                   x[kUnknownsPerCell * i + kMolarFraction] * dx;
    s.gas += phi * sg * model.fluid().gas_compressibility * model.gas_pressure(x, i) * dx;
  }
  return s;
}

double scaled_change(const StateVector& a, const StateVector& b, double p_ref, double chi_ref) {
  double change = 0.0;
  for (Eigen::Index k = 0; k < a.size(); k += kUnknownsPerCell) {
    change = std::max(change, std::abs(a[k + kSaturation] - b[k + kSaturation]));
    change = std::max(change, std::abs(a[k + kPressure] - b[k + kPressure]) / p_ref);
    change = std::max(change, std::abs(a[k + kMolarFraction] - b[k + kMolarFraction]) / chi_ref);
  }
  return change;
}

}  // namespace

RunResult run(const Config& config) {
  config.validate();
  const TwoPhaseModel model = make_model(config);
  const Schedule schedule = Schedule::from_config(config);
  const double p_right = config.boundary.p_right;

  RunResult result;
  result.config = config;
  result.scales = EquationScales::from_reference(model, config.initial.p_l, schedule.dt);
  result.initial_state = initial_state(model.grid(), config);
  result.events.injection_end = config.schedule.injection_end_years;

  const double p_ref = config.initial.p_l;
  const double chi_ref = config.fluid.henry_mass * p_ref / config.fluid.liquid_density;
  // Snapshot and step times are compared with a relative slack so that the
  // accumulated sum of dt lands on scheduled times.
  const double time_slack = 1e-9 * schedule.dt;

  StateVector state = result.initial_state;
  StateVector previous = state;
  double t = 0.0;
  double t_prev = 0.0;
  std::size_t next_snapshot = 0;
  bool had_gas = summarize(model, state).gas_cells > 0;

  auto capture_snapshots = [&](bool final_pass) {
    while (next_snapshot < schedule.snapshot_times.size()) {
      const double tau = schedule.snapshot_times[next_snapshot];
      if (!final_pass && tau > t + time_slack) break;
      const bool use_prev = !final_pass && (tau - t_prev) < (t - tau);
      result.snapshots.push_back(use_prev ? make_snapshot(model, previous, t_prev, tau)
                                          : make_snapshot(model, state, t, tau));
      ++next_snapshot;
    }
  };
  capture_snapshots(false);

  int step = 0;
  while (t < schedule.total_time - time_slack) {
    double dt = std::min(schedule.dt, schedule.total_time - t);
    if (t < schedule.injection_end - time_slack) dt = std::min(dt, schedule.injection_end - t);

    StepOutcome outcome;
    try {
      outcome = advance_step(model, state, t, dt, schedule, p_right, config.solver,
                             result.scales);
    } catch (const StepFailure& e) {
      result.failure = e.what();
      break;
    }

    previous = state;
    t_prev = t;
    state = std::move(outcome.state);
    t += outcome.dt;
    // Snap to scheduled breakpoints.
    for (double mark : {schedule.injection_end, schedule.total_time})
      if (std::abs(t - mark) <= time_slack) t = mark;

    StepRecord rec;
    rec.step = ++step;
    rec.time = t;
    rec.dt = outcome.dt;
    rec.halvings = outcome.halvings;
    rec.report = std::move(outcome.report);

    const StateSummary summary = summarize(model, state);
    rec.gas_cells = summary.gas_cells;
    rec.rightmost_gas_cell = summary.rightmost_gas_cell;
    rec.max_gas_saturation = summary.max_gas_saturation;
    rec.max_liquid_pressure = summary.max_liquid_pressure;
    rec.dissolved_hydrogen = summary.dissolved;
    rec.gas_hydrogen = summary.gas;
    rec.max_pressure_gradient = max_pressure_gradient(model, state, p_right);
    rec.state_change = scaled_change(state, previous, p_ref, chi_ref);

    const BoundarySpec bc{injection_flux_at(t_prev + 0.5 * outcome.dt, schedule), p_right};
    rec.hydrogen_influx = bc.hydrogen_influx * outcome.dt;
    const ComponentFluxes out = model.right_boundary_fluxes(state, bc);
    rec.water_outflow = out.water.value * outcome.dt;
    rec.hydrogen_outflow = out.hydrogen.value * outcome.dt;

    const NcpResidual<double> r = model.assemble_residual(state, previous, outcome.dt, bc);
    const Eigen::VectorXd phi = cfun_min(r.f, r.g);
    rec.min_complementarity = phi.minCoeff() / result.scales.complementarity;
    rec.max_complementarity = phi.cwiseAbs().maxCoeff() / result.scales.complementarity;
    rec.min_f = r.f.minCoeff();
    rec.min_g = r.g.minCoeff();

    const bool has_gas = rec.gas_cells > 0;
    const double t_years = t / kSecondsPerYear;
    if (has_gas && !result.events.first_gas_appearance) result.events.first_gas_appearance = t_years;
    if (had_gas && !has_gas) result.events.last_gas_disappearance = t_years;
    had_gas = has_gas;

    const bool stationary = !has_gas && injection_flux_at(t, schedule) == 0.0 &&
                            rec.max_pressure_gradient < config.stationarity.grad_tol &&
                            rec.state_change < config.stationarity.state_tol;
    result.steps.push_back(std::move(rec));
    capture_snapshots(false);
    if (stationary) {
      result.events.stationarity = t_years;
      break;
    }
  }

  capture_snapshots(true);
  result.final_state = state;
  result.final_time = t;
  result.completed = result.failure.empty();
  return result;
}

}  // namespace h2flow
