#include <doctest.h>

#include "h2flow/errors.hpp"
#include "h2flow/simulation.hpp"
#include "h2flow/verification.hpp"
#include "test_support.hpp"

using namespace h2flow;
using h2flow::test::rel_close;

TEST_CASE("injection schedule") {
  const Config c = profile_config("benchmark");
  const Schedule s = Schedule::from_config(c);
  CHECK(rel_close(injection_flux_at(1e5 * kSecondsPerYear, s), 5.57e-6 / kSecondsPerYear, 1e-14));
  CHECK(injection_flux_at(6e5 * kSecondsPerYear, s) == 0.0);
  CHECK(injection_flux_at(s.injection_end, s) == 0.0);
  CHECK(injection_flux_at(0.0, s) > 0.0);
  CHECK(s.dt == 5000 * kSecondsPerYear);
}

TEST_CASE("initial state") {
  const Config c = profile_config("benchmark");
  const TwoPhaseModel m = make_model(c);
  const StateVector x = initial_state(m.grid(), c);
  CHECK(x.size() == 600);
  for (const CellState& cell : unflatten(x)) {
    CHECK(cell.s_l == 1.0);
    CHECK(cell.p_l == 1e6);
    CHECK(cell.chi_h_l == 0.0);
  }
  const NcpResidual<double> r = m.assemble_residual(x, x, 1e10, BoundarySpec{0.0, 1e6});
  CHECK(r.h.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.f.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.g.minCoeff() == doctest::Approx(c.fluid.henry_mass * 1e6));
  CHECK(m.curves().capillary_pressure(1.0).value == 0.0);
}

TEST_CASE("equilibrium step needs no Newton update") {
  const Config c = profile_config("benchmark");
  const TwoPhaseModel m = make_model(c);
  Schedule s = Schedule::from_config(c);
  s.injection_flux = 0.0;
  const StateVector x = initial_state(m.grid(), c);
  const auto scales = EquationScales::from_reference(m, 1e6, s.dt);
  const StepOutcome out = advance_step(m, x, 0.0, s.dt, s, 1e6, c.solver, scales);
  CHECK(out.report.converged);
  CHECK(out.report.iterations <= 2);
  CHECK(out.halvings == 0);
}

TEST_CASE("first injection step stays all-liquid") {
  const Config c = profile_config("benchmark");
  const TwoPhaseModel m = make_model(c);
  const Schedule s = Schedule::from_config(c);
  const StateVector x = initial_state(m.grid(), c);
  const auto scales = EquationScales::from_reference(m, 1e6, s.dt);
  const StepOutcome out = advance_step(m, x, 0.0, s.dt, s, 1e6, c.solver, scales);
  CHECK(out.report.converged);
  CHECK(out.report.final_active_set.empty());
  for (const CellState& cell : unflatten(out.state)) CHECK(cell.s_l == doctest::Approx(1.0));
  CHECK(out.state[kMolarFraction] > 0.0);
}

TEST_CASE("zero-injection run is stationary at once") {
  Config c = profile_config("benchmark");
  c.boundary.q_h_in_per_year = 0.0;
  const RunResult r = run(c);
  CHECK(r.completed);
  REQUIRE(r.events.stationarity);
  CHECK(*r.events.stationarity == doctest::Approx(5000.0));
  CHECK_FALSE(r.events.first_gas_appearance);
  CHECK(r.snapshots.size() == c.schedule.snapshot_years.size());
  const MassAudit a = mass_audit(r);
  CHECK(a.water.error == 0.0);
  CHECK(a.hydrogen.error == 0.0);
}

TEST_CASE("dissolved period conserves the injected hydrogen") {
  Config c = profile_config("benchmark");
  c.schedule.total_years = 1e4;
  c.schedule.injection_end_years = 1e4;
  c.schedule.snapshot_years = {5e3, 1e4};
  const RunResult r = run(c);
  REQUIRE(r.completed);
  CHECK(r.steps.size() == 2);
  CHECK_FALSE(r.events.first_gas_appearance);
  const TwoPhaseModel m = make_model(c);
  const double injected = 5.57e-6 * 1e4;
  const double stored = m.total_hydrogen(r.final_state) - m.total_hydrogen(r.initial_state);
  CHECK(std::abs(stored - mass_audit(r).hydrogen.net_influx) <= 1e-8 * injected);
  CHECK(rel_close(mass_audit(r).injected_hydrogen, injected, 1e-12));
  // Nothing reaches the outlet this early.
  CHECK(rel_close(stored, injected, 1e-8));
}

TEST_CASE("schedule validation") {
  Config c = profile_config("benchmark");
  c.schedule.injection_end_years = 2e6;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = profile_config("benchmark");
  c.schedule.snapshot_years = {5e4, 1e4};
  CHECK_THROWS_AS(c.validate(), ValidationError);
}
