// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. The optional argument is the directory that
// receives the benchmark outputs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include "h2flow/config.hpp"
#include "h2flow/constitutive.hpp"
#include "h2flow/io.hpp"
#include "h2flow/simulation.hpp"
#include "h2flow/verification.hpp"
#include "ncp_corpus.hpp"

using namespace h2flow;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Verdict& v) {
  std::printf("%s [%d] %s: %s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double years(const StepRecord& s) { return s.time / kSecondsPerYear; }

Verdict gas_appearance(const RunResult& run) {
  const double dt = run.config.schedule.dt_years;
  if (!run.events.first_gas_appearance) return {false, "no gas appeared"};
  const double t = *run.events.first_gas_appearance;
  return {std::abs(t - 2e4) <= 2 * dt + 1e-6,
          fmt("first gas at %.0f years (expected 20000 +/- %.0f)", t, 2 * dt)};
}

Verdict four_periods(const RunResult& run) {
  const auto& steps = run.steps;
  const double t_end_inj = run.config.schedule.injection_end_years;
  if (!run.events.first_gas_appearance) return {false, "no gas phase"};
  const double t_gas = *run.events.first_gas_appearance;

  // P1: all-liquid with rising dissolved hydrogen.
  bool p1 = true;
  double dissolved_prev = 0.0;
  for (const StepRecord& s : steps) {
    if (years(s) >= t_gas) break;
    p1 = p1 && s.gas_cells == 0 && s.dissolved_hydrogen > dissolved_prev;
    dissolved_prev = s.dissolved_hydrogen;
  }

  // Peak of the liquid pressure during injection.
  const StepRecord* peak = nullptr;
  for (const StepRecord& s : steps)
    if (years(s) <= t_end_inj && (!peak || s.max_liquid_pressure > peak->max_liquid_pressure))
      peak = &s;
  if (!peak) return {false, "no injection steps"};
  const double t_peak = years(*peak);

  // P2: gas present and growing while p_l rises to its peak.
  bool p2 = t_peak > t_gas;
  double gas_prev = 0.0, p_prev = 0.0;
  for (const StepRecord& s : steps) {
    if (years(s) < t_gas) {
      p_prev = s.max_liquid_pressure;
      continue;
    }
    if (years(s) > t_peak) break;
    p2 = p2 && s.gas_cells > 0 && s.gas_hydrogen > gas_prev && s.max_liquid_pressure >= p_prev;
    gas_prev = s.gas_hydrogen;
    p_prev = s.max_liquid_pressure;
  }

  // P3: gas keeps growing while p_l falls, until injection stops.
  bool p3 = t_peak < t_end_inj;
  for (const StepRecord& s : steps) {
    if (years(s) <= t_peak || years(s) > t_end_inj) continue;
    p3 = p3 && s.gas_hydrogen > gas_prev && s.max_liquid_pressure <= p_prev;
    gas_prev = s.gas_hydrogen;
    p_prev = s.max_liquid_pressure;
  }

  // P4: the gas region retreats from the right boundary until it vanishes.
  bool p4 = run.events.last_gas_disappearance.has_value();
  Eigen::Index right_prev = run.config.n_cells;
  int retreats = 0;
  for (const StepRecord& s : steps) {
    if (years(s) <= t_end_inj) continue;
    p4 = p4 && s.rightmost_gas_cell <= right_prev;
    if (s.rightmost_gas_cell < right_prev) ++retreats;
    right_prev = s.rightmost_gas_cell;
  }
  p4 = p4 && retreats > 1 && steps.back().gas_cells == 0;

  const double t_vanish = run.events.last_gas_disappearance.value_or(-1.0);
  return {p1 && p2 && p3 && p4,
          fmt("P1 %s [0, %.0f) y, P2 %s to p_l peak at %.0f y, P3 %s to %.0f y, "
              "P4 %s (gas gone at %.0f y)",
              p1 ? "ok" : "bad", t_gas, p2 ? "ok" : "bad", t_peak, p3 ? "ok" : "bad",
              t_end_inj, p4 ? "ok" : "bad", t_vanish)};
}

Verdict stationary_state(const RunResult& run) {
  const TwoPhaseModel model = make_model(run.config);
  const double grad = max_pressure_gradient(model, run.final_state, run.config.boundary.p_right);
  double max_sg = 0.0;
  for (const CellState& c : unflatten(run.final_state)) max_sg = std::max(max_sg, c.s_g());
  return {run.completed && grad < 1.0 && max_sg <= kGasSaturationThreshold,
          fmt("at %.0f years max |dp_l/dx| = %.3e Pa/m, max s_g = %.1e", run.final_time / kSecondsPerYear,
              grad, max_sg)};
}

Verdict quadratic_tail(const std::string& log_path) {
  const auto rows = read_convergence_log(log_path);
  int checked = 0, violations = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    if (rows[k + 1].step != rows[k].step) continue;
    if (rows[k].residual > 1e-10 && rows[k].residual <= 1e-5) {
      ++checked;
      if (rows[k + 1].residual > 1e-10) {
        ++violations;
        worst = std::max(worst, rows[k + 1].residual);
      }
    }
  }
  return {violations == 0 && checked > 0,
          fmt("%d iterations entered (1e-10, 1e-5], %d missed 1e-10 next (worst %.2e)", checked,
              violations, worst)};
}

Verdict complementarity(const RunResult& run) {
  const double eps = run.config.solver.eps;
  double worst = 0.0;
  bool ok = run.completed;
  for (const StepRecord& s : run.steps) {
    const double scale = run.scales.complementarity;
    worst = std::max(worst, s.max_complementarity);
    ok = ok && s.max_complementarity <= eps && s.min_f >= -eps * scale && s.min_g >= -eps * scale;
  }
  return {ok, fmt("max |min(F, G)| / scale = %.2e over %zu steps (eps %.0e)", worst,
                  run.steps.size(), eps)};
}

Verdict mass_balance(const RunResult& run) {
  const MassAudit a = mass_audit(run);
  const double tol = 1e-8 * a.injected_hydrogen;
  return {run.completed && a.water.error <= tol && a.hydrogen.error <= tol && tol > 0.0,
          fmt("water %.2e, hydrogen %.2e kg/m^2 vs tolerance %.2e (injected %.4f kg/m^2)",
              a.water.error, a.hydrogen.error, tol, a.injected_hydrogen)};
}

Verdict jacobian() {
  const JacobianCheck c = check_jacobian(profile_config("benchmark"), 20);
  return {c.samples.size() == 20 && c.worst.max_rel_error <= 1e-6,
          fmt("max relative error %.2e over %zu states", c.worst.max_rel_error, c.samples.size())};
}

Verdict oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  const auto corpus = test::ncp_corpus();
  int singletons = 0, agree = 0;
  for (const auto& e : corpus) {
    const BruteForceResult brute = brute_force_ncp(e.problem, e.x0);
    if (brute.solutions.size() != 1) continue;
    ++singletons;
    try {
      const auto r = newton_min_solve(e.problem, e.x0, NewtonOptions{1e-13, 100}, DenseLuSolver{});
      if ((r.x - brute.solutions[0]).lpNorm<Eigen::Infinity>() <= 1e-8) ++agree;
    } catch (const SolverError&) {
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {corpus.size() >= 20 && agree == singletons && seconds < 5.0,
          fmt("%d/%d singleton instances agree (%zu in corpus), %.2f s", agree, singletons,
              corpus.size(), seconds)};
}

Verdict constitutive_properties() {
  const MediumParams m = profile_config("benchmark").medium;
  const int n = 1000;
  int bad_monotone = 0, bad_derivative = 0;
  double pc_prev = INFINITY, krl_prev = -1.0, krg_prev = 2.0;
  for (int i = 0; i < n; ++i) {
    const double se = 1e-6 + (1.0 - 1e-6) * i / (n - 1.0);
    const double pc = capillary_pressure_of_effective(se, m).value;
    const double krl = rel_perm_liquid_of_effective(se, m).value;
    const double krg = rel_perm_gas_of_effective(se, m).value;
    if (!(pc < pc_prev && krl > krl_prev && krg < krg_prev)) ++bad_monotone;
    pc_prev = pc;
    krl_prev = krl;
    krg_prev = krg;

    // Derivatives on the interior part of the range, against central differences.
    const double s = m.residual_liquid_sat + (0.02 + 0.96 * i / (n - 1.0)) * m.mobile_range();
    const double h = 1e-7;
    const std::function<ValueDerivative<double>(double)> laws[] = {
        [&](double x) { return capillary_pressure(x, m); },
        [&](double x) { return rel_perm_liquid(x, m); },
        [&](double x) { return rel_perm_gas(x, m); }};
    for (const auto& law : laws) {
      const double fd = (law(s + h).value - law(s - h).value) / (2.0 * h);
      const double an = law(s).derivative;
      if (std::abs(fd - an) > 1e-6 * std::max(std::abs(an), std::abs(fd))) ++bad_derivative;
    }
  }
  const bool endpoints = capillary_pressure_of_effective(1.0, m).value == 0.0 &&
                         rel_perm_liquid_of_effective(1.0, m).value == 1.0 &&
                         rel_perm_gas_of_effective(1.0, m).value == 0.0 &&
                         rel_perm_liquid_of_effective(0.0, m).value == 0.0 &&
                         rel_perm_gas_of_effective(0.0, m).value == 1.0;
  return {bad_monotone == 0 && bad_derivative == 0 && endpoints,
          fmt("%d monotonicity and %d derivative violations over %d points, endpoints %s",
              bad_monotone, bad_derivative, n, endpoints ? "exact" : "wrong")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "benchmark_out";

  const auto start = std::chrono::steady_clock::now();
  const RunResult run = h2flow::run(profile_config("benchmark"));
  const double run_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_outputs(run, out_dir);
  std::printf("benchmark run: %zu steps in %.2f s, %s\n", run.steps.size(), run_seconds,
              run.completed ? "completed" : run.failure.c_str());

  report(1, "gas appearance time", gas_appearance(run));
  report(2, "four-period evolution", four_periods(run));
  report(3, "stationary end state", stationary_state(run));
  report(4, "quadratic convergence tail",
         quadratic_tail((std::filesystem::path(out_dir) / "convergence.csv").string()));
  report(5, "complementarity feasibility", complementarity(run));
  report(6, "mass balance", mass_balance(run));
  report(7, "Jacobian against finite differences", jacobian());
  report(8, "Newton-min against enumeration", oracle_equivalence());
  report(9, "constitutive properties", constitutive_properties());

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
