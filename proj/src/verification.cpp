#include "h2flow/verification.hpp"

#include <cmath>
#include <random>

namespace h2flow {

JacobianDiff compare_jacobians(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& fd,
                               const Eigen::VectorXd& column_scales) {
  if (analytic.rows() != fd.rows() || analytic.cols() != fd.cols() ||
      column_scales.size() != analytic.cols())
    throw DimensionError("compare_jacobians: shape mismatch");
  const Eigen::MatrixXd a = analytic * column_scales.asDiagonal();
  const Eigen::MatrixXd f = fd * column_scales.asDiagonal();
  JacobianDiff diff;
  diff.max_rel_error = -1.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double row_scale = std::max(a.row(i).cwiseAbs().maxCoeff(), f.row(i).cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double err = std::abs(analytic(i, j) - fd(i, j));
      diff.max_abs_error = std::max(diff.max_abs_error, err);
      const double scaled = std::abs(a(i, j) - f(i, j));
      const double rel = row_scale > 0.0 ? scaled / row_scale : 0.0;
      if (rel > diff.max_rel_error) {
        diff.max_rel_error = rel;
        diff.row = i;
        diff.col = j;
        diff.analytic = analytic(i, j);
        diff.fd = fd(i, j);
      }
    }
  }
  diff.max_rel_error = std::max(diff.max_rel_error, 0.0);
  return diff;
}

namespace {

// Pressure separation below which a face counts as near an upwind switch.
constexpr double kSwitchMargin = 1e3;  // Pa

bool near_upwind_switch(const TwoPhaseModel& model, const StateVector& x, double p_right) {
  const Eigen::Index n = model.grid().n_cells;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double dp = x[3 * (i + 1) + kPressure] - x[3 * i + kPressure];
    const double dpg = model.gas_pressure(x, i + 1) - model.gas_pressure(x, i);
    if (std::abs(dp) < kSwitchMargin || std::abs(dpg) < kSwitchMargin) return true;
  }
  return std::abs(x[3 * (n - 1) + kPressure] - p_right) < kSwitchMargin ||
         std::abs(model.gas_pressure(x, n - 1) - p_right) < kSwitchMargin;
}

}  // namespace

JacobianCheck check_jacobian(const Config& config, int samples, std::uint64_t seed) {
  const TwoPhaseModel model = make_model(config);
  const Schedule schedule = Schedule::from_config(config);
  const Eigen::Index n = model.grid().n_cells;
  const StateVector x_old = initial_state(model.grid(), config);
  const BoundarySpec bc{schedule.injection_flux, config.boundary.p_right};
  const double dt = schedule.dt;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sat(0.55, 0.999);
  std::uniform_real_distribution<double> pres(5e5, 5e6);
  std::uniform_real_distribution<double> frac(0.0, 3e-5);

  const double chi_scale = config.fluid.henry_mass * config.initial.p_l / config.fluid.liquid_density;
  Eigen::VectorXd steps(3 * n), column_scales(3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    steps.segment<3>(3 * i) << 1e-6, 1.0, 1e-6 * chi_scale;
    column_scales.segment<3>(3 * i) << 1.0, config.initial.p_l, chi_scale;
  }

  auto residual = [&](const Eigen::VectorXd& x) {
    const NcpResidual<double> r = model.assemble_residual(x, x_old, dt, bc);
    Eigen::VectorXd out(4 * n);
    out << r.h, r.f, r.g;
    return out;
  };

  JacobianCheck check;
  while (static_cast<int>(check.samples.size()) < samples) {
    StateVector x(3 * n);
    for (Eigen::Index i = 0; i < n; ++i) x.segment<3>(3 * i) << sat(rng), pres(rng), frac(rng);
    if (near_upwind_switch(model, x, bc.p_right)) continue;
    const Eigen::MatrixXd analytic = model.assemble_jacobian(x, x_old, dt, bc).dense();
    const Eigen::MatrixXd fd = fd_jacobian(residual, x, steps);
    const JacobianDiff d = compare_jacobians(analytic, fd, column_scales);
    if (check.samples.empty() || d.max_rel_error > check.worst.max_rel_error) check.worst = d;
    check.samples.push_back(d);
  }
  return check;
}

namespace {

/// Smooth system for one active-set pattern: H = 0, then F_i = 0 where bit i
/// of `mask` is set and G_i = 0 elsewhere.
struct PatternSystem {
  const DenseNcp<double>& problem;
  std::uint32_t mask;

  Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
    const NcpResidual<double> r = problem.evaluate(x);
    Eigen::VectorXd out(r.h.size() + r.f.size());
    out.head(r.h.size()) = r.h;
    for (Eigen::Index i = 0; i < r.f.size(); ++i)
      out[r.h.size() + i] = (mask >> i) & 1u ? r.f[i] : r.g[i];
    return out;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    const DenseJacobian<double> j = problem.jacobian(x);
    Eigen::MatrixXd out(j.h.rows() + j.f.rows(), x.size());
    if (j.h.rows() > 0) out.topRows(j.h.rows()) = j.h;
    for (Eigen::Index i = 0; i < j.f.rows(); ++i)
      out.row(j.h.rows() + i) = (mask >> i) & 1u ? j.f.row(i) : j.g.row(i);
    return out;
  }
};

bool damped_newton(const PatternSystem& sys, Eigen::VectorXd& x, const BruteForceOptions& opt) {
  Eigen::VectorXd r = sys.residual(x);
  double norm = r.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < opt.max_newton_iter; ++it) {
    if (norm <= opt.newton_tol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) return true;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.jacobian(x));
    if (!lu.isInvertible()) return false;
    const Eigen::VectorXd step = lu.solve(-r);
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, lambda *= 0.5) {
      const Eigen::VectorXd trial = x + lambda * step;
      const Eigen::VectorXd rt = sys.residual(trial);
      const double nt = rt.lpNorm<Eigen::Infinity>();
      if (std::isfinite(nt) && nt < (1.0 - 1e-4 * lambda) * norm) {
        x = trial;
        r = rt;
        norm = nt;
        accepted = true;
        break;
      }
    }
    if (!accepted) return norm <= opt.newton_tol * std::max(1.0, x.lpNorm<Eigen::Infinity>());
  }
  return norm <= opt.newton_tol * std::max(1.0, x.lpNorm<Eigen::Infinity>());
}

}  // namespace

BruteForceResult brute_force_ncp(const DenseNcp<double>& problem, const Eigen::VectorXd& x0,
                                  const BruteForceOptions& options) {
  const Eigen::Index m = problem.n_complementarity();
  if (m > 12) throw std::invalid_argument("brute_force_ncp: at most 12 complementarity pairs");
  if (x0.size() != problem.n_unknowns()) throw DimensionError("brute_force_ncp: x0 length");

  BruteForceResult out;
  out.patterns = 1 << m;
  for (std::uint32_t mask = 0; mask < static_cast<std::uint32_t>(out.patterns); ++mask) {
    const PatternSystem sys{problem, mask};
    Eigen::VectorXd x = x0;
    if (!damped_newton(sys, x, options)) {
      ++out.failed_patterns;
      continue;
    }
    const NcpResidual<double> r = problem.evaluate(x);
    if (r.f.size() > 0 &&
        (r.f.minCoeff() < -options.feasibility_tol || r.g.minCoeff() < -options.feasibility_tol))
      continue;
    const bool duplicate = std::any_of(
        out.solutions.begin(), out.solutions.end(), [&](const Eigen::VectorXd& s) {
          return (s - x).lpNorm<Eigen::Infinity>() <=
                 options.dedupe_tol * std::max(1.0, s.lpNorm<Eigen::Infinity>());
        });
    if (!duplicate) out.solutions.push_back(x);
  }
  return out;
}

MassAudit mass_audit(const RunResult& run) {
  const TwoPhaseModel model = make_model(run.config);
  MassAudit audit;
  const double water0 = model.total_water(run.initial_state);
  const double hydrogen0 = model.total_hydrogen(run.initial_state);

  double water_net = 0.0;
  double hydrogen_net = 0.0;
  for (const StepRecord& s : run.steps) {
    water_net -= s.water_outflow;
    hydrogen_net += s.hydrogen_influx - s.hydrogen_outflow;
    audit.injected_hydrogen += s.hydrogen_influx;
  }
  audit.water.stored_change = model.total_water(run.final_state) - water0;
  audit.water.net_influx = water_net;
  audit.water.error = std::abs(audit.water.stored_change - water_net);
  audit.hydrogen.stored_change = model.total_hydrogen(run.final_state) - hydrogen0;
  audit.hydrogen.net_influx = hydrogen_net;
  audit.hydrogen.error = std::abs(audit.hydrogen.stored_change - hydrogen_net);

  // Snapshot-by-snapshot check against the fluxes integrated up to each one.
  for (const Snapshot& snap : run.snapshots) {
    double w_in = 0.0;
    double h_in = 0.0;
    for (const StepRecord& s : run.steps) {
      if (s.time / kSecondsPerYear > snap.time_years * (1.0 + 1e-12)) break;
      w_in -= s.water_outflow;
      h_in += s.hydrogen_influx - s.hydrogen_outflow;
    }
    const double dx = model.grid().dx;
    const double phi = model.medium().porosity;
    double water = 0.0;
    double hydrogen = 0.0;
    for (Eigen::Index i = 0; i < snap.s_l.size(); ++i) {
      water += phi * run.config.fluid.liquid_density * snap.s_l[i] * dx;
      hydrogen += snap.rho_h_total[i] * dx;
    }
    audit.water.max_step_error =
        std::max(audit.water.max_step_error, std::abs(water - water0 - w_in));
    audit.hydrogen.max_step_error =
        std::max(audit.hydrogen.max_step_error, std::abs(hydrogen - hydrogen0 - h_in));
  }
  return audit;
}

}  // namespace h2flow
