#ifndef H2FLOW_VERIFICATION_HPP
#define H2FLOW_VERIFICATION_HPP

// Independent oracles: central-difference Jacobians, exhaustive active-set
// enumeration for small NCPs and a mass-balance audit of finished runs.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "h2flow/config.hpp"
#include "h2flow/ncp.hpp"
#include "h2flow/simulation.hpp"

namespace h2flow {

/// Central differences, column j = (f(x + h_j e_j) - f(x - h_j e_j)) / (2 h_j).
template <typename Fn>
Eigen::MatrixXd fd_jacobian(const Fn& residual_fn, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& steps) {
  if (steps.size() != x.size()) throw DimensionError("fd_jacobian: one step per unknown");
  Eigen::VectorXd probe = x;
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = steps[j];
    if (!(h > 0.0)) throw std::invalid_argument("fd_jacobian: steps must be > 0");
    probe[j] = x[j] + h;
    const Eigen::VectorXd plus = residual_fn(probe);
    probe[j] = x[j] - h;
    const Eigen::VectorXd minus = residual_fn(probe);
    probe[j] = x[j];
    if (j == 0) jac.resize(plus.size(), x.size());
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

template <typename Fn>
Eigen::MatrixXd fd_jacobian(const Fn& residual_fn, const Eigen::VectorXd& x, double h) {
  return fd_jacobian(residual_fn, x, Eigen::VectorXd::Constant(x.size(), h));
}

struct JacobianDiff {
  double max_abs_error = 0.0;
  double max_rel_error = 0.0;
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double analytic = 0.0;
  double fd = 0.0;
};

/// Compares two Jacobians entry by entry. Columns are first multiplied by
/// `column_scales` (characteristic variable magnitudes); the relative error
/// of an entry is its difference over the largest scaled magnitude in its row.
JacobianDiff compare_jacobians(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& fd,
                               const Eigen::VectorXd& column_scales);

struct JacobianCheck {
  std::vector<JacobianDiff> samples;
  JacobianDiff worst;
};

/// Draws admissible random states (s_l in [0.55, 0.999], p_l in [5e5, 5e6] Pa,
/// chi in [0, 3e-5]) away from upwind switches and compares
/// assemble_jacobian against central differences of assemble_residual.
JacobianCheck check_jacobian(const Config& config, int samples, std::uint64_t seed = 20240521);

struct BruteForceResult {
  std::vector<Eigen::VectorXd> solutions;  // in order of pattern index
  int patterns = 0;
  int failed_patterns = 0;  // smooth subproblem did not converge
};

struct BruteForceOptions {
  double feasibility_tol = 1e-9;
  double newton_tol = 1e-13;
  int max_newton_iter = 100;
  double dedupe_tol = 1e-8;
};

/// Enumerates every assignment of complementarity pairs to F_i = 0 or
/// G_i = 0, solves each smooth subsystem (with H = 0) by damped Newton from
/// x0, and keeps the solutions with F >= -tol and G >= -tol.
BruteForceResult brute_force_ncp(const DenseNcp<double>& problem, const Eigen::VectorXd& x0,
                                 const BruteForceOptions& options = {});

struct ComponentBalance {
  double stored_change = 0.0;  // kg/m^2
  double net_influx = 0.0;     // kg/m^2
  double error = 0.0;          // |stored_change - net_influx|
  double max_step_error = 0.0; // largest cumulative imbalance over the run
};

struct MassAudit {
  ComponentBalance water;
  ComponentBalance hydrogen;
  double injected_hydrogen = 0.0;
};

MassAudit mass_audit(const RunResult& run);

}  // namespace h2flow

#endif  // H2FLOW_VERIFICATION_HPP
