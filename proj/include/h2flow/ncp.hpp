#ifndef H2FLOW_NCP_HPP
#define H2FLOW_NCP_HPP

// Complementarity functions, Newton-min active sets and the semi-smooth
// Newton loop for systems of the form
//
//   H(x) = 0,   F(x) >= 0,   G(x) >= 0,   F(x)^T G(x) = 0,
//
// rewritten as H(x) = 0, phi(F(x), G(x)) = 0.

#include <Eigen/Dense>
#include <cmath>
#include <concepts>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "h2flow/errors.hpp"

namespace h2flow {

enum class CFunction { min, fischer_burmeister };

inline std::string to_string(CFunction c) {
  return c == CFunction::min ? "min" : "fischer_burmeister";
}

namespace detail {
template <typename A, typename B>
void require_same_size(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                       const char* who) {
  if (a.size() != b.size()) throw DimensionError(std::string(who) + ": length mismatch");
}
}  // namespace detail

template <typename A, typename B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, 1> cfun_min(const Eigen::MatrixBase<A>& a,
                                                              const Eigen::MatrixBase<B>& b) {
  detail::require_same_size(a, b, "cfun_min");
  return a.cwiseMin(b);
}

template <typename A, typename B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, 1> cfun_fischer_burmeister(
    const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  detail::require_same_size(a, b, "cfun_fischer_burmeister");
  Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, 1> out(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out[i] = std::hypot(a[i], b[i]) - a[i] - b[i];
  return out;
}

template <typename A, typename B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, 1> cfun(CFunction which,
                                                          const Eigen::MatrixBase<A>& a,
                                                          const Eigen::MatrixBase<B>& b) {
  return which == CFunction::min ? cfun_min(a, b) : cfun_fischer_burmeister(a, b);
}

struct ActiveSets {
  std::vector<Eigen::Index> active;    // G_i < F_i
  std::vector<Eigen::Index> inactive;  // G_i >= F_i
};

template <typename A, typename B>
ActiveSets active_sets(const Eigen::MatrixBase<A>& f, const Eigen::MatrixBase<B>& g) {
  detail::require_same_size(f, g, "active_sets");
  ActiveSets sets;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    (g[i] < f[i] ? sets.active : sets.inactive).push_back(i);
  return sets;
}

/// Coefficients of one generalized-Jacobian element of phi(F, G):
/// row i is f[i] * F'_i + g[i] * G'_i.
template <typename Scalar>
struct RowWeights {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> f;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g;
};

/// Min: the F' row when F_i <= G_i, otherwise the G' row.
/// Fischer-Burmeister: (a/r - 1, b/r - 1), with (-1, 0) at a = b = 0.
template <typename A, typename B>
RowWeights<typename A::Scalar> row_weights(CFunction which, const Eigen::MatrixBase<A>& f,
                                           const Eigen::MatrixBase<B>& g) {
  using Scalar = typename A::Scalar;
  detail::require_same_size(f, g, "row_weights");
  const Eigen::Index n = f.size();
  RowWeights<Scalar> w{Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n),
                       Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (which == CFunction::min) {
      (f[i] <= g[i] ? w.f[i] : w.g[i]) = Scalar(1);
    } else {
      const Scalar r = std::hypot(f[i], g[i]);
      if (r == Scalar(0)) {
        w.f[i] = Scalar(-1);
      } else {
        w.f[i] = f[i] / r - Scalar(1);
        w.g[i] = g[i] / r - Scalar(1);
      }
    }
  }
  return w;
}

/// Newton-min Jacobian rows: row i of the result is Fp.row(i) when
/// F_i <= G_i and Gp.row(i) otherwise.
template <typename MF, typename MG, typename VF, typename VG>
Eigen::Matrix<typename MF::Scalar, Eigen::Dynamic, Eigen::Dynamic> select_jacobian_rows(
    const Eigen::MatrixBase<MF>& fp, const Eigen::MatrixBase<MG>& gp,
    const Eigen::MatrixBase<VF>& f, const Eigen::MatrixBase<VG>& g) {
  detail::require_same_size(f, g, "select_jacobian_rows");
  if (fp.rows() != f.size() || gp.rows() != g.size() || fp.cols() != gp.cols())
    throw DimensionError("select_jacobian_rows: Jacobian shape mismatch");
  Eigen::Matrix<typename MF::Scalar, Eigen::Dynamic, Eigen::Dynamic> j(fp.rows(), fp.cols());
  for (Eigen::Index i = 0; i < f.size(); ++i) j.row(i) = f[i] <= g[i] ? fp.row(i) : gp.row(i);
  return j;
}

/// Per-entry scales dividing H and phi before the max-norm is taken.
template <typename Scalar>
struct ResidualScales {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> phi;

  static ResidualScales unit(Eigen::Index n_eq, Eigen::Index n_comp) {
    return {Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(n_eq),
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Ones(n_comp)};
  }
};

/// Res = max(|H_i| / scale_h_i, |phi_i| / scale_phi_i).
template <typename VH, typename VP>
typename VH::Scalar residual_norm(const Eigen::MatrixBase<VH>& h, const Eigen::MatrixBase<VP>& phi,
                                  const ResidualScales<typename VH::Scalar>& scales) {
  using Scalar = typename VH::Scalar;
  detail::require_same_size(h, scales.h, "residual_norm");
  detail::require_same_size(phi, scales.phi, "residual_norm");
  Scalar res(0);
  if (h.size() > 0) res = (h.cwiseAbs().cwiseQuotient(scales.h)).maxCoeff();
  if (phi.size() > 0) res = std::max(res, (phi.cwiseAbs().cwiseQuotient(scales.phi)).maxCoeff());
  return res;
}

template <typename VH, typename VP>
typename VH::Scalar residual_norm(const Eigen::MatrixBase<VH>& h,
                                  const Eigen::MatrixBase<VP>& phi) {
  return residual_norm(h, phi, ResidualScales<typename VH::Scalar>::unit(h.size(), phi.size()));
}

template <typename Scalar>
struct NcpResidual {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> h;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> f;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g;
};

/// A complementarity system the Newton-min loop can drive.
///
/// `newton_matrix(x, w)` returns the linearization of (H; phi) at x in the
/// problem's own row order, with complementarity row i formed from the row
/// weights w. `stack(h, phi)` maps the stacked residual into the same order.
/// Columns follow the ordering of x.
template <typename P>
concept NcpProblem = requires(const P& p, const typename P::Vector& x,
                              const RowWeights<typename P::Scalar>& w) {
  typename P::Scalar;
  typename P::Vector;
  typename P::Matrix;
  { p.n_unknowns() } -> std::convertible_to<Eigen::Index>;
  { p.n_equations() } -> std::convertible_to<Eigen::Index>;
  { p.n_complementarity() } -> std::convertible_to<Eigen::Index>;
  { p.evaluate(x) } -> std::same_as<NcpResidual<typename P::Scalar>>;
  { p.newton_matrix(x, w) } -> std::same_as<typename P::Matrix>;
  { p.stack(x, x) } -> std::same_as<typename P::Vector>;
  { p.residual_scales() } -> std::same_as<ResidualScales<typename P::Scalar>>;
};

struct NewtonOptions {
  double eps = 1e-10;
  int max_iter = 50;
  CFunction c_function = CFunction::min;
};

/// Iteration history of one Newton-min solve.
///
/// residual_history[k] and active_set_history[k] describe the k-th iterate
/// (entry 0 is the starting point), so the history holds iterations + 1
/// entries. `iterations` counts linear solves.
struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;
  std::vector<Eigen::Index> active_set_history;
  std::vector<Eigen::Index> final_active_set;
};

template <typename Scalar>
struct NewtonResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
  NewtonReport report;
};

/// Semi-smooth Newton-min iteration. Each iteration evaluates (H, F, G),
/// stops if the scaled residual is <= eps, otherwise selects one element of
/// the generalized Jacobian of phi and performs exactly one linear solve.
/// No line search or damping is applied.
template <NcpProblem Problem, typename LinearSolver>
NewtonResult<typename Problem::Scalar> newton_min_solve(const Problem& problem,
                                                        const typename Problem::Vector& x0,
                                                        const NewtonOptions& options,
                                                        const LinearSolver& linear_solver) {
  using Scalar = typename Problem::Scalar;
  using Vector = typename Problem::Vector;
  if (!(options.eps > 0.0)) throw std::invalid_argument("newton_min_solve: eps must be > 0");
  if (options.max_iter < 1) throw std::invalid_argument("newton_min_solve: max_iter must be >= 1");
  if (x0.size() != problem.n_unknowns())
    throw DimensionError("newton_min_solve: x0 has the wrong length");

  const ResidualScales<Scalar> scales = problem.residual_scales();
  NewtonResult<Scalar> out{x0, {}};
  NewtonReport& report = out.report;

  for (;;) {
    NcpResidual<Scalar> r;
    try {
      r = problem.evaluate(out.x);
    } catch (const DomainError& e) {
      throw EvaluationFailure(std::string("newton_min_solve: ") + e.what());
    }
    if (!r.h.allFinite() || !r.f.allFinite() || !r.g.allFinite())
      throw EvaluationFailure("newton_min_solve: non-finite residual");

    const Vector phi = cfun(options.c_function, r.f, r.g);
    const Scalar res = residual_norm(r.h, phi, scales);
    ActiveSets sets = active_sets(r.f, r.g);
    report.residual_history.push_back(static_cast<double>(res));
    report.active_set_history.push_back(static_cast<Eigen::Index>(sets.active.size()));

    if (res <= Scalar(options.eps)) {
      report.converged = true;
      report.final_active_set = std::move(sets.active);
      return out;
    }
    if (report.iterations >= options.max_iter) {
      std::ostringstream msg;
      msg << "newton_min_solve: no convergence in " << options.max_iter
          << " iterations (residual " << res << ")";
      throw NonConvergence(msg.str());
    }

    const RowWeights<Scalar> w = row_weights(options.c_function, r.f, r.g);
    typename Problem::Matrix jac;
    try {
      jac = problem.newton_matrix(out.x, w);
    } catch (const DomainError& e) {
      throw EvaluationFailure(std::string("newton_min_solve: ") + e.what());
    }
    const Vector rhs = -problem.stack(r.h, phi);
    const Vector step = linear_solver(jac, rhs);
    if (!step.allFinite()) throw SingularLinearSystem("newton_min_solve: non-finite Newton step");
    out.x += step;
    ++report.iterations;
  }
}

// ---------------------------------------------------------------------------
// Dense problems: small NCPs given by callbacks, used for verification and
// for the solve-ncp command.
// ---------------------------------------------------------------------------

/// Dense LU linear solver that reports singular systems.
struct DenseLuSolver {
  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> operator()(
      const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a,
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b) const {
    Eigen::FullPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(a);
    if (!lu.isInvertible()) throw SingularLinearSystem("DenseLuSolver: matrix is singular");
    return lu.solve(b);
  }
};

template <typename Scalar>
struct DenseJacobian {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> h;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> f;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> g;
};

/// NCP with smooth H, F, G supplied as callbacks; unknowns = equations +
/// complementarity pairs.
template <typename Scalar_>
class DenseNcp {
 public:
  using Scalar = Scalar_;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Evaluator = std::function<NcpResidual<Scalar>(const Vector&)>;
  using Differentiator = std::function<DenseJacobian<Scalar>(const Vector&)>;

  DenseNcp(Eigen::Index n_equations, Eigen::Index n_complementarity, Evaluator evaluate,
           Differentiator jacobian)
      : n_eq_(n_equations),
        n_comp_(n_complementarity),
        evaluate_(std::move(evaluate)),
        jacobian_(std::move(jacobian)) {}

  /// H(x) = Ah x + bh, F(x) = Af x + bf, G(x) = Ag x + bg.
  static DenseNcp affine(Matrix ah, Vector bh, Matrix af, Vector bf, Matrix ag, Vector bg) {
    const Eigen::Index n = ah.rows() + af.rows();
    if (ah.rows() != bh.size() || af.rows() != bf.size() || ag.rows() != bg.size() ||
        af.rows() != ag.rows() || (ah.rows() > 0 && ah.cols() != n) || af.cols() != n ||
        ag.cols() != n)
      throw DimensionError("DenseNcp::affine: inconsistent shapes");
    if (ah.rows() == 0) ah.resize(0, n);
    DenseJacobian<Scalar> jac{ah, af, ag};
    return DenseNcp(
        ah.rows(), af.rows(),
        [=](const Vector& x) {
          return NcpResidual<Scalar>{ah * x + bh, af * x + bf, ag * x + bg};
        },
        [jac](const Vector&) { return jac; });
  }

  /// Linear complementarity problem x >= 0, Mx + q >= 0, x^T (Mx + q) = 0.
  static DenseNcp lcp(const Matrix& m, const Vector& q) {
    const Eigen::Index n = q.size();
    return affine(Matrix(0, n), Vector(0), Matrix::Identity(n, n), Vector::Zero(n), m, q);
  }

  Eigen::Index n_unknowns() const { return n_eq_ + n_comp_; }
  Eigen::Index n_equations() const { return n_eq_; }
  Eigen::Index n_complementarity() const { return n_comp_; }

  NcpResidual<Scalar> evaluate(const Vector& x) const { return evaluate_(x); }
  DenseJacobian<Scalar> jacobian(const Vector& x) const { return jacobian_(x); }

  Matrix newton_matrix(const Vector& x, const RowWeights<Scalar>& w) const {
    const DenseJacobian<Scalar> j = jacobian_(x);
    Matrix a(n_unknowns(), n_unknowns());
    if (n_eq_ > 0) a.topRows(n_eq_) = j.h;
    a.bottomRows(n_comp_) = w.f.asDiagonal() * j.f + w.g.asDiagonal() * j.g;
    return a;
  }

  Vector stack(const Vector& h, const Vector& phi) const {
    Vector out(h.size() + phi.size());
    out << h, phi;
    return out;
  }

  ResidualScales<Scalar> residual_scales() const {
    return ResidualScales<Scalar>::unit(n_eq_, n_comp_);
  }

 private:
  Eigen::Index n_eq_;
  Eigen::Index n_comp_;
  Evaluator evaluate_;
  Differentiator jacobian_;
};

}  // namespace h2flow

#endif  // H2FLOW_NCP_HPP
