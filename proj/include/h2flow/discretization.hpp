#ifndef H2FLOW_DISCRETIZATION_HPP
#define H2FLOW_DISCRETIZATION_HPP

// Cell-centered finite volumes on a uniform 1-D grid for the water/hydrogen
// system: two-point fluxes, phase-potential upwinding, implicit Euler.
//
// Unknowns are interleaved per cell as (s_l, p_l, chi_h_l). Per cell the
// residual has a water and a hydrogen conservation row (H), the gas
// saturation F = 1 - s_l and the Henry gap G = H (p_l + p_c) - rho_l chi.

#include <Eigen/Dense>
#include <vector>

#include "h2flow/block_tridiag.hpp"
#include "h2flow/constitutive.hpp"
#include "h2flow/ncp.hpp"

namespace h2flow {

inline constexpr double kSecondsPerYear = 3.15576e7;  // Julian year

struct Grid {
  Eigen::Index n_cells = 0;
  double length = 0.0;
  double dx = 0.0;
  Eigen::VectorXd cell_centers;

  static Grid uniform(Eigen::Index n_cells, double length);
};

struct CellState {
  double s_l = 1.0;
  double p_l = 0.0;
  double chi_h_l = 0.0;

  double s_g() const { return 1.0 - s_l; }
};

/// Flattened unknowns, (s_l, p_l, chi_h_l) per cell.
using StateVector = Eigen::VectorXd;

enum Unknown : Eigen::Index { kSaturation = 0, kPressure = 1, kMolarFraction = 2 };
inline constexpr Eigen::Index kUnknownsPerCell = 3;

StateVector flatten(const std::vector<CellState>& cells);
std::vector<CellState> unflatten(const StateVector& x);

struct BoundarySpec {
  double hydrogen_influx = 0.0;  // left total hydrogen mass flux, kg/(m^2 s), +x into the domain
  double p_right = 1e6;          // right Dirichlet liquid pressure, Pa (s_l = 1 there)

  void validate() const;
};

/// A face quantity and its partials with respect to the six unknowns of the
/// two adjacent cells, ordered (s, p, chi) of the left cell then the right.
struct FaceFlux {
  double value = 0.0;
  Eigen::Matrix<double, 1, 6> d = Eigen::Matrix<double, 1, 6>::Zero();
};

/// Water and hydrogen mass fluxes through one face, positive towards +x.
struct ComponentFluxes {
  FaceFlux water;
  FaceFlux hydrogen;
};

/// Jacobian of (H; F; G). `h` keeps the water and hydrogen rows in rows 0
/// and 1 of each 3x3 block; row 2 is left zero for the complementarity row
/// chosen by the Newton-min selection.
struct SystemJacobian {
  BlockTridiagMatrix<double, 3> h;
  std::vector<Eigen::RowVector3d> f;
  std::vector<Eigen::RowVector3d> g;

  /// Newton matrix with complementarity row i = w.f[i] F'_i + w.g[i] G'_i.
  BlockTridiagMatrix<double, 3> newton_matrix(const RowWeights<double>& w) const;

  Eigen::MatrixXd dense_h() const;
  Eigen::MatrixXd dense_f() const;
  Eigen::MatrixXd dense_g() const;
  /// (H'; F'; G') stacked as 4N x 3N, rows in H, F, G order.
  Eigen::MatrixXd dense() const;
};

/// Per-volume source terms in kg/(m^3 s); empty means zero.
struct Sources {
  Eigen::VectorXd water;
  Eigen::VectorXd hydrogen;
};

class TwoPhaseModel {
 public:
  TwoPhaseModel(Grid grid, const MediumParams& medium, const FluidParams& fluid,
                CurveRegularization reg = {});

  const Grid& grid() const { return grid_; }
  const MediumParams& medium() const { return curves_.medium(); }
  const FluidParams& fluid() const { return fluid_; }
  const RegularizedCurves<double>& curves() const { return curves_; }

  void set_sources(Sources sources);

  /// Mass flux carried by `phase` across interior face `face` (between cells
  /// face and face + 1): water for the liquid phase, hydrogen for the gas phase.
  FaceFlux phase_darcy_flux(Eigen::Index face, const StateVector& x, Phase phase) const;
  /// Dissolved hydrogen carried by the liquid across an interior face.
  FaceFlux dissolved_advective_flux(Eigen::Index face, const StateVector& x) const;
  /// Diffusive hydrogen flux j_h^l across an interior face.
  FaceFlux diffusive_flux(Eigen::Index face, const StateVector& x) const;

  ComponentFluxes interior_fluxes(Eigen::Index face, const StateVector& x) const;
  /// Fluxes through the right Dirichlet face; only the first three partials
  /// (cell N - 1) are used.
  ComponentFluxes right_boundary_fluxes(const StateVector& x, const BoundarySpec& bc) const;

  NcpResidual<double> assemble_residual(const StateVector& x_new, const StateVector& x_old,
                                        double dt, const BoundarySpec& bc) const;
  SystemJacobian assemble_jacobian(const StateVector& x_new, const StateVector& x_old, double dt,
                                   const BoundarySpec& bc) const;

  /// Stored mass per bulk volume, kg/m^3: water phi rho_l s_l, hydrogen
  /// phi (s_l rho_l chi + s_g C_g p_g).
  double water_content(const StateVector& x, Eigen::Index cell) const;
  double hydrogen_content(const StateVector& x, Eigen::Index cell) const;
  /// Totals per unit cross-section, kg/m^2.
  double total_water(const StateVector& x) const;
  double total_hydrogen(const StateVector& x) const;

  double gas_pressure(const StateVector& x, Eigen::Index cell) const;

 private:
  struct CellProps;
  CellProps props(const StateVector& x, Eigen::Index cell) const;
  void check_state(const StateVector& x) const;

  Grid grid_;
  FluidParams fluid_;
  RegularizedCurves<double> curves_;
  Sources sources_;
};

/// Characteristic magnitudes of the three equation classes.
struct EquationScales {
  double water = 1.0;            // kg/(m^3 s)
  double hydrogen = 1.0;         // kg/(m^3 s)
  double complementarity = 1.0;  // kg/m^3

  /// phi rho_l / dt, phi H p_ref / dt and H p_ref.
  static EquationScales from_reference(const TwoPhaseModel& model, double p_reference, double dt);
};

/// One implicit Euler step posed as an NCP for newton_min_solve.
class TimeStepProblem {
 public:
  using Scalar = double;
  using Vector = Eigen::VectorXd;
  using Matrix = BlockTridiagMatrix<double, 3>;

  TimeStepProblem(const TwoPhaseModel& model, StateVector x_old, double dt, BoundarySpec bc,
                  EquationScales scales);

  Eigen::Index n_unknowns() const { return kUnknownsPerCell * model_.grid().n_cells; }
  Eigen::Index n_equations() const { return 2 * model_.grid().n_cells; }
  Eigen::Index n_complementarity() const { return model_.grid().n_cells; }

  NcpResidual<double> evaluate(const Vector& x) const;
  Matrix newton_matrix(const Vector& x, const RowWeights<double>& w) const;
  /// Interleaves (water_i, hydrogen_i, phi_i) per cell.
  Vector stack(const Vector& h, const Vector& phi) const;
  ResidualScales<double> residual_scales() const;

  const BoundarySpec& boundary() const { return bc_; }
  double dt() const { return dt_; }

 private:
  const TwoPhaseModel& model_;
  StateVector x_old_;
  double dt_;
  BoundarySpec bc_;
  EquationScales scales_;
};

}  // namespace h2flow

#endif  // H2FLOW_DISCRETIZATION_HPP
