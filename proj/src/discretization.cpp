#include "h2flow/discretization.hpp"

#include <cmath>
#include <string>

namespace h2flow {

Grid Grid::uniform(Eigen::Index n_cells, double length) {
  if (n_cells < 1) throw DomainError("Grid: n_cells must be >= 1");
  if (!(length > 0.0)) throw DomainError("Grid: length must be > 0");
  Grid g;
  g.n_cells = n_cells;
  g.length = length;
  g.dx = length / static_cast<double>(n_cells);
  g.cell_centers.resize(n_cells);
  for (Eigen::Index i = 0; i < n_cells; ++i)
    g.cell_centers[i] = (static_cast<double>(i) + 0.5) * g.dx;
  return g;
}

StateVector flatten(const std::vector<CellState>& cells) {
  StateVector x(kUnknownsPerCell * static_cast<Eigen::Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto k = kUnknownsPerCell * static_cast<Eigen::Index>(i);
    x[k + kSaturation] = cells[i].s_l;
    x[k + kPressure] = cells[i].p_l;
    x[k + kMolarFraction] = cells[i].chi_h_l;
  }
  return x;
}

std::vector<CellState> unflatten(const StateVector& x) {
  if (x.size() % kUnknownsPerCell != 0)
    throw DimensionError("unflatten: length is not a multiple of 3");
  std::vector<CellState> cells(static_cast<std::size_t>(x.size() / kUnknownsPerCell));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto k = kUnknownsPerCell * static_cast<Eigen::Index>(i);
    cells[i] = {x[k + kSaturation], x[k + kPressure], x[k + kMolarFraction]};
  }
  return cells;
}

void BoundarySpec::validate() const {
  if (!std::isfinite(hydrogen_influx) || hydrogen_influx < 0.0)
    throw DomainError("BoundarySpec: hydrogen_influx must be finite and >= 0");
  if (!(p_right > 0.0) || !std::isfinite(p_right))
    throw DomainError("BoundarySpec: p_right must be > 0");
}

// ---------------------------------------------------------------------------
// SystemJacobian
// ---------------------------------------------------------------------------

BlockTridiagMatrix<double, 3> SystemJacobian::newton_matrix(const RowWeights<double>& w) const {
  BlockTridiagMatrix<double, 3> a = h;
  for (Eigen::Index i = 0; i < a.n_blocks(); ++i)
    a.diag(i).row(2) = w.f[i] * f[static_cast<std::size_t>(i)] +
                       w.g[i] * g[static_cast<std::size_t>(i)];
  return a;
}

Eigen::MatrixXd SystemJacobian::dense_h() const {
  const Eigen::MatrixXd full = h.toDense();
  const Eigen::Index n = h.n_blocks();
  Eigen::MatrixXd out(2 * n, 3 * n);
  for (Eigen::Index i = 0; i < n; ++i) out.middleRows(2 * i, 2) = full.middleRows(3 * i, 2);
  return out;
}

namespace {
Eigen::MatrixXd local_rows(const std::vector<Eigen::RowVector3d>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, 3 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    out.block<1, 3>(i, 3 * i) = rows[static_cast<std::size_t>(i)];
  return out;
}
}  // namespace

Eigen::MatrixXd SystemJacobian::dense_f() const { return local_rows(f); }
Eigen::MatrixXd SystemJacobian::dense_g() const { return local_rows(g); }

Eigen::MatrixXd SystemJacobian::dense() const {
  const Eigen::Index n = h.n_blocks();
  Eigen::MatrixXd out(4 * n, 3 * n);
  out << dense_h(), dense_f(), dense_g();
  return out;
}

// ---------------------------------------------------------------------------
// TwoPhaseModel
// ---------------------------------------------------------------------------

struct TwoPhaseModel::CellProps {
  double s, p, chi;
  double pc, dpc;      // capillary pressure and d/ds
  double pg;           // gas pressure, d/ds = dpc, d/dp = 1
  double lam_l, dlam_l;
  double lam_g, dlam_g;
};

TwoPhaseModel::TwoPhaseModel(Grid grid, const MediumParams& medium, const FluidParams& fluid,
                             CurveRegularization reg)
    : grid_(std::move(grid)), fluid_(fluid), curves_(medium, reg) {
  medium.validate();
  fluid.validate();
}

void TwoPhaseModel::set_sources(Sources sources) {
  if ((sources.water.size() != 0 && sources.water.size() != grid_.n_cells) ||
      (sources.hydrogen.size() != 0 && sources.hydrogen.size() != grid_.n_cells))
    throw DimensionError("TwoPhaseModel: source vectors must have one entry per cell");
  sources_ = std::move(sources);
}

void TwoPhaseModel::check_state(const StateVector& x) const {
  if (x.size() != kUnknownsPerCell * grid_.n_cells)
    throw DimensionError("TwoPhaseModel: state has the wrong length");
}

TwoPhaseModel::CellProps TwoPhaseModel::props(const StateVector& x, Eigen::Index cell) const {
  const Eigen::Index k = kUnknownsPerCell * cell;
  CellProps c{};
  c.s = x[k + kSaturation];
  c.p = x[k + kPressure];
  c.chi = x[k + kMolarFraction];
  if (!std::isfinite(c.s) || !std::isfinite(c.p) || !std::isfinite(c.chi))
    throw DomainError("non-finite state in cell " + std::to_string(cell));
  const auto pc = curves_.capillary_pressure(c.s);
  c.pc = pc.value;
  c.dpc = pc.derivative;
  // Linear in p_g, so iterates with p_g <= 0 are still well defined.
  c.pg = c.p + c.pc;
  const auto krl = curves_.rel_perm_liquid(c.s);
  const auto krg = curves_.rel_perm_gas(c.s);
  c.lam_l = krl.value / fluid_.viscosity_liquid;
  c.dlam_l = krl.derivative / fluid_.viscosity_liquid;
  c.lam_g = krg.value / fluid_.viscosity_gas;
  c.dlam_g = krg.derivative / fluid_.viscosity_gas;
  return c;
}

double TwoPhaseModel::gas_pressure(const StateVector& x, Eigen::Index cell) const {
  return props(x, cell).pg;
}

namespace {

// Offsets of (s, p, chi) inside the 6-entry face derivative.
constexpr int kLeft = 0;
constexpr int kRight = 3;

double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

}  // namespace

FaceFlux TwoPhaseModel::phase_darcy_flux(Eigen::Index face, const StateVector& x,
                                         Phase phase) const {
  check_state(x);
  if (face < 0 || face + 1 >= grid_.n_cells)
    throw DimensionError("phase_darcy_flux: not an interior face");
  const CellProps l = props(x, face);
  const CellProps r = props(x, face + 1);
  const double k = medium().permeability;
  const double trans = harmonic_mean(k, k) / grid_.dx;
  FaceFlux out;

  if (phase == Phase::liquid) {
    const double dp = r.p - l.p;
    const bool left_up = l.p >= r.p;
    const CellProps& up = left_up ? l : r;
    const int uo = left_up ? kLeft : kRight;
    const double rho = fluid_.liquid_density;
    out.value = -trans * up.lam_l * dp * rho;
    out.d[kLeft + kPressure] += trans * up.lam_l * rho;
    out.d[kRight + kPressure] -= trans * up.lam_l * rho;
    out.d[uo + kSaturation] += -trans * up.dlam_l * dp * rho;
    return out;
  }

  const double dpg = r.pg - l.pg;
  const bool left_up = l.pg >= r.pg;
  const CellProps& up = left_up ? l : r;
  const int uo = left_up ? kLeft : kRight;
  const double cg = fluid_.gas_compressibility;
  const double q = -trans * up.lam_g * dpg;
  const double rho_g = cg * up.pg;
  out.value = rho_g * q;
  // dq: through the pressure difference (both cells) and the upwind mobility.
  Eigen::Matrix<double, 1, 6> dq = Eigen::Matrix<double, 1, 6>::Zero();
  dq[kLeft + kSaturation] += trans * up.lam_g * l.dpc;
  dq[kLeft + kPressure] += trans * up.lam_g;
  dq[kRight + kSaturation] -= trans * up.lam_g * r.dpc;
  dq[kRight + kPressure] -= trans * up.lam_g;
  dq[uo + kSaturation] += -trans * up.dlam_g * dpg;
  out.d = rho_g * dq;
  out.d[uo + kSaturation] += cg * up.dpc * q;
  out.d[uo + kPressure] += cg * q;
  return out;
}

FaceFlux TwoPhaseModel::dissolved_advective_flux(Eigen::Index face, const StateVector& x) const {
  check_state(x);
  if (face < 0 || face + 1 >= grid_.n_cells)
    throw DimensionError("dissolved_advective_flux: not an interior face");
  const CellProps l = props(x, face);
  const CellProps r = props(x, face + 1);
  const double k = medium().permeability;
  const double trans = harmonic_mean(k, k) / grid_.dx;
  const double dp = r.p - l.p;
  const bool left_up = l.p >= r.p;
  const CellProps& up = left_up ? l : r;
  const int uo = left_up ? kLeft : kRight;
  const double rho_l = fluid_.liquid_density;
  const double q = -trans * up.lam_l * dp;
  FaceFlux out;
  out.value = rho_l * up.chi * q;
  const double c = rho_l * up.chi;
  out.d[kLeft + kPressure] += c * trans * up.lam_l;
  out.d[kRight + kPressure] -= c * trans * up.lam_l;
  out.d[uo + kSaturation] += -c * trans * up.dlam_l * dp;
  out.d[uo + kMolarFraction] += rho_l * q;
  return out;
}

FaceFlux TwoPhaseModel::diffusive_flux(Eigen::Index face, const StateVector& x) const {
  check_state(x);
  if (face < 0 || face + 1 >= grid_.n_cells)
    throw DimensionError("diffusive_flux: not an interior face");
  const Eigen::Index kl = kUnknownsPerCell * face;
  const Eigen::Index kr = kl + kUnknownsPerCell;
  const double coeff = medium().porosity * fluid_.molar_mass_hydrogen *
                       fluid_.liquid_molar_density() * fluid_.diffusion / grid_.dx;
  const double s_face = 0.5 * (x[kl + kSaturation] + x[kr + kSaturation]);
  const double dchi = x[kr + kMolarFraction] - x[kl + kMolarFraction];
  FaceFlux out;
  out.value = -coeff * s_face * dchi;
  out.d[kLeft + kSaturation] = -coeff * 0.5 * dchi;
  out.d[kRight + kSaturation] = -coeff * 0.5 * dchi;
  out.d[kLeft + kMolarFraction] = coeff * s_face;
  out.d[kRight + kMolarFraction] = -coeff * s_face;
  return out;
}

ComponentFluxes TwoPhaseModel::interior_fluxes(Eigen::Index face, const StateVector& x) const {
  const FaceFlux liquid = phase_darcy_flux(face, x, Phase::liquid);
  const FaceFlux gas = phase_darcy_flux(face, x, Phase::gas);
  const FaceFlux dissolved = dissolved_advective_flux(face, x);
  const FaceFlux diffusion = diffusive_flux(face, x);
  ComponentFluxes out;
  out.water.value = liquid.value - diffusion.value;
  out.water.d = liquid.d - diffusion.d;
  out.hydrogen.value = dissolved.value + gas.value + diffusion.value;
  out.hydrogen.d = dissolved.d + gas.d + diffusion.d;
  return out;
}

ComponentFluxes TwoPhaseModel::right_boundary_fluxes(const StateVector& x,
                                                     const BoundarySpec& bc) const {
  check_state(x);
  const Eigen::Index last = grid_.n_cells - 1;
  const CellProps c = props(x, last);
  const double half = 0.5 * grid_.dx;
  const double trans = medium().permeability / half;
  const double rho_l = fluid_.liquid_density;
  const double cg = fluid_.gas_compressibility;
  ComponentFluxes out;

  // Liquid: ghost holds s_l = 1 (k_rl = 1) and p_right.
  const double dp = bc.p_right - c.p;
  const bool outflow = c.p >= bc.p_right;
  const double lam_ghost = curves_.rel_perm_liquid(1.0).value / fluid_.viscosity_liquid;
  const double lam = outflow ? c.lam_l : lam_ghost;
  const double q = -trans * lam * dp;
  Eigen::Matrix<double, 1, 6> dq = Eigen::Matrix<double, 1, 6>::Zero();
  dq[kLeft + kPressure] = trans * lam;
  if (outflow) dq[kLeft + kSaturation] = -trans * c.dlam_l * dp;

  // Dissolved hydrogen: upwinded from the cell on outflow, hydrogen-free inflow.
  const double chi_ghost = outflow ? c.chi : 0.0;
  FaceFlux dissolved;
  dissolved.value = rho_l * chi_ghost * q;
  dissolved.d = rho_l * chi_ghost * dq;
  if (outflow) dissolved.d[kLeft + kMolarFraction] += rho_l * q;

  // Diffusion towards the ghost value over half a cell.
  const double coeff = medium().porosity * fluid_.molar_mass_hydrogen *
                       fluid_.liquid_molar_density() * fluid_.diffusion / half;
  const double s_face = 0.5 * (c.s + 1.0);
  const double dchi = chi_ghost - c.chi;
  FaceFlux diffusion;
  diffusion.value = -coeff * s_face * dchi;
  diffusion.d[kLeft + kSaturation] = -coeff * 0.5 * dchi;
  diffusion.d[kLeft + kMolarFraction] = outflow ? 0.0 : coeff * s_face;

  // Gas: the ghost has no gas mobility, so only outflow carries gas.
  FaceFlux gas;
  const double dpg = bc.p_right - c.pg;
  if (c.pg >= bc.p_right && c.lam_g != 0.0) {
    const double qg = -trans * c.lam_g * dpg;
    const double rho_g = cg * c.pg;
    gas.value = rho_g * qg;
    Eigen::Matrix<double, 1, 6> dqg = Eigen::Matrix<double, 1, 6>::Zero();
    dqg[kLeft + kSaturation] = trans * c.lam_g * c.dpc - trans * c.dlam_g * dpg;
    dqg[kLeft + kPressure] = trans * c.lam_g;
    gas.d = rho_g * dqg;
    gas.d[kLeft + kSaturation] += cg * c.dpc * qg;
    gas.d[kLeft + kPressure] += cg * qg;
  }

  out.water.value = rho_l * q - diffusion.value;
  out.water.d = rho_l * dq - diffusion.d;
  out.hydrogen.value = dissolved.value + gas.value + diffusion.value;
  out.hydrogen.d = dissolved.d + gas.d + diffusion.d;
  return out;
}

double TwoPhaseModel::water_content(const StateVector& x, Eigen::Index cell) const {
  return medium().porosity * fluid_.liquid_density * x[kUnknownsPerCell * cell + kSaturation];
}

double TwoPhaseModel::hydrogen_content(const StateVector& x, Eigen::Index cell) const {
  const CellProps c = props(x, cell);
  return medium().porosity *
         (c.s * fluid_.liquid_density * c.chi + (1.0 - c.s) * fluid_.gas_compressibility * c.pg);
}

double TwoPhaseModel::total_water(const StateVector& x) const {
  check_state(x);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < grid_.n_cells; ++i) sum += water_content(x, i);
  return sum * grid_.dx;
}

double TwoPhaseModel::total_hydrogen(const StateVector& x) const {
  check_state(x);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < grid_.n_cells; ++i) sum += hydrogen_content(x, i);
  return sum * grid_.dx;
}

NcpResidual<double> TwoPhaseModel::assemble_residual(const StateVector& x_new,
                                                     const StateVector& x_old, double dt,
                                                     const BoundarySpec& bc) const {
  check_state(x_new);
  check_state(x_old);
  if (!(dt > 0.0)) throw DomainError("assemble_residual: dt must be > 0");
  const Eigen::Index n = grid_.n_cells;
  const double dx = grid_.dx;
  NcpResidual<double> r{Eigen::VectorXd::Zero(2 * n), Eigen::VectorXd(n), Eigen::VectorXd(n)};

  for (Eigen::Index i = 0; i < n; ++i) {
    const CellProps c = props(x_new, i);
    r.h[2 * i] = (water_content(x_new, i) - water_content(x_old, i)) / dt;
    r.h[2 * i + 1] = (hydrogen_content(x_new, i) - hydrogen_content(x_old, i)) / dt;
    if (sources_.water.size() != 0) r.h[2 * i] -= sources_.water[i];
    if (sources_.hydrogen.size() != 0) r.h[2 * i + 1] -= sources_.hydrogen[i];
    r.f[i] = 1.0 - c.s;
    r.g[i] = fluid_.henry_mass * c.pg - fluid_.liquid_density * c.chi;
  }

  // Left face: prescribed total hydrogen influx, no water flux.
  r.h[1] -= bc.hydrogen_influx / dx;

  for (Eigen::Index face = 0; face + 1 < n; ++face) {
    const ComponentFluxes fl = interior_fluxes(face, x_new);
    r.h[2 * face] += fl.water.value / dx;
    r.h[2 * face + 1] += fl.hydrogen.value / dx;
    r.h[2 * (face + 1)] -= fl.water.value / dx;
    r.h[2 * (face + 1) + 1] -= fl.hydrogen.value / dx;
  }

  const ComponentFluxes right = right_boundary_fluxes(x_new, bc);
  r.h[2 * (n - 1)] += right.water.value / dx;
  r.h[2 * (n - 1) + 1] += right.hydrogen.value / dx;
  return r;
}

SystemJacobian TwoPhaseModel::assemble_jacobian(const StateVector& x_new,
                                                const StateVector& x_old, double dt,
                                                const BoundarySpec& bc) const {
  check_state(x_new);
  check_state(x_old);
  if (!(dt > 0.0)) throw DomainError("assemble_jacobian: dt must be > 0");
  const Eigen::Index n = grid_.n_cells;
  const double dx = grid_.dx;
  const double phi = medium().porosity;
  const double rho_l = fluid_.liquid_density;
  const double cg = fluid_.gas_compressibility;

  SystemJacobian jac{BlockTridiagMatrix<double, 3>(n), std::vector<Eigen::RowVector3d>(n),
                     std::vector<Eigen::RowVector3d>(n)};

  for (Eigen::Index i = 0; i < n; ++i) {
    const CellProps c = props(x_new, i);
    auto& d = jac.h.diag(i);
    d(0, kSaturation) = phi * rho_l / dt;
    d(1, kSaturation) = phi * (rho_l * c.chi - cg * c.pg + (1.0 - c.s) * cg * c.dpc) / dt;
    d(1, kPressure) = phi * (1.0 - c.s) * cg / dt;
    d(1, kMolarFraction) = phi * c.s * rho_l / dt;
    jac.f[static_cast<std::size_t>(i)] << -1.0, 0.0, 0.0;
    jac.g[static_cast<std::size_t>(i)] << fluid_.henry_mass * c.dpc, fluid_.henry_mass, -rho_l;
  }

  for (Eigen::Index face = 0; face + 1 < n; ++face) {
    const ComponentFluxes fl = interior_fluxes(face, x_new);
    const Eigen::Index l = face;
    const Eigen::Index r = face + 1;
    // Outflow from the left cell, inflow to the right cell.
    jac.h.diag(l).row(0) += fl.water.d.head<3>() / dx;
    jac.h.upper(l).row(0) += fl.water.d.tail<3>() / dx;
    jac.h.diag(l).row(1) += fl.hydrogen.d.head<3>() / dx;
    jac.h.upper(l).row(1) += fl.hydrogen.d.tail<3>() / dx;
    jac.h.lower(l).row(0) -= fl.water.d.head<3>() / dx;
    jac.h.diag(r).row(0) -= fl.water.d.tail<3>() / dx;
    jac.h.lower(l).row(1) -= fl.hydrogen.d.head<3>() / dx;
    jac.h.diag(r).row(1) -= fl.hydrogen.d.tail<3>() / dx;
  }

  const ComponentFluxes right = right_boundary_fluxes(x_new, bc);
  jac.h.diag(n - 1).row(0) += right.water.d.head<3>() / dx;
  jac.h.diag(n - 1).row(1) += right.hydrogen.d.head<3>() / dx;
  return jac;
}

// ---------------------------------------------------------------------------

EquationScales EquationScales::from_reference(const TwoPhaseModel& model, double p_reference,
                                              double dt) {
  const double phi = model.medium().porosity;
  const double henry = model.fluid().henry_mass;
  EquationScales s;
  s.water = phi * model.fluid().liquid_density / dt;
  s.hydrogen = phi * henry * p_reference / dt;
  s.complementarity = henry * p_reference;
  return s;
}

TimeStepProblem::TimeStepProblem(const TwoPhaseModel& model, StateVector x_old, double dt,
                                 BoundarySpec bc, EquationScales scales)
    : model_(model), x_old_(std::move(x_old)), dt_(dt), bc_(bc), scales_(scales) {}

NcpResidual<double> TimeStepProblem::evaluate(const Vector& x) const {
  return model_.assemble_residual(x, x_old_, dt_, bc_);
}

TimeStepProblem::Matrix TimeStepProblem::newton_matrix(const Vector& x,
                                                       const RowWeights<double>& w) const {
  return model_.assemble_jacobian(x, x_old_, dt_, bc_).newton_matrix(w);
}

TimeStepProblem::Vector TimeStepProblem::stack(const Vector& h, const Vector& phi) const {
  const Eigen::Index n = phi.size();
  Vector out(3 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[3 * i] = h[2 * i];
    out[3 * i + 1] = h[2 * i + 1];
    out[3 * i + 2] = phi[i];
  }
  return out;
}

ResidualScales<double> TimeStepProblem::residual_scales() const {
  const Eigen::Index n = model_.grid().n_cells;
  ResidualScales<double> s{Eigen::VectorXd(2 * n),
                           Eigen::VectorXd::Constant(n, scales_.complementarity)};
  for (Eigen::Index i = 0; i < n; ++i) {
    s.h[2 * i] = scales_.water;
    s.h[2 * i + 1] = scales_.hydrogen;
  }
  return s;
}

}  // namespace h2flow
