#ifndef H2FLOW_CONSTITUTIVE_HPP
#define H2FLOW_CONSTITUTIVE_HPP

// Van Genuchten-Mualem saturation curves, phase mobilities, Henry's law and
// the slightly compressible gas law. Every law returns its value together
// with the analytic derivative with respect to its argument.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "h2flow/errors.hpp"

namespace h2flow {

inline constexpr double kGasConstant = 8.314;  // J/(mol K)

template <typename Scalar>
struct ValueDerivative {
  Scalar value;
  Scalar derivative;
};

enum class Phase { liquid, gas };

struct MediumParams {
  double permeability;         // K, m^2
  double porosity;             // phi
  double vg_pressure;          // P_r, Pa
  double vg_n;                 // n
  double vg_m;                 // 1 - 1/n, stored once
  double residual_liquid_sat;  // S_lr
  double residual_gas_sat;     // S_gr

  static MediumParams create(double permeability, double porosity, double vg_pressure,
                             double vg_n, double residual_liquid_sat,
                             double residual_gas_sat) {
    MediumParams p{permeability, porosity,           vg_pressure,     vg_n,
                   1.0 - 1.0 / vg_n, residual_liquid_sat, residual_gas_sat};
    p.validate();
    return p;
  }

  /// Mobile saturation range 1 - S_lr - S_gr.
  double mobile_range() const { return 1.0 - residual_liquid_sat - residual_gas_sat; }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw DomainError(std::string("MediumParams: ") + what);
    };
    require(permeability > 0.0, "permeability must be > 0");
    require(porosity > 0.0 && porosity < 1.0, "porosity must lie in (0, 1)");
    require(vg_pressure > 0.0, "vg_pressure must be > 0");
    require(vg_n > 1.0, "vg_n must be > 1");
    require(vg_m == 1.0 - 1.0 / vg_n, "vg_m must equal 1 - 1/n");
    require(vg_m > 0.0 && vg_m < 1.0, "vg_m must lie in (0, 1)");
    require(residual_liquid_sat >= 0.0 && residual_gas_sat >= 0.0,
            "residual saturations must be >= 0");
    require(residual_liquid_sat + residual_gas_sat < 1.0,
            "residual saturations must sum to < 1");
  }
};

/// How the liquid molar density c_l entering the diffusion flux is closed.
enum class DiffusionClosure {
  /// c_l = rho_l / M_h, so that M_h c_l chi equals the stored rho_l chi.
  dissolved_mass,
  /// c_l = rho_l / M_w (pure-water molar density).
  water_molar,
};

struct FluidParams {
  double viscosity_liquid;     // Pa s
  double viscosity_gas;        // Pa s
  double liquid_density;       // kg/m^3, also used as rho_w^l
  double henry_molar;          // mol/(Pa m^3)
  double henry_mass;           // henry_molar * M_h, kg/(Pa m^3)
  double molar_mass_water;     // kg/mol
  double molar_mass_hydrogen;  // kg/mol
  double diffusion;            // D_h^l, m^2/s
  double gas_compressibility;  // C_g = M_h / (R T), kg/(m^3 Pa)
  double temperature;          // K
  double reference_gas_density;  // kg/m^3, rho_h at 1e5 Pa for the C_g cross-check
  DiffusionClosure diffusion_closure = DiffusionClosure::dissolved_mass;

  static FluidParams create(double viscosity_liquid, double viscosity_gas,
                            double liquid_density, double henry_molar,
                            double molar_mass_water, double molar_mass_hydrogen,
                            double diffusion, double temperature,
                            double reference_gas_density,
                            DiffusionClosure closure = DiffusionClosure::dissolved_mass) {
    FluidParams f{viscosity_liquid,
                  viscosity_gas,
                  liquid_density,
                  henry_molar,
                  henry_molar * molar_mass_hydrogen,
                  molar_mass_water,
                  molar_mass_hydrogen,
                  diffusion,
                  molar_mass_hydrogen / (kGasConstant * temperature),
                  temperature,
                  reference_gas_density,
                  closure};
    f.validate();
    return f;
  }

  double liquid_molar_density() const {
    return diffusion_closure == DiffusionClosure::dissolved_mass
               ? liquid_density / molar_mass_hydrogen
               : liquid_density / molar_mass_water;
  }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw DomainError(std::string("FluidParams: ") + what);
    };
    require(viscosity_liquid > 0.0 && viscosity_gas > 0.0, "viscosities must be > 0");
    require(liquid_density > 0.0, "liquid_density must be > 0");
    require(henry_molar > 0.0 && henry_mass > 0.0, "Henry constants must be > 0");
    require(molar_mass_water > 0.0 && molar_mass_hydrogen > 0.0, "molar masses must be > 0");
    require(diffusion > 0.0, "diffusion must be > 0");
    require(gas_compressibility > 0.0, "gas_compressibility must be > 0");
    require(temperature > 0.0, "temperature must be > 0");
    require(reference_gas_density > 0.0, "reference_gas_density must be > 0");
    require(henry_mass == henry_molar * molar_mass_hydrogen,
            "henry_mass must equal henry_molar * M_h");
    require(std::abs(gas_compressibility * 1e5 - reference_gas_density) <=
                0.02 * reference_gas_density,
            "C_g * 1e5 Pa must agree with reference_gas_density within 2%");
  }
};

// ---------------------------------------------------------------------------
// Exact laws. Arguments outside the domain raise DomainError.
// ---------------------------------------------------------------------------

template <typename Scalar>
ValueDerivative<Scalar> effective_saturation(Scalar s_l, const MediumParams& medium,
                                             double tol = 1e-12) {
  const Scalar slr = Scalar(medium.residual_liquid_sat);
  if (s_l < slr - Scalar(tol) || s_l > Scalar(1) + Scalar(tol))
    throw DomainError("effective_saturation: s_l = " + std::to_string(double(s_l)) +
                      " outside [S_lr, 1]");
  const Scalar range = Scalar(medium.mobile_range());
  return {(s_l - slr) / range, Scalar(1) / range};
}

/// Van Genuchten p_c as a function of S_le in (0, 1]; derivative is dp_c/dS_le.
template <typename Scalar>
ValueDerivative<Scalar> capillary_pressure_of_effective(Scalar se, const MediumParams& medium) {
  using std::pow;
  if (!(se > Scalar(0)) || se > Scalar(1))
    throw DomainError("capillary_pressure: S_le must lie in (0, 1]");
  const Scalar pr = Scalar(medium.vg_pressure);
  const Scalar inv_n = Scalar(1) / Scalar(medium.vg_n);
  const Scalar inv_m = Scalar(1) / Scalar(medium.vg_m);
  if (se == Scalar(1)) return {Scalar(0), -std::numeric_limits<Scalar>::infinity()};
  const Scalar base = pow(se, -inv_m) - Scalar(1);
  const Scalar value = pr * pow(base, inv_n);
  const Scalar dbase = -inv_m * pow(se, -inv_m - Scalar(1));
  return {value, pr * inv_n * pow(base, inv_n - Scalar(1)) * dbase};
}

template <typename Scalar>
ValueDerivative<Scalar> rel_perm_liquid_of_effective(Scalar se, const MediumParams& medium) {
  using std::pow;
  using std::sqrt;
  if (se < Scalar(0) || se > Scalar(1))
    throw DomainError("rel_perm_liquid: S_le outside [0, 1]");
  const Scalar m = Scalar(medium.vg_m);
  const Scalar inv_m = Scalar(1) / m;
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  if (se == Scalar(0)) return {Scalar(0), inf};
  if (se == Scalar(1)) return {Scalar(1), inf};
  const Scalar u = Scalar(1) - pow(se, inv_m);
  const Scalar w = Scalar(1) - pow(u, m);
  // m * (1/m) = 1 folds the chain-rule constants of dw/dS_le.
  const Scalar dw = pow(u, m - Scalar(1)) * pow(se, inv_m - Scalar(1));
  const Scalar root = sqrt(se);
  return {root * w * w, Scalar(0.5) / root * w * w + root * Scalar(2) * w * dw};
}

template <typename Scalar>
ValueDerivative<Scalar> rel_perm_gas_of_effective(Scalar se, const MediumParams& medium) {
  using std::pow;
  using std::sqrt;
  if (se < Scalar(0) || se > Scalar(1))
    throw DomainError("rel_perm_gas: S_le outside [0, 1]");
  const Scalar m = Scalar(medium.vg_m);
  const Scalar inv_m = Scalar(1) / m;
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  if (se == Scalar(0)) return {Scalar(1), -inf};
  if (se == Scalar(1)) return {Scalar(0), -inf};
  const Scalar u = Scalar(1) - pow(se, inv_m);
  const Scalar root = sqrt(Scalar(1) - se);
  const Scalar value = root * pow(u, Scalar(2) * m);
  const Scalar d = -Scalar(0.5) / root * pow(u, Scalar(2) * m) -
                   Scalar(2) * root * pow(u, Scalar(2) * m - Scalar(1)) *
                       pow(se, inv_m - Scalar(1));
  return {value, d};
}

/// p_c(s_l) and dp_c/ds_l. S_le = 0 is the singular end of the curve.
template <typename Scalar>
ValueDerivative<Scalar> capillary_pressure(Scalar s_l, const MediumParams& medium) {
  const auto se = effective_saturation(s_l, medium);
  if (!(se.value > Scalar(0)))
    throw DomainError("capillary_pressure: singular at S_le = 0 (clamp s_l above S_lr)");
  const auto pc = capillary_pressure_of_effective(std::min(se.value, Scalar(1)), medium);
  return {pc.value, pc.derivative * se.derivative};
}

template <typename Scalar>
ValueDerivative<Scalar> rel_perm_liquid(Scalar s_l, const MediumParams& medium) {
  const auto se = effective_saturation(s_l, medium);
  const auto kr = rel_perm_liquid_of_effective(std::clamp(se.value, Scalar(0), Scalar(1)), medium);
  return {kr.value, kr.derivative * se.derivative};
}

template <typename Scalar>
ValueDerivative<Scalar> rel_perm_gas(Scalar s_l, const MediumParams& medium) {
  const auto se = effective_saturation(s_l, medium);
  const auto kr = rel_perm_gas_of_effective(std::clamp(se.value, Scalar(0), Scalar(1)), medium);
  return {kr.value, kr.derivative * se.derivative};
}

/// k_i = k_ri / mu_i, derivative with respect to s_l.
template <typename Scalar>
ValueDerivative<Scalar> mobility(Phase phase, Scalar s_l, const MediumParams& medium,
                                 const FluidParams& fluid) {
  if (phase == Phase::liquid) {
    const auto kr = rel_perm_liquid(s_l, medium);
    const Scalar mu = Scalar(fluid.viscosity_liquid);
    return {kr.value / mu, kr.derivative / mu};
  }
  const auto kr = rel_perm_gas(s_l, medium);
  const Scalar mu = Scalar(fluid.viscosity_gas);
  return {kr.value / mu, kr.derivative / mu};
}

template <typename Scalar>
ValueDerivative<Scalar> gas_density(Scalar p_g, const FluidParams& fluid) {
  if (!(p_g > Scalar(0))) throw DomainError("gas_density: p_g must be > 0");
  const Scalar cg = Scalar(fluid.gas_compressibility);
  return {cg * p_g, cg};
}

/// Dilute-solution closure rho_h^l = rho_l chi_h^l.
template <typename Scalar>
ValueDerivative<Scalar> dissolved_hydrogen_density(Scalar chi_h_l, const FluidParams& fluid) {
  if (chi_h_l < Scalar(0) || chi_h_l > Scalar(1))
    throw DomainError("dissolved_hydrogen_density: chi_h_l outside [0, 1]");
  const Scalar rho = Scalar(fluid.liquid_density);
  return {rho * chi_h_l, rho};
}

// ---------------------------------------------------------------------------
// Regularized curves used inside the Newton loop, where iterates may leave
// [S_lr, 1] transiently. S_le is clamped to [s_eps, inf); on the top band
// [1 - top_band, 1] each curve is replaced by its chord, which removes the
// unbounded slopes of the VG-Mualem curves at S_le = 1. Past S_le = 1 the
// capillary pressure continues along the chord and the relative
// permeabilities stay at their endpoint values.
// ---------------------------------------------------------------------------

struct CurveRegularization {
  double s_eps = 1e-6;
  double top_band = 1e-4;
};

template <typename Scalar>
class RegularizedCurves {
 public:
  RegularizedCurves(const MediumParams& medium, CurveRegularization reg = {})
      : medium_(medium), reg_(reg) {
    const Scalar knee = Scalar(1) - Scalar(reg_.top_band);
    pc_knee_ = capillary_pressure_of_effective(knee, medium_).value;
    krl_knee_ = rel_perm_liquid_of_effective(knee, medium_).value;
    krg_knee_ = rel_perm_gas_of_effective(knee, medium_).value;
  }

  const MediumParams& medium() const { return medium_; }
  const CurveRegularization& regularization() const { return reg_; }

  ValueDerivative<Scalar> capillary_pressure(Scalar s_l) const {
    return curve(s_l, pc_knee_, Scalar(0), true, [this](Scalar se) {
      return capillary_pressure_of_effective(se, medium_);
    });
  }

  ValueDerivative<Scalar> rel_perm_liquid(Scalar s_l) const {
    return curve(s_l, krl_knee_, Scalar(1), false, [this](Scalar se) {
      return rel_perm_liquid_of_effective(se, medium_);
    });
  }

  ValueDerivative<Scalar> rel_perm_gas(Scalar s_l) const {
    return curve(s_l, krg_knee_, Scalar(0), false, [this](Scalar se) {
      return rel_perm_gas_of_effective(se, medium_);
    });
  }

 private:
  template <typename Exact>
  ValueDerivative<Scalar> curve(Scalar s_l, Scalar knee_value, Scalar end_value,
                                bool extend_past_one, Exact exact) const {
    const Scalar dse = Scalar(1) / Scalar(medium_.mobile_range());
    const Scalar se = (s_l - Scalar(medium_.residual_liquid_sat)) * dse;
    const Scalar eps = Scalar(reg_.s_eps);
    const Scalar band = Scalar(reg_.top_band);
    if (se <= eps) return {exact(eps).value, Scalar(0)};
    if (se < Scalar(1) - band) {
      const auto v = exact(se);
      return {v.value, v.derivative * dse};
    }
    if (se >= Scalar(1) && !extend_past_one) return {end_value, Scalar(0)};
    const Scalar slope = (end_value - knee_value) / band;
    return {end_value + slope * (se - Scalar(1)), slope * dse};
  }

  MediumParams medium_;
  CurveRegularization reg_;
  Scalar pc_knee_;
  Scalar krl_knee_;
  Scalar krg_knee_;
};

}  // namespace h2flow

#endif  // H2FLOW_CONSTITUTIVE_HPP
