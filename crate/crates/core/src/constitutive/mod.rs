//! Material properties and closure relations.
//!
//! Every function that enters the transport residual is generic over
//! [`Scalar`] so the same expression yields values and exact derivatives.
//! Hydraulic properties that depend on the pore structure factor into a
//! porosity part and a hydrate-saturation part.

pub mod eos;

use crate::dual::{clamp, Scalar};
use crate::error::{Error, Result};

pub use eos::{PengRobinson, GAS_CONSTANT, MOLAR_MASS_CH4, MOLAR_MASS_H2O};

/// Reference temperature of the enthalpy and internal energy scales.
pub const REFERENCE_TEMPERATURE: f64 = 273.15;

/// Which of the two calibrated parameter sets is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Formation,
    Dissociation,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Formation => "formation",
            Regime::Dissociation => "dissociation",
        }
    }

    pub fn parse(s: &str) -> Option<Regime> {
        match s.trim() {
            "formation" => Some(Regime::Formation),
            "dissociation" => Some(Regime::Dissociation),
            _ => None,
        }
    }
}

/// `E_sh = sand_modulus + hydrate_modulus · S_h^exponent`, moduli in Pa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessParams {
    pub sand_modulus: f64,
    pub hydrate_modulus: f64,
    pub exponent: f64,
}

impl StiffnessParams {
    pub fn composite_modulus(&self, hydrate_saturation: f64) -> f64 {
        let sh = hydrate_saturation.max(0.0);
        let term = if sh > 0.0 { sh.powf(self.exponent) } else { 0.0 };
        self.sand_modulus + self.hydrate_modulus * term
    }
}

/// Capillary pressure with a flag for cells that hit the dry-out cap.
#[derive(Debug, Clone, Copy)]
pub struct CapillaryPressure<D> {
    pub value: D,
    pub capped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePermeability<D> {
    pub water: D,
    pub gas: D,
}

#[derive(Debug, Clone, Copy)]
pub struct HydraulicState {
    pub capillary_pressure: f64,
    pub water_pressure: f64,
    pub relperm_gas: f64,
    pub relperm_water: f64,
    pub permeability: f64,
    pub apparent_porosity: f64,
}

/// Phase compositions as mass fractions.
#[derive(Debug, Clone, Copy)]
pub struct Composition<D> {
    /// Methane mass fraction of the gas phase.
    pub gas_methane: D,
    /// Methane mass fraction of the aqueous phase.
    pub water_methane: D,
}

/// Table of per-phase correlations evaluated at one (T, P).
#[derive(Debug, Clone, Copy)]
pub struct PhaseProperties {
    pub conductivity_gas: f64,
    pub conductivity_water: f64,
    pub conductivity_hydrate: f64,
    pub conductivity_sand: f64,
    pub cp_gas: f64,
    pub cv_gas: f64,
    pub cp_water: f64,
    pub cv_water: f64,
    pub cv_hydrate: f64,
    pub cv_sand: f64,
    pub viscosity_gas: f64,
    pub viscosity_water: f64,
    pub vapour_density: f64,
    pub gas_density: f64,
    pub water_density: f64,
    pub hydrate_density: f64,
    pub sand_density: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialDb {
    pub eos: PengRobinson,

    // hydrate stability: P_e = prefactor · exp(a2 − a3/T) · (1 + slope · w)
    pub equilibrium_prefactor: f64,
    pub equilibrium_a2: f64,
    pub equilibrium_a3: f64,
    pub salinity: f64,
    pub salinity_slope: f64,

    pub intrinsic_permeability: f64,
    pub reference_porosity: f64,
    pub bc_lambda: f64,
    pub entry_pressure: f64,
    pub residual_water_saturation: f64,
    pub residual_gas_saturation: f64,
    pub hydrate_permeability_exponent: f64,
    pub leverett_exponent: f64,
    pub capillary_cap_saturation: f64,
    pub capillary_cap_factor: f64,

    pub conductivity_hydrate: f64,
    pub conductivity_sand: f64,
    pub cp_gas_residual_factor: f64,
    pub cp_water: f64,
    pub cv_hydrate: f64,
    pub cv_sand: f64,
    pub density_water: f64,
    pub density_hydrate: f64,
    pub density_sand: f64,

    /// Henry constant at 275.15 K in Pa per mole fraction.
    pub henry_constant: f64,
    /// Van 't Hoff temperature of the Henry constant, K.
    pub henry_temperature: f64,
    /// Binary diffusion coefficient for dissolved and vapour components.
    pub diffusion_coefficient: f64,

    pub biot_coefficient: f64,
    pub poisson_ratio: f64,
    pub formation_stiffness: StiffnessParams,
    pub dissociation_stiffness: StiffnessParams,
    /// Relative stiffening per Pa of mean effective stress; 0 disables.
    pub modulus_stress_sensitivity: f64,
}

impl Default for MaterialDb {
    fn default() -> Self {
        MaterialDb {
            eos: PengRobinson::default(),
            equilibrium_prefactor: 1e3,
            equilibrium_a2: 38.98,
            equilibrium_a3: 8533.8,
            salinity: 0.0,
            salinity_slope: 0.1 / 0.035,
            intrinsic_permeability: 5e-10,
            reference_porosity: 0.35,
            bc_lambda: 1.2,
            entry_pressure: 50e3,
            residual_water_saturation: 0.0,
            residual_gas_saturation: 0.0,
            hydrate_permeability_exponent: 3.0,
            leverett_exponent: 0.5,
            capillary_cap_saturation: 0.05,
            capillary_cap_factor: 10.0,
            conductivity_hydrate: 2.1,
            conductivity_sand: 1.9,
            cp_gas_residual_factor: 1.0,
            cp_water: 4186.0,
            cv_hydrate: 2700.0,
            cv_sand: 800.0,
            density_water: 1000.0,
            density_hydrate: 900.0,
            density_sand: 2100.0,
            henry_constant: 2.9e9,
            henry_temperature: 1750.0,
            diffusion_coefficient: 0.0,
            biot_coefficient: 0.8,
            poisson_ratio: 0.15,
            formation_stiffness: StiffnessParams {
                sand_modulus: 32e6,
                hydrate_modulus: 250e6,
                exponent: 1.0,
            },
            dissociation_stiffness: StiffnessParams {
                sand_modulus: 160e6,
                hydrate_modulus: 360e6,
                exponent: 3.0,
            },
            modulus_stress_sensitivity: 0.0,
        }
    }
}

/// `x^n` that stays finite (value and derivative 0) at `x ≤ 0`.
#[inline]
fn pow_nonneg<D: Scalar>(x: D, n: f64) -> D {
    if x.value() <= 0.0 {
        D::from(0.0)
    } else {
        x.powf(n)
    }
}

impl MaterialDb {
    pub fn stiffness(&self, regime: Regime) -> &StiffnessParams {
        match regime {
            Regime::Formation => &self.formation_stiffness,
            Regime::Dissociation => &self.dissociation_stiffness,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("intrinsic_permeability", self.intrinsic_permeability),
            ("reference_porosity", self.reference_porosity),
            ("lambda_BC", self.bc_lambda),
            ("P_entry", self.entry_pressure),
            ("rho_w", self.density_water),
            ("rho_h", self.density_hydrate),
            ("rho_s", self.density_sand),
            ("henry_constant", self.henry_constant),
            ("E_s_formation", self.formation_stiffness.sand_modulus),
            ("E_s_dissociation", self.dissociation_stiffness.sand_modulus),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.reference_porosity < 1.0) {
            return Err(Error::Config("reference porosity must be below 1".into()));
        }
        if !(self.poisson_ratio > -1.0 && self.poisson_ratio < 0.5) {
            return Err(Error::Config(format!(
                "Poisson ratio {} outside (-1, 0.5)",
                self.poisson_ratio
            )));
        }
        if self.residual_water_saturation + self.residual_gas_saturation >= 1.0 {
            return Err(Error::Config("residual saturations sum to 1 or more".into()));
        }
        if !(0.0..=0.1).contains(&self.salinity) {
            return Err(Error::OutOfRange {
                quantity: "salinity",
                value: self.salinity,
                min: 0.0,
                max: 0.1,
            });
        }
        Ok(())
    }

    // ---- hydrate stability ------------------------------------------------

    /// Equilibrium pressure without range checks, for use inside Newton.
    pub fn equilibrium_pressure_unchecked<D: Scalar>(&self, temperature: D, salinity: f64) -> D {
        let arg = -(temperature.recip() * self.equilibrium_a3) + self.equilibrium_a2;
        arg.exp() * (self.equilibrium_prefactor * (1.0 + self.salinity_slope * salinity))
    }

    pub fn equilibrium_pressure(&self, temperature: f64, salinity: f64) -> Result<f64> {
        if !(temperature > 250.0 && temperature < 320.0) {
            return Err(Error::OutOfRange {
                quantity: "temperature",
                value: temperature,
                min: 250.0,
                max: 320.0,
            });
        }
        if !(0.0..=0.1).contains(&salinity) {
            return Err(Error::OutOfRange {
                quantity: "salinity",
                value: salinity,
                min: 0.0,
                max: 0.1,
            });
        }
        Ok(self.equilibrium_pressure_unchecked(temperature, salinity))
    }

    // ---- hydraulics -------------------------------------------------------

    /// Water saturation normalised to the mobile (hydrate-free) pore space
    /// and the residual saturations; not clamped.
    pub fn effective_water_saturation<D: Scalar>(&self, water_saturation: D, hydrate_saturation: D) -> D {
        let mobile = -hydrate_saturation + 1.0;
        let span = 1.0 - self.residual_water_saturation - self.residual_gas_saturation;
        (water_saturation / mobile - self.residual_water_saturation) / span
    }

    pub fn porosity_factor<D: Scalar>(&self, porosity: D) -> D {
        let phi0 = self.reference_porosity;
        let ratio = porosity / phi0;
        let solid = (-porosity + 1.0).recip() * (1.0 - phi0);
        ratio * ratio * ratio * solid * solid
    }

    pub fn hydrate_factor<D: Scalar>(&self, hydrate_saturation: D) -> D {
        pow_nonneg(-hydrate_saturation + 1.0, self.hydrate_permeability_exponent)
    }

    /// Leverett-type scaling of the capillary pressure with pore structure.
    pub fn capillary_structure_factor<D: Scalar>(&self, porosity: D, hydrate_saturation: D) -> D {
        if self.leverett_exponent == 0.0 {
            return D::from(1.0);
        }
        let open = porosity * (-hydrate_saturation + 1.0) / self.reference_porosity;
        let perm = self.porosity_factor(porosity) * self.hydrate_factor(hydrate_saturation);
        (open / perm).powf(self.leverett_exponent)
    }

    pub fn effective_permeability<D: Scalar>(&self, porosity: D, hydrate_saturation: D) -> D {
        self.porosity_factor(porosity) * self.hydrate_factor(hydrate_saturation) * self.intrinsic_permeability
    }

    pub fn apparent_porosity<D: Scalar>(&self, porosity: D, hydrate_saturation: D) -> D {
        porosity * (-hydrate_saturation + 1.0)
    }

    /// Brooks–Corey drainage curve on the effective saturation with the unit
    /// structure factor.
    pub fn brooks_corey_pressure<D: Scalar>(&self, effective_saturation: D) -> CapillaryPressure<D> {
        let lambda = self.bc_lambda;
        let s_min = self.capillary_cap_saturation;
        let p_min = self.entry_pressure * s_min.powf(-1.0 / lambda);
        let cap = self.capillary_cap_factor * p_min;
        let s = effective_saturation.value();
        if s <= 0.0 {
            CapillaryPressure {
                value: D::from(cap),
                capped: true,
            }
        } else if s < s_min {
            CapillaryPressure {
                value: effective_saturation * ((p_min - cap) / s_min) + cap,
                capped: false,
            }
        } else if s >= 1.0 {
            CapillaryPressure {
                value: D::from(self.entry_pressure),
                capped: false,
            }
        } else {
            CapillaryPressure {
                value: effective_saturation.powf(-1.0 / lambda) * self.entry_pressure,
                capped: false,
            }
        }
    }

    pub fn capillary_pressure<D: Scalar>(
        &self,
        water_saturation: D,
        porosity: D,
        hydrate_saturation: D,
    ) -> CapillaryPressure<D> {
        let swe = self.effective_water_saturation(water_saturation, hydrate_saturation);
        let base = self.brooks_corey_pressure(swe);
        CapillaryPressure {
            value: base.value * self.capillary_structure_factor(porosity, hydrate_saturation),
            capped: base.capped,
        }
    }

    /// Brooks–Corey–Burdine curves on the effective saturation.
    pub fn relative_permeabilities_effective<D: Scalar>(&self, effective_saturation: D) -> RelativePermeability<D> {
        let lambda = self.bc_lambda;
        let s = clamp(effective_saturation, 0.0, 1.0);
        let water = pow_nonneg(s, (2.0 + 3.0 * lambda) / lambda);
        let one_minus = -s + 1.0;
        let gas = one_minus * one_minus * (-pow_nonneg(s, (2.0 + lambda) / lambda) + 1.0);
        RelativePermeability { water, gas }
    }

    pub fn relative_permeabilities<D: Scalar>(&self, water_saturation: D, hydrate_saturation: D) -> RelativePermeability<D> {
        self.relative_permeabilities_effective(self.effective_water_saturation(water_saturation, hydrate_saturation))
    }

    pub fn hydraulic_state(
        &self,
        gas_pressure: f64,
        water_saturation: f64,
        hydrate_saturation: f64,
        porosity: f64,
    ) -> HydraulicState {
        let pc = self.capillary_pressure(water_saturation, porosity, hydrate_saturation).value;
        let kr = self.relative_permeabilities(water_saturation, hydrate_saturation);
        HydraulicState {
            capillary_pressure: pc,
            water_pressure: gas_pressure - pc,
            relperm_gas: kr.gas,
            relperm_water: kr.water,
            permeability: self.effective_permeability(porosity, hydrate_saturation),
            apparent_porosity: self.apparent_porosity(porosity, hydrate_saturation),
        }
    }

    // ---- phase properties -------------------------------------------------

    pub fn gas_density<D: Scalar>(&self, gas_pressure: D, temperature: D) -> Result<D> {
        self.eos.density(gas_pressure, temperature)
    }

    pub fn gas_conductivity<D: Scalar>(&self, t: D) -> D {
        ((t * 0.122e-8 - 0.699e-6) * t + 0.242e-3) * t - 0.886e-2
    }

    pub fn water_conductivity<D: Scalar>(&self, t: D) -> D {
        t.ln() * 0.3834 - 1.581
    }

    pub fn gas_cp<D: Scalar>(&self, t: D) -> D {
        ((t * -6.86e-7 + 7.9e-4) * t + 3.13) * t * self.cp_gas_residual_factor + 1238.0 * self.cp_gas_residual_factor
    }

    pub fn gas_cv<D: Scalar>(&self, t: D) -> D {
        self.gas_cp(t) + GAS_CONSTANT / MOLAR_MASS_CH4
    }

    pub fn water_cv(&self) -> f64 {
        self.cp_water + GAS_CONSTANT / MOLAR_MASS_H2O
    }

    pub fn gas_viscosity<D: Scalar>(&self, t: D) -> D {
        (t + 162.0).recip() * (10.4e-6 * (273.15 + 162.0)) * (t / 273.15).powf(1.5)
    }

    pub fn water_viscosity<D: Scalar>(&self, t: D) -> D {
        let x = t.recip() * 273.15;
        ((x * 6.74 - 4.80) * x - 1.94).exp() * 0.001792
    }

    pub fn vapour_density<D: Scalar>(&self, gas_pressure: D, t: D) -> D {
        gas_pressure / t * 0.0022
    }

    /// Henry constant for methane in water, Pa per mole fraction.
    pub fn henry<D: Scalar>(&self, t: D) -> D {
        let arg = (t.recip() - 1.0 / 275.15) * (-self.henry_temperature);
        arg.exp() * self.henry_constant
    }

    /// Water saturation vapour pressure (Antoine), Pa.
    pub fn vapour_pressure<D: Scalar>(&self, t: D) -> D {
        let celsius = t - 273.15;
        let log10_mmhg = -((celsius + 233.426).recip() * 1730.63) + 8.07131;
        (log10_mmhg * std::f64::consts::LN_10).exp() * 133.322
    }

    /// Equilibrium mass fractions of methane in the gas and aqueous phases.
    pub fn composition<D: Scalar>(&self, gas_pressure: D, t: D) -> Composition<D> {
        let pv = self.vapour_pressure(t);
        let y_water = clamp(pv / gas_pressure, 0.0, 1.0);
        let y_methane = -y_water + 1.0;
        let x_methane = clamp(y_methane * gas_pressure / self.henry(t), 0.0, 1.0);
        let mc = MOLAR_MASS_CH4;
        let mw = MOLAR_MASS_H2O;
        let gas_methane = y_methane * mc / (y_methane * mc + y_water * mw);
        let water_methane = x_methane * mc / (x_methane * mc + (-x_methane + 1.0) * mw);
        Composition {
            gas_methane,
            water_methane,
        }
    }

    /// Volume-fraction weighted conductivity of the bulk.
    pub fn bulk_conductivity<D: Scalar>(&self, porosity: D, water_saturation: D, hydrate_saturation: D, t: D) -> D {
        let sg = -water_saturation - hydrate_saturation + 1.0;
        porosity
            * (sg * self.gas_conductivity(t)
                + water_saturation * self.water_conductivity(t)
                + hydrate_saturation * self.conductivity_hydrate)
            + (-porosity + 1.0) * self.conductivity_sand
    }

    pub fn phase_properties(&self, temperature: f64, gas_pressure: f64) -> Result<PhaseProperties> {
        if !(200.0..=400.0).contains(&temperature) {
            return Err(Error::OutOfRange {
                quantity: "temperature",
                value: temperature,
                min: 200.0,
                max: 400.0,
            });
        }
        let t = temperature;
        Ok(PhaseProperties {
            conductivity_gas: self.gas_conductivity(t),
            conductivity_water: self.water_conductivity(t),
            conductivity_hydrate: self.conductivity_hydrate,
            conductivity_sand: self.conductivity_sand,
            cp_gas: self.gas_cp(t),
            cv_gas: self.gas_cv(t),
            cp_water: self.cp_water,
            cv_water: self.water_cv(),
            cv_hydrate: self.cv_hydrate,
            cv_sand: self.cv_sand,
            viscosity_gas: self.gas_viscosity(t),
            viscosity_water: self.water_viscosity(t),
            vapour_density: self.vapour_density(gas_pressure, t),
            gas_density: self.gas_density(gas_pressure, t)?,
            water_density: self.density_water,
            hydrate_density: self.density_hydrate,
            sand_density: self.density_sand,
        })
    }

    // ---- mechanics --------------------------------------------------------

    pub fn composite_young_modulus(&self, hydrate_saturation: f64, regime: Regime) -> f64 {
        self.stiffness(regime).composite_modulus(hydrate_saturation)
    }

    /// Lamé parameters (λ, μ) for a Young's modulus and the Poisson ratio.
    pub fn lame(&self, young_modulus: f64) -> (f64, f64) {
        let nu = self.poisson_ratio;
        let lambda = young_modulus * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = young_modulus / (2.0 * (1.0 + nu));
        (lambda, mu)
    }

    /// Hydrate molar mass, kg/mol, for a hydration number.
    pub fn hydrate_molar_mass(hydration_number: f64) -> f64 {
        MOLAR_MASS_CH4 + hydration_number * MOLAR_MASS_H2O
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::{gradient, seed};

    fn db() -> MaterialDb {
        MaterialDb::default()
    }

    #[test]
    fn table_constants_are_pinned() {
        let m = db();
        assert_eq!(m.conductivity_hydrate, 2.1);
        assert_eq!(m.conductivity_sand, 1.9);
        assert_eq!(m.cv_hydrate, 2700.0);
        assert_eq!(m.cv_sand, 800.0);
        assert_eq!(m.density_hydrate, 900.0);
        assert_eq!(m.density_sand, 2100.0);
        assert_eq!(m.density_water, 1000.0);
        assert_eq!(m.bc_lambda, 1.2);
        assert_eq!(m.entry_pressure, 50e3);
        assert_eq!(m.biot_coefficient, 0.8);
        assert_eq!(m.poisson_ratio, 0.15);
        assert_eq!(m.intrinsic_permeability, 5e-10);
        assert_eq!(m.cp_water, 4186.0);
    }

    #[test]
    fn equilibrium_pressure_reference_values() {
        let m = db();
        let p0 = m.equilibrium_pressure(275.15, 0.0).unwrap();
        assert!((p0 - 2.878e6).abs() < 2e3, "{p0}");
        let p1 = m.equilibrium_pressure(280.0, 0.0).unwrap();
        assert!((p1 - 4.9253e6).abs() < 100.0, "{p1}");
        assert!(p1 > p0);
        let sea = m.equilibrium_pressure(275.15, 0.035).unwrap();
        assert!((sea - 3.166e6).abs() < 2e3, "{sea}");
        let flat = MaterialDb {
            salinity_slope: 0.0,
            ..db()
        };
        assert_eq!(
            flat.equilibrium_pressure(275.15, 0.0).unwrap(),
            flat.equilibrium_pressure(275.15, 0.08).unwrap()
        );
    }

    #[test]
    fn equilibrium_pressure_range_checks() {
        let m = db();
        assert!(matches!(m.equilibrium_pressure(240.0, 0.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(m.equilibrium_pressure(275.0, 0.2), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn capillary_pressure_reference_values() {
        let m = db();
        let one = m.brooks_corey_pressure(1.0).value;
        assert!((one - 50e3).abs() < 1e-9);
        let half = m.brooks_corey_pressure(0.5).value;
        assert!((half - 89.09e3).abs() < 10.0, "{half}");
        assert!((m.capillary_structure_factor(0.35, 0.0) - 1.0).abs() < 1e-15);
        let dry = m.brooks_corey_pressure(0.0);
        assert!(dry.capped);
        let cap = 10.0 * 50e3 * 0.05f64.powf(-1.0 / 1.2);
        assert!((dry.value - cap).abs() < 1e-6);
        // continuous at the regularisation threshold
        let a = m.brooks_corey_pressure(0.05 - 1e-12).value;
        let b = m.brooks_corey_pressure(0.05 + 1e-12).value;
        assert!((a - b).abs() < 1e-3);
    }

    #[test]
    fn relative_permeability_reference_values() {
        let m = db();
        let kr = m.relative_permeabilities_effective(0.5);
        assert!((kr.water - 0.5f64.powf(14.0 / 3.0)).abs() < 1e-15);
        assert!((kr.water - 0.0394).abs() < 5e-5);
        assert!((kr.gas - 0.2106275).abs() < 1e-7, "{}", kr.gas);
        let wet = m.relative_permeabilities_effective(1.0);
        assert_eq!((wet.water, wet.gas), (1.0, 0.0));
        let dry = m.relative_permeabilities_effective(0.0);
        assert_eq!((dry.water, dry.gas), (0.0, 1.0));
    }

    #[test]
    fn permeability_reference_values() {
        let m = db();
        assert!((m.effective_permeability(0.35, 0.0) - 5e-10).abs() < 1e-24);
        let k = m.effective_permeability(0.35, 0.39);
        assert!((k - 5e-10 * 0.61f64.powi(3)).abs() < 1e-22);
        assert!((k - 1.13e-10).abs() < 0.01e-10);
        assert_eq!(m.effective_permeability(0.35, 1.0), 0.0);
    }

    #[test]
    fn apparent_porosity_values() {
        let m = db();
        assert_eq!(m.apparent_porosity(0.35, 0.0), 0.35);
        assert!((m.apparent_porosity(0.35, 0.39) - 0.2135).abs() < 1e-15);
        assert_eq!(m.apparent_porosity(0.35, 1.0), 0.0);
    }

    #[test]
    fn phase_correlations() {
        let m = db();
        let p = m.phase_properties(275.15, 10e6).unwrap();
        assert!((p.conductivity_water - 0.5726791).abs() < 1e-7);
        assert!((p.viscosity_water - 1.6830e-3).abs() < 1e-7, "{}", p.viscosity_water);
        assert!((p.gas_density - 91.14).abs() < 0.05);
        assert!((p.vapour_density - 0.0022 * 10e6 / 275.15).abs() < 1e-12);
        let mu_g = 10.4e-6 * (435.15 / 437.15) * (275.15f64 / 273.15).powf(1.5);
        assert!((p.viscosity_gas - mu_g).abs() < 1e-18);
    }

    #[test]
    fn stiffness_anchors() {
        let m = db();
        let f = m.composite_young_modulus(0.4, Regime::Formation);
        assert!((f - 132e6).abs() < 1e-6);
        let d = m.composite_young_modulus(0.4, Regime::Dissociation);
        assert!((d - 183.04e6).abs() < 1e-3);
        assert_eq!(m.composite_young_modulus(0.0, Regime::Dissociation), 160e6);
        assert_eq!(m.composite_young_modulus(0.0, Regime::Formation), 32e6);
    }

    #[test]
    fn dual_capillary_pressure_matches_central_difference() {
        let m = db();
        let (sw, phi, sh) = (0.3, 0.34, 0.2);
        let pc = m.capillary_pressure(seed(sw, 1), crate::dual::CellDual::from(phi), seed(sh, 2)).value;
        let g = gradient(&pc);
        let h = 1e-7;
        let d_sw = (m.capillary_pressure(sw + h, phi, sh).value - m.capillary_pressure(sw - h, phi, sh).value) / (2.0 * h);
        let d_sh = (m.capillary_pressure(sw, phi, sh + h).value - m.capillary_pressure(sw, phi, sh - h).value) / (2.0 * h);
        assert!((g[1] - d_sw).abs() / d_sw.abs() < 1e-6);
        assert!((g[2] - d_sh).abs() / d_sh.abs() < 1e-6);
    }

    #[test]
    fn composition_is_dilute() {
        let m = db();
        let c = m.composition(12.5e6, 275.15);
        assert!(c.gas_methane > 0.9999 && c.gas_methane < 1.0);
        // x ≈ P/H = 12.5e6 / 2.9e9
        let x = (12.5e6 - m.vapour_pressure(275.15)) / 2.9e9;
        let xm = x * MOLAR_MASS_CH4 / (x * MOLAR_MASS_CH4 + (1.0 - x) * MOLAR_MASS_H2O);
        assert!((c.water_methane - xm).abs() < 1e-12);
        let pv = m.vapour_pressure(275.15);
        assert!((pv - 705.0).abs() < 10.0, "{pv}");
    }
}
