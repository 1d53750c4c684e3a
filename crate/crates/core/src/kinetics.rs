//! Kinetic hydrate formation and dissociation.
//!
//! The molar rate `ṅ = k · A_rs · (P_e − P_g)` is positive for dissociation.
//! Mass rates are per unit bulk volume; the hydrate rate closes the mass
//! balance of the two fluid components exactly.

use crate::constitutive::{MaterialDb, MOLAR_MASS_CH4, MOLAR_MASS_H2O};
use crate::dual::Scalar;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReactionMode {
    Formation,
    Dissociation,
}

/// Specific reactive surface area per unit bulk volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceAreaModel {
    /// `Γ·φ·S_w·S_g` for formation, `Γ·φ·S_h^(2/3)` for dissociation.
    SaturationScaled { gamma: f64 },
    /// Fixed area, still zero when a reactant is missing.
    Constant { area: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticParams {
    /// mol·m⁻²·Pa⁻¹·s⁻¹
    pub formation_rate: f64,
    /// mol·m⁻²·Pa⁻¹·s⁻¹
    pub dissociation_rate: f64,
    pub hydration_number: f64,
    pub surface_area: SurfaceAreaModel,
    /// J/mol
    pub heat_b1: f64,
    /// J/(mol·K)
    pub heat_b2: f64,
    /// Disables all phase change when false.
    pub enabled: bool,
}

impl Default for KineticParams {
    fn default() -> Self {
        KineticParams {
            formation_rate: 0.2e-11,
            dissociation_rate: 3.2e-10,
            hydration_number: 5.75,
            surface_area: SurfaceAreaModel::SaturationScaled {
                gamma: DEFAULT_SURFACE_SCALE,
            },
            heat_b1: 56599.0,
            heat_b2: 16.744,
            enabled: true,
        }
    }
}

/// Calibrated surface-area scale, m² per m³ of bulk volume.
pub const DEFAULT_SURFACE_SCALE: f64 = 5.5e3;

/// Per-cell phase change terms.
#[derive(Debug, Clone, Copy)]
pub struct KineticSource<D> {
    /// mol·m⁻³·s⁻¹, positive for dissociation.
    pub molar_rate: D,
    /// kg·m⁻³·s⁻¹
    pub methane: D,
    /// kg·m⁻³·s⁻¹
    pub water: D,
    /// kg·m⁻³·s⁻¹
    pub hydrate: D,
    /// W·m⁻³
    pub heat: D,
    /// m²·m⁻³
    pub surface_area: D,
}

impl<D: Scalar> KineticSource<D> {
    pub fn zero() -> Self {
        let z = D::from(0.0);
        KineticSource {
            molar_rate: z,
            methane: z,
            water: z,
            hydrate: z,
            heat: z,
            surface_area: z,
        }
    }
}

impl KineticParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.formation_rate > 0.0 && self.dissociation_rate > 0.0) {
            return Err(Error::Config("reaction rate constants must be positive".into()));
        }
        if !(self.hydration_number > 0.0) {
            return Err(Error::Config("hydration number must be positive".into()));
        }
        let scale = match self.surface_area {
            SurfaceAreaModel::SaturationScaled { gamma } => gamma,
            SurfaceAreaModel::Constant { area } => area,
        };
        if !(scale >= 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("surface area scale must be non-negative, got {scale}")));
        }
        Ok(())
    }

    pub fn hydrate_molar_mass(&self) -> f64 {
        MOLAR_MASS_CH4 + self.hydration_number * MOLAR_MASS_H2O
    }

    /// Dissociation enthalpy per mole of hydrate.
    pub fn heat_of_reaction<D: Scalar>(&self, temperature: D) -> D {
        -(temperature * self.heat_b2) + self.heat_b1
    }

    pub fn reaction_surface_area<D: Scalar>(
        &self,
        porosity: D,
        water_saturation: D,
        gas_saturation: D,
        hydrate_saturation: D,
        mode: ReactionMode,
    ) -> D {
        let zero = D::from(0.0);
        match mode {
            ReactionMode::Formation => {
                if water_saturation.value() <= 0.0 || gas_saturation.value() <= 0.0 {
                    return zero;
                }
                match self.surface_area {
                    SurfaceAreaModel::SaturationScaled { gamma } => {
                        porosity * water_saturation * gas_saturation * gamma
                    }
                    SurfaceAreaModel::Constant { area } => D::from(area),
                }
            }
            ReactionMode::Dissociation => {
                if hydrate_saturation.value() <= 0.0 {
                    return zero;
                }
                match self.surface_area {
                    SurfaceAreaModel::SaturationScaled { gamma } => {
                        porosity * hydrate_saturation.powf(2.0 / 3.0) * gamma
                    }
                    SurfaceAreaModel::Constant { area } => D::from(area),
                }
            }
        }
    }

    /// Phase change terms for one cell.
    #[allow(clippy::too_many_arguments)]
    pub fn phase_change_rates<D: Scalar>(
        &self,
        db: &MaterialDb,
        gas_pressure: D,
        temperature: D,
        water_saturation: D,
        hydrate_saturation: D,
        porosity: D,
        salinity: f64,
    ) -> KineticSource<D> {
        if !self.enabled {
            return KineticSource::zero();
        }
        let driving = db.equilibrium_pressure_unchecked(temperature, salinity) - gas_pressure;
        let (mode, rate) = if driving.value() > 0.0 {
            (ReactionMode::Dissociation, self.dissociation_rate)
        } else {
            (ReactionMode::Formation, self.formation_rate)
        };
        let gas_saturation = -water_saturation - hydrate_saturation + 1.0;
        let area = self.reaction_surface_area(porosity, water_saturation, gas_saturation, hydrate_saturation, mode);
        let molar_rate = area * driving * rate;
        let methane = molar_rate * MOLAR_MASS_CH4;
        let water = molar_rate * (self.hydration_number * MOLAR_MASS_H2O);
        let hydrate = -(methane + water);
        let heat = -(molar_rate * self.heat_of_reaction(temperature));
        KineticSource {
            molar_rate,
            methane,
            water,
            hydrate,
            heat,
            surface_area: area,
        }
    }
}
