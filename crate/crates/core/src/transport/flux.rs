//! Two-point fluxes with full phase upwinding.

use super::props::CellProps;
use crate::dual::Scalar;

#[derive(Debug, Clone, Copy)]
pub struct FaceGeometry {
    pub area: f64,
    pub dist_left: f64,
    /// Zero for a boundary face, whose right state is a ghost at the face.
    pub dist_right: f64,
    /// `g · (z_left − z_right)`
    pub gravity_head: f64,
}

/// Fluxes from the left to the right cell.
#[derive(Debug, Clone, Copy)]
pub struct FaceFlux<D> {
    /// m³/s
    pub gas_volume: D,
    /// m³/s
    pub water_volume: D,
    /// kg/s
    pub methane: D,
    /// kg/s
    pub water: D,
    /// W, advective plus conductive
    pub energy: D,
    pub gas_from_left: bool,
    pub water_from_left: bool,
}

/// `A · a_L · a_R / (a_L d_R + a_R d_L)`; zero when either side is zero.
#[inline]
pub fn harmonic_conductance<D: Scalar>(area: f64, left: D, right: D, dist_left: f64, dist_right: f64) -> D {
    let den = left * dist_right + right * dist_left;
    if den.value() <= 0.0 || left.value() <= 0.0 || right.value() <= 0.0 {
        return D::from(0.0);
    }
    left * right * area / den
}

pub fn face_flux<D: Scalar>(
    geom: &FaceGeometry,
    left: &CellProps<D>,
    right: &CellProps<D>,
    diffusion_coefficient: f64,
) -> FaceFlux<D> {
    let trans = harmonic_conductance(geom.area, left.permeability, right.permeability, geom.dist_left, geom.dist_right);

    let gas_head = (left.gas_density + right.gas_density) * (0.5 * geom.gravity_head);
    let gas_drive = left.gas_pressure - right.gas_pressure + gas_head;
    let gas_from_left = gas_drive.value() >= 0.0;
    let gas_up = if gas_from_left { left } else { right };
    let gas_volume = trans * gas_up.gas_mobility * gas_drive;
    let gas_mass = gas_volume * gas_up.gas_density;

    let water_head = (left.water_density + right.water_density) * (0.5 * geom.gravity_head);
    let water_drive = left.water_pressure - right.water_pressure + water_head;
    let water_from_left = water_drive.value() >= 0.0;
    let water_up = if water_from_left { left } else { right };
    let water_volume = trans * water_up.water_mobility * water_drive;
    let water_mass = water_volume * water_up.water_density;

    let mut methane = gas_mass * gas_up.gas_methane + water_mass * water_up.water_methane;
    let mut water = gas_mass * (-gas_up.gas_methane + 1.0) + water_mass * (-water_up.water_methane + 1.0);

    if diffusion_coefficient > 0.0 && geom.dist_right > 0.0 {
        let coeff = geom.area * diffusion_coefficient / (geom.dist_left + geom.dist_right);
        let gas_frac = min_value(left.porosity * left.gas_saturation, right.porosity * right.gas_saturation);
        let water_frac = min_value(left.porosity * left.water_saturation, right.porosity * right.water_saturation);
        let gas_rho = (left.gas_density + right.gas_density) * 0.5;
        let j_gas = gas_frac * gas_rho * (left.gas_methane - right.gas_methane) * coeff;
        let water_rho = (left.water_density + right.water_density) * 0.5;
        let j_water = water_frac * water_rho * (left.water_methane - right.water_methane) * coeff;
        methane += j_gas + j_water;
        water -= j_gas + j_water;
    }

    let cond = harmonic_conductance(geom.area, left.conductivity, right.conductivity, geom.dist_left, geom.dist_right);
    let energy = gas_mass * gas_up.gas_enthalpy
        + water_mass * water_up.water_enthalpy
        + cond * (left.temperature - right.temperature);

    FaceFlux {
        gas_volume,
        water_volume,
        methane,
        water,
        energy,
        gas_from_left,
        water_from_left,
    }
}

#[inline]
fn min_value<D: Scalar>(a: D, b: D) -> D {
    let m = if a.value() <= b.value() { a } else { b };
    if m.value() > 0.0 {
        m
    } else {
        D::from(0.0)
    }
}
