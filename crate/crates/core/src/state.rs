use crate::error::{Error, Result};

/// The six primary fields: cell-wise gas pressure, aqueous and hydrate
/// saturation, temperature and total porosity, plus vertex displacements.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimaryState {
    pub gas_pressure: Vec<f64>,
    pub water_saturation: Vec<f64>,
    pub hydrate_saturation: Vec<f64>,
    pub temperature: Vec<f64>,
    pub porosity: Vec<f64>,
    /// Shortfall of dissolved CH4 below equilibrium as a fraction of the
    /// equilibrium content, in [0, 1]; non-zero only without free gas.
    pub undersaturation: Vec<f64>,
    /// (u_z, u_r) per vertex
    pub displacement: Vec<[f64; 2]>,
}

/// Split the extended water unknown `S_w + δ` into `(S_w, δ)`.
pub fn split_water_unknown(extended: f64, hydrate_saturation: f64) -> (f64, f64) {
    let mobile = 1.0 - hydrate_saturation;
    if extended > mobile {
        (mobile, extended - mobile)
    } else {
        (extended, 0.0)
    }
}

impl PrimaryState {
    pub fn uniform(
        ncells: usize,
        nvertices: usize,
        gas_pressure: f64,
        water_saturation: f64,
        hydrate_saturation: f64,
        temperature: f64,
        porosity: f64,
    ) -> Self {
        PrimaryState {
            gas_pressure: vec![gas_pressure; ncells],
            water_saturation: vec![water_saturation; ncells],
            hydrate_saturation: vec![hydrate_saturation; ncells],
            temperature: vec![temperature; ncells],
            porosity: vec![porosity; ncells],
            undersaturation: vec![0.0; ncells],
            displacement: vec![[0.0; 2]; nvertices],
        }
    }

    pub fn num_cells(&self) -> usize {
        self.gas_pressure.len()
    }

    pub fn gas_saturation(&self, c: usize) -> f64 {
        1.0 - self.water_saturation[c] - self.hydrate_saturation[c]
    }

    /// Water saturation plus undersaturation; the transport unknown that is
    /// continuous across the disappearance of the gas phase.
    pub fn extended_water_saturation(&self, c: usize) -> f64 {
        self.water_saturation[c] + self.undersaturation[c]
    }

    /// Transport unknowns, cell-major `[P_g, S_w + δ, S_h, T]`.
    pub fn transport_unknowns(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(4 * self.num_cells());
        for c in 0..self.num_cells() {
            x.extend_from_slice(&[
                self.gas_pressure[c],
                self.extended_water_saturation(c),
                self.hydrate_saturation[c],
                self.temperature[c],
            ]);
        }
        x
    }

    pub fn set_transport_unknowns(&mut self, x: &[f64]) {
        for c in 0..self.num_cells() {
            self.gas_pressure[c] = x[4 * c];
            let (sw, deficit) = split_water_unknown(x[4 * c + 1], x[4 * c + 2]);
            self.water_saturation[c] = sw;
            self.undersaturation[c] = deficit;
            self.hydrate_saturation[c] = x[4 * c + 2];
            self.temperature[c] = x[4 * c + 3];
        }
    }

    /// Check the admissibility bounds of every cell.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_cells();
        for len in [
            self.water_saturation.len(),
            self.hydrate_saturation.len(),
            self.temperature.len(),
            self.porosity.len(),
            self.undersaturation.len(),
        ] {
            if len != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: len,
                });
            }
        }
        for c in 0..n {
            let (sw, sh) = (self.water_saturation[c], self.hydrate_saturation[c]);
            if !(sw >= 0.0 && sh >= 0.0 && sw + sh <= 1.0 + 1e-12) {
                return Err(Error::Config(format!(
                    "cell {c}: inadmissible saturations S_w = {sw}, S_h = {sh}"
                )));
            }
            let deficit = self.undersaturation[c];
            if !((0.0..=1.0).contains(&deficit) && (deficit == 0.0 || (sw + sh - 1.0).abs() <= 1e-9)) {
                return Err(Error::Config(format!(
                    "cell {c}: undersaturation {deficit} needs 0 ≤ δ ≤ 1 and no free gas"
                )));
            }
            let phi = self.porosity[c];
            if !(phi > 0.0 && phi < 1.0) {
                return Err(Error::OutOfRange {
                    quantity: "porosity",
                    value: phi,
                    min: 0.0,
                    max: 1.0,
                });
            }
            if !(self.gas_pressure[c] > 0.0) {
                return Err(Error::OutOfRange {
                    quantity: "gas pressure",
                    value: self.gas_pressure[c],
                    min: 0.0,
                    max: f64::INFINITY,
                });
            }
            if !(self.temperature[c] > 0.0) {
                return Err(Error::OutOfRange {
                    quantity: "temperature",
                    value: self.temperature[c],
                    min: 0.0,
                    max: f64::INFINITY,
                });
            }
        }
        Ok(())
    }
}

/// Primary and derived fields at one instant. Derived fields are filled by
/// recomputation from the primaries only.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldSnapshot {
    pub time: f64,
    pub gas_pressure: Vec<f64>,
    pub water_saturation: Vec<f64>,
    pub hydrate_saturation: Vec<f64>,
    pub temperature: Vec<f64>,
    pub porosity: Vec<f64>,
    pub undersaturation: Vec<f64>,
    pub displacement: Vec<[f64; 2]>,
    pub water_pressure: Vec<f64>,
    pub capillary_pressure: Vec<f64>,
    pub gas_density: Vec<f64>,
    pub permeability: Vec<f64>,
    pub young_modulus: Vec<f64>,
    /// Mean effective stress, compression positive.
    pub effective_stress: Vec<f64>,
    /// Compression positive.
    pub volumetric_strain: Vec<f64>,
}

impl FieldSnapshot {
    pub fn primary(&self) -> PrimaryState {
        PrimaryState {
            gas_pressure: self.gas_pressure.clone(),
            water_saturation: self.water_saturation.clone(),
            hydrate_saturation: self.hydrate_saturation.clone(),
            temperature: self.temperature.clone(),
            porosity: self.porosity.clone(),
            undersaturation: self.undersaturation.clone(),
            displacement: self.displacement.clone(),
        }
    }
}
