use crate::constitutive::{MaterialDb, REFERENCE_TEMPERATURE};
use crate::dual::{lift, CellDual, PairDual, Scalar};
use crate::error::{Error, Result};
use crate::kinetics::{KineticParams, KineticSource};

/// Everything a cell contributes to storage, sources and face fluxes.
#[derive(Debug, Clone, Copy)]
pub struct CellProps<D> {
    pub gas_pressure: D,
    pub water_pressure: D,
    pub water_saturation: D,
    pub gas_saturation: D,
    pub hydrate_saturation: D,
    pub temperature: D,
    pub porosity: D,
    pub gas_density: D,
    pub water_density: D,
    pub gas_mobility: D,
    pub water_mobility: D,
    pub gas_methane: D,
    pub water_methane: D,
    pub gas_enthalpy: D,
    pub water_enthalpy: D,
    pub permeability: D,
    pub conductivity: D,
    pub capped: bool,
}

/// Primary unknowns of one cell plus the frozen porosity. `water_saturation`
/// is the extended unknown `S_w + δ`.
#[derive(Debug, Clone, Copy)]
pub struct CellInputs<D> {
    pub gas_pressure: D,
    pub water_saturation: D,
    pub hydrate_saturation: D,
    pub temperature: D,
    pub porosity: D,
}

impl CellInputs<f64> {
    pub fn from_slice(x: &[f64], porosity: f64) -> Self {
        CellInputs {
            gas_pressure: x[0],
            water_saturation: x[1],
            hydrate_saturation: x[2],
            temperature: x[3],
            porosity,
        }
    }

    pub fn seeded(&self) -> CellInputs<CellDual> {
        CellInputs {
            gas_pressure: crate::dual::seed(self.gas_pressure, 0),
            water_saturation: crate::dual::seed(self.water_saturation, 1),
            hydrate_saturation: crate::dual::seed(self.hydrate_saturation, 2),
            temperature: crate::dual::seed(self.temperature, 3),
            porosity: CellDual::from(self.porosity),
        }
    }
}

impl<D: Scalar> CellProps<D> {
    pub fn evaluate(db: &MaterialDb, input: &CellInputs<D>) -> Result<Self> {
        let t = input.temperature;
        if !(t.value() > 200.0 && t.value() < 400.0) {
            return Err(Error::OutOfRange {
                quantity: "temperature",
                value: t.value(),
                min: 200.0,
                max: 400.0,
            });
        }
        let phi = input.porosity;
        if !(phi.value() > 0.0 && phi.value() < 1.0) {
            return Err(Error::OutOfRange {
                quantity: "porosity",
                value: phi.value(),
                min: 0.0,
                max: 1.0,
            });
        }
        let sh = input.hydrate_saturation;
        // Beyond the mobile pore space the water unknown measures how far
        // the dissolved CH4 falls short of equilibrium.
        let mobile = -sh + 1.0;
        let (sw, deficit) = if input.water_saturation.value() > mobile.value() {
            (mobile, input.water_saturation - mobile)
        } else {
            (input.water_saturation, D::from(0.0))
        };
        let pg = input.gas_pressure;
        let pc = db.capillary_pressure(sw, phi, sh);
        let kr = db.relative_permeabilities(sw, sh);
        let gas_density = db.gas_density(pg, t)?;
        let comp = db.composition(pg, t);
        let dt_ref = t - REFERENCE_TEMPERATURE;
        Ok(CellProps {
            gas_pressure: pg,
            water_pressure: pg - pc.value,
            water_saturation: sw,
            gas_saturation: -sw - sh + 1.0,
            hydrate_saturation: sh,
            temperature: t,
            porosity: phi,
            gas_density,
            water_density: D::from(db.density_water),
            gas_mobility: kr.gas / db.gas_viscosity(t),
            water_mobility: kr.water / db.water_viscosity(t),
            gas_methane: comp.gas_methane,
            water_methane: comp.water_methane * (-deficit + 1.0),
            gas_enthalpy: db.gas_cp(t) * dt_ref,
            water_enthalpy: dt_ref * db.cp_water,
            permeability: db.effective_permeability(phi, sh),
            conductivity: db.bulk_conductivity(phi, sw, sh, t),
            capped: pc.capped,
        })
    }

    /// Conserved quantities per unit bulk volume: CH4, H2O, hydrate mass and
    /// internal energy.
    pub fn storage(&self, db: &MaterialDb) -> [D; 4] {
        let phi = self.porosity;
        let gas = phi * self.gas_saturation * self.gas_density;
        let water = phi * self.water_saturation * self.water_density;
        let hydrate = phi * self.hydrate_saturation * db.density_hydrate;
        let methane = gas * self.gas_methane + water * self.water_methane;
        let h2o = gas * (-self.gas_methane + 1.0) + water * (-self.water_methane + 1.0);
        let dt_ref = self.temperature - REFERENCE_TEMPERATURE;
        let fluid_heat = gas * db.gas_cv(self.temperature) + water * db.water_cv() + hydrate * db.cv_hydrate;
        let solid_heat = (-phi + 1.0) * (db.density_sand * db.cv_sand);
        let energy = (fluid_heat + solid_heat) * dt_ref;
        [methane, h2o, hydrate, energy]
    }

    pub fn kinetic_source(&self, db: &MaterialDb, kinetics: &KineticParams) -> KineticSource<D> {
        kinetics.phase_change_rates(
            db,
            self.gas_pressure,
            self.temperature,
            self.water_saturation,
            self.hydrate_saturation,
            self.porosity,
            db.salinity,
        )
    }
}

impl CellProps<CellDual> {
    pub fn lift(&self, offset: usize) -> CellProps<PairDual> {
        let l = |x: &CellDual| lift(x, offset);
        CellProps {
            gas_pressure: l(&self.gas_pressure),
            water_pressure: l(&self.water_pressure),
            water_saturation: l(&self.water_saturation),
            gas_saturation: l(&self.gas_saturation),
            hydrate_saturation: l(&self.hydrate_saturation),
            temperature: l(&self.temperature),
            porosity: l(&self.porosity),
            gas_density: l(&self.gas_density),
            water_density: l(&self.water_density),
            gas_mobility: l(&self.gas_mobility),
            water_mobility: l(&self.water_mobility),
            gas_methane: l(&self.gas_methane),
            water_methane: l(&self.water_methane),
            gas_enthalpy: l(&self.gas_enthalpy),
            water_enthalpy: l(&self.water_enthalpy),
            permeability: l(&self.permeability),
            conductivity: l(&self.conductivity),
            capped: self.capped,
        }
    }
}
