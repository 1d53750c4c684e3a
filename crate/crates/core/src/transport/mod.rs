//! Flow and heat transport block.
//!
//! Cell-centred finite volumes on the axisymmetric grid with two-point
//! fluxes, full phase upwinding and implicit Euler in time. Unknowns are
//! cell-major `[P_g, S_w, S_h, T]`; the residual of each cell is written per
//! unit bulk volume in the order CH4, H2O, hydrate, energy. Porosity is an
//! input frozen for the duration of a solve.

pub mod flux;
mod problem;
pub mod props;

pub use flux::{face_flux, harmonic_conductance, FaceFlux, FaceGeometry};
pub use problem::{solve_transport_step, BoundaryOutflow, FixedStressSplit, TransportProblem};
pub use props::{CellInputs, CellProps};

use crate::grid::Side;
use crate::numerics::NewtonOptions;

pub const VARS_PER_CELL: usize = 4;
pub const EQUATION_NAMES: [&str; 4] = ["methane", "water", "hydrate", "energy"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowBc {
    NoFlow,
    /// Gas pressure prescribed at the face, Pa.
    Pressure(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermalBc {
    Insulated,
    /// Temperature prescribed at the face, K.
    Temperature(f64),
}

fn side_index(side: Side) -> usize {
    match side {
        Side::Bottom => 0,
        Side::Top => 1,
        Side::Axis => 2,
        Side::Outer => 3,
    }
}

/// Flow and thermal conditions on the four boundary segments.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportBoundary {
    flow: [FlowBc; 4],
    thermal: [ThermalBc; 4],
}

impl Default for TransportBoundary {
    fn default() -> Self {
        Self::closed()
    }
}

impl TransportBoundary {
    /// No flow and no heat exchange anywhere.
    pub fn closed() -> Self {
        TransportBoundary {
            flow: [FlowBc::NoFlow; 4],
            thermal: [ThermalBc::Insulated; 4],
        }
    }

    pub fn flow(&self, side: Side) -> FlowBc {
        self.flow[side_index(side)]
    }

    pub fn thermal(&self, side: Side) -> ThermalBc {
        self.thermal[side_index(side)]
    }

    pub fn set_flow(&mut self, side: Side, bc: FlowBc) {
        // the symmetry axis carries no flux
        if side != Side::Axis {
            self.flow[side_index(side)] = bc;
        }
    }

    pub fn set_thermal(&mut self, side: Side, bc: ThermalBc) {
        if side != Side::Axis {
            self.thermal[side_index(side)] = bc;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportConfig {
    /// m/s², acting along −z.
    pub gravity: f64,
    pub newton: NewtonOptions,
    pub max_saturation_change: f64,
    /// K
    pub max_temperature_change: f64,
    pub max_relative_pressure_change: f64,
    pub jacobian: JacobianMode,
    /// Mass residuals are multiplied by `dt / mass_scale`.
    pub mass_scale: f64,
    /// Energy residuals are multiplied by `dt / energy_scale`.
    pub energy_scale: f64,
    /// Upper bound kept for S_h so that the mobile pore space stays open.
    pub max_hydrate_saturation: f64,
    /// Pa
    pub min_pressure: f64,
}

impl Default for TransportConfig {
    fn default() -> Self {
        TransportConfig {
            gravity: 9.81,
            newton: NewtonOptions::default(),
            max_saturation_change: 0.2,
            max_temperature_change: 5.0,
            max_relative_pressure_change: 0.3,
            jacobian: JacobianMode::Analytic,
            mass_scale: 1000.0,
            energy_scale: 1e6,
            max_hydrate_saturation: 1.0 - 1e-6,
            min_pressure: 1e3,
        }
    }
}
