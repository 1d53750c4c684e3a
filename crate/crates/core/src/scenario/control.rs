//! Boundary-condition controllers mimicking the experimental control loops.
//!
//! Controllers are evaluated once per step at the start of the step from
//! the last committed state (explicit, lagged by one step).

use crate::error::{Error, Result};
use crate::geomech::MechBoundary;
use crate::grid::{AxiGrid, Side};
use crate::transport::{FlowBc, ThermalBc, TransportBoundary};

/// Piecewise-constant, right-continuous pressure schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureSchedule {
    /// Value before the first breakpoint, Pa.
    pub initial: f64,
    /// `(t_i, P_i)` with strictly increasing `t_i`.
    pub steps: Vec<(f64, f64)>,
}

impl PressureSchedule {
    pub fn new(initial: f64, steps: Vec<(f64, f64)>) -> Result<Self> {
        let s = PressureSchedule { initial, steps };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(value: f64) -> Self {
        PressureSchedule {
            initial: value,
            steps: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.initial > 0.0) {
            return Err(Error::Config(format!("schedule initial pressure must be positive, got {}", self.initial)));
        }
        for w in self.steps.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Config(format!(
                    "back-pressure schedule is not sorted: t = {} follows t = {}",
                    w[1].0, w[0].0
                )));
            }
        }
        if let Some(&(t, p)) = self.steps.iter().find(|(t, p)| !(t.is_finite() && *p > 0.0)) {
            return Err(Error::Config(format!("invalid schedule entry ({t}, {p})")));
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> f64 {
        let k = self.steps.partition_point(|&(ti, _)| ti <= t);
        if k == 0 {
            self.initial
        } else {
            self.steps[k - 1].1
        }
    }

    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|&(t, _)| t)
    }

    /// Smallest value ever commanded.
    pub fn minimum(&self) -> f64 {
        self.steps.iter().map(|&(_, p)| p).fold(self.initial, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowControl {
    NoFlow,
    /// Gas pressure prescribed at the outlet faces.
    BackPressure(PressureSchedule),
}

/// Isotropic confining stress control; the bottom platen is a roller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StressControl {
    /// Total stress follows the probed gas pressure plus a fixed offset.
    EffectiveStressFollower { target_delta: f64 },
    ConstantTotal { stress: f64 },
}

impl StressControl {
    /// Commanded total stress for a probed gas pressure, Pa.
    pub fn total_stress(&self, probe_pressure: f64) -> f64 {
        match *self {
            StressControl::EffectiveStressFollower { target_delta } => probe_pressure + target_delta,
            StressControl::ConstantTotal { stress } => stress,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Controls {
    pub stress: StressControl,
    pub flow_bottom: FlowControl,
    pub flow_top: FlowControl,
    pub flow_outer: FlowControl,
    pub thermal_bottom: ThermalBc,
    pub thermal_top: ThermalBc,
    pub thermal_outer: ThermalBc,
}

impl Default for Controls {
    fn default() -> Self {
        Controls {
            stress: StressControl::EffectiveStressFollower { target_delta: 0.0 },
            flow_bottom: FlowControl::NoFlow,
            flow_top: FlowControl::NoFlow,
            flow_outer: FlowControl::NoFlow,
            thermal_bottom: ThermalBc::Insulated,
            thermal_top: ThermalBc::Insulated,
            thermal_outer: ThermalBc::Insulated,
        }
    }
}

/// Controller outputs at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutputs {
    pub transport: TransportBoundary,
    pub mechanics: MechBoundary,
    /// Total confining stress, Pa.
    pub total_stress: f64,
    /// Outlet pressure command, Pa; `None` for a closed sample.
    pub outlet_pressure: Option<f64>,
    /// Gas pressure seen by the stress probe, Pa.
    pub probe_pressure: f64,
}

impl Controls {
    pub fn flow(&self, side: Side) -> Option<&FlowControl> {
        match side {
            Side::Bottom => Some(&self.flow_bottom),
            Side::Top => Some(&self.flow_top),
            Side::Outer => Some(&self.flow_outer),
            Side::Axis => None,
        }
    }

    pub fn flow_mut(&mut self, side: Side) -> &mut FlowControl {
        match side {
            Side::Bottom => &mut self.flow_bottom,
            Side::Top => &mut self.flow_top,
            Side::Outer | Side::Axis => &mut self.flow_outer,
        }
    }

    /// Thermal condition of a side; the axis is always insulated.
    pub fn thermal(&self, side: Side) -> ThermalBc {
        match side {
            Side::Bottom => self.thermal_bottom,
            Side::Top => self.thermal_top,
            Side::Outer => self.thermal_outer,
            Side::Axis => ThermalBc::Insulated,
        }
    }

    pub fn thermal_mut(&mut self, side: Side) -> &mut ThermalBc {
        match side {
            Side::Bottom => &mut self.thermal_bottom,
            Side::Top => &mut self.thermal_top,
            Side::Outer | Side::Axis => &mut self.thermal_outer,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for side in [Side::Bottom, Side::Top, Side::Outer] {
            if let Some(FlowControl::BackPressure(s)) = self.flow(side) {
                s.validate()?;
            }
        }
        for t in [self.thermal_bottom, self.thermal_top, self.thermal_outer] {
            if let ThermalBc::Temperature(v) = t {
                if !(v > 0.0) {
                    return Err(Error::Config(format!("boundary temperature must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    /// Probe pressure: mean gas pressure of the top boundary cells.
    pub fn probe(grid: &AxiGrid, gas_pressure: &[f64]) -> f64 {
        let cells = grid.boundary_cells(Side::Top);
        let (num, den) = cells
            .iter()
            .fold((0.0, 0.0), |(n, d), &c| (n + gas_pressure[c] * grid.cell_volumes[c], d + grid.cell_volumes[c]));
        num / den
    }

    pub fn evaluate(&self, t: f64, grid: &AxiGrid, gas_pressure: &[f64]) -> ControlOutputs {
        let mut transport = TransportBoundary::closed();
        let mut outlet_pressure = None;
        for side in [Side::Bottom, Side::Top, Side::Outer] {
            if let Some(FlowControl::BackPressure(s)) = self.flow(side) {
                let p = s.at(t);
                transport.set_flow(side, FlowBc::Pressure(p));
                outlet_pressure.get_or_insert(p);
            }
        }
        transport.set_thermal(Side::Bottom, self.thermal_bottom);
        transport.set_thermal(Side::Top, self.thermal_top);
        transport.set_thermal(Side::Outer, self.thermal_outer);
        let probe_pressure = Self::probe(grid, gas_pressure);
        let total_stress = self.stress.total_stress(probe_pressure);
        ControlOutputs {
            transport,
            mechanics: MechBoundary::isotropic(total_stress),
            total_stress,
            outlet_pressure,
            probe_pressure,
        }
    }

    /// Times at which a commanded value jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = [Side::Bottom, Side::Top, Side::Outer]
            .iter()
            .filter_map(|&s| match self.flow(s) {
                Some(FlowControl::BackPressure(p)) => Some(p.breakpoints().collect::<Vec<_>>()),
                _ => None,
            })
            .flatten()
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}
