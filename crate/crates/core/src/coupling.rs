//! Sand mass balance, the block Gauss–Seidel loop and the time loop.
//!
//! Within a step the transport block sees the mechanics only through the
//! total porosity. The porosity committed with a step is the one the last
//! transport solve used, so fluid mass bookkeeping stays exact.

use crate::constitutive::{MaterialDb, Regime, GAS_CONSTANT, MOLAR_MASS_CH4};
use crate::error::{Error, Result};
use crate::geomech::{
    effective_pore_pressure, element_young_moduli, solve_increment, GeomechConfig, MechFormulation, MechLoads, MechState,
};
use crate::grid::{AxiGrid, Side};
use crate::kinetics::KineticParams;
use crate::numerics::DirectSolver;
use crate::scenario::control::{ControlOutputs, Controls};
use crate::state::{split_water_unknown, FieldSnapshot, PrimaryState};
use crate::transport::{
    solve_transport_step, CellInputs, CellProps, FixedStressSplit, TransportBoundary, TransportConfig, TransportProblem,
};

/// Largest incremental volumetric strain accepted by the porosity update.
pub const MAX_STRAIN_INCREMENT: f64 = 0.05;

/// Standard conditions for reported gas volumes: 0 °C, 1 atm.
pub const STANDARD_TEMPERATURE: f64 = 273.15;
pub const STANDARD_PRESSURE: f64 = 101_325.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockOrder {
    /// Transport, mechanics, porosity.
    FlowFirst,
    /// Mechanics, porosity, transport.
    MechanicsFirst,
}

impl BlockOrder {
    pub fn name(self) -> &'static str {
        match self {
            BlockOrder::FlowFirst => "flow-first",
            BlockOrder::MechanicsFirst => "mechanics-first",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "flow-first" => Some(BlockOrder::FlowFirst),
            "mechanics-first" => Some(BlockOrder::MechanicsFirst),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConfig {
    /// Relative change of φ between outer iterations.
    pub porosity_tol: f64,
    /// Change of ε_v between outer iterations relative to max |ε_v|.
    pub strain_tol: f64,
    pub max_outer: usize,
    /// s
    pub dt_max: f64,
    /// s
    pub dt_min: f64,
    /// s
    pub dt_initial: f64,
    /// Growth factor after an accepted step.
    pub dt_growth: f64,
    /// Under-relaxation ω of the porosity update, in (0, 1].
    pub relaxation: f64,
    /// Let porosity respond to pressure inside the flow solve with the
    /// drained fixed-stress compressibility.
    pub fixed_stress: bool,
    pub order: BlockOrder,
    pub regime: Regime,
    pub transport: TransportConfig,
    pub geomech: GeomechConfig,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig {
            porosity_tol: 1e-6,
            strain_tol: 1e-6,
            max_outer: 20,
            dt_max: 120.0,
            dt_min: 1e-3,
            dt_initial: 1.0,
            dt_growth: 2.0,
            relaxation: 1.0,
            fixed_stress: true,
            order: BlockOrder::FlowFirst,
            regime: Regime::Formation,
            transport: TransportConfig::default(),
            geomech: GeomechConfig::default(),
        }
    }
}

impl CouplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.porosity_tol > 0.0 && self.strain_tol > 0.0) {
            return Err(Error::Config("outer tolerances must be positive".into()));
        }
        if self.max_outer == 0 {
            return Err(Error::Config("max outer iterations must be at least 1".into()));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max && self.dt_max.is_finite()) {
            return Err(Error::Config(format!(
                "time step bounds must satisfy 0 < dt_min <= dt_max, got {} and {}",
                self.dt_min, self.dt_max
            )));
        }
        if !(self.dt_initial > 0.0) {
            return Err(Error::Config("initial time step must be positive".into()));
        }
        if !(self.dt_growth >= 1.0) {
            return Err(Error::Config("time step growth factor must be at least 1".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::Config(format!("relaxation must lie in (0, 1], got {}", self.relaxation)));
        }
        self.transport.newton.validate()
    }
}

/// Closed-form sand mass balance for a compression-positive strain change.
pub fn update_total_porosity(phi_old: f64, eps_v_old: f64, eps_v_new: f64) -> Result<f64> {
    let d = eps_v_new - eps_v_old;
    if !(d.abs() < MAX_STRAIN_INCREMENT) {
        return Err(Error::StepRejected(format!(
            "volumetric strain increment {d:.3e} exceeds the small-strain guard"
        )));
    }
    let phi = 1.0 - (1.0 - phi_old) * d.exp();
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::StepRejected(format!("porosity left (0, 1): {phi}")));
    }
    Ok(phi)
}

/// Committed simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// s
    pub time: f64,
    pub primary: PrimaryState,
    pub mech: MechState,
    /// Cumulative CH4 mass leaving through pressure-controlled faces, kg.
    pub produced_methane: f64,
    /// kg
    pub produced_water: f64,
    /// CH4 inventory (fluid plus hydrate-bound) at t = 0, kg.
    pub initial_methane: f64,
    pub steps: usize,
    /// Controller outputs applied during the last accepted step.
    pub total_stress: f64,
    pub outlet_pressure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    /// End of the step, s.
    pub time: f64,
    pub dt: f64,
    pub outer_iterations: usize,
    /// Transport Newton iterations of every outer iteration.
    pub newton_iterations: Vec<usize>,
    /// Largest transfer-variable change after each outer iteration.
    pub outer_changes: Vec<f64>,
    pub converged: bool,
    /// Failed attempts at larger steps before this one was accepted.
    pub retries: usize,
    pub damped_steps: usize,
    pub clip_events: usize,
    /// kg
    pub methane_inventory: f64,
    /// kg
    pub produced_methane: f64,
    /// (inventory + produced − initial) / initial
    pub methane_balance_error: f64,
    /// Pa
    pub total_stress: f64,
    /// Pa
    pub outlet_pressure: Option<f64>,
}

impl StepReport {
    pub fn total_newton_iterations(&self) -> usize {
        self.newton_iterations.iter().sum()
    }
}

/// One row of the domain-averaged time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRow {
    /// s
    pub time: f64,
    /// Pa
    pub gas_pressure: f64,
    pub water_saturation: f64,
    pub hydrate_saturation: f64,
    /// K
    pub temperature: f64,
    /// K
    pub min_temperature: f64,
    pub porosity: f64,
    /// Compression positive.
    pub volumetric_strain: f64,
    /// mol
    pub produced_gas_mol: f64,
    /// m³ at 0 °C and 1 atm
    pub produced_gas_std_volume: f64,
    /// Mean gas pressure of the outlet (top) cells, Pa.
    pub outlet_gas_pressure: f64,
    /// Pa
    pub young_modulus: f64,
    /// mol of hydrate in the sample.
    pub hydrate_moles: f64,
    /// Net hydrate dissociation rate of the sample, mol/s.
    pub dissociation_rate: f64,
    /// Pa
    pub total_stress: f64,
    /// Pa; NaN for a closed sample.
    pub outlet_pressure: f64,
}

/// Which outputs the time loop keeps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputPlan {
    /// Time-series spacing, s; 0 records every accepted step.
    pub timeseries_interval: f64,
    /// Snapshot times, s. Steps are shortened to hit them exactly.
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub time_series: Vec<TimeSeriesRow>,
    pub steps: Vec<StepReport>,
    pub snapshots: Vec<FieldSnapshot>,
    pub final_state: SimState,
}

/// CH4 in fluids plus hydrate-bound CH4, kg.
pub fn methane_inventory(grid: &AxiGrid, db: &MaterialDb, kinetics: &KineticParams, primary: &PrimaryState) -> Result<f64> {
    let mh = kinetics.hydrate_molar_mass();
    let x = primary.transport_unknowns();
    let mut total = 0.0;
    for c in 0..grid.num_cells() {
        let input = CellInputs::from_slice(&x[4 * c..4 * c + 4], primary.porosity[c]);
        let s = CellProps::evaluate(db, &input)?.storage(db);
        total += grid.cell_volumes[c] * (s[0] + s[2] * MOLAR_MASS_CH4 / mh);
    }
    Ok(total)
}

/// The coupled model with its committed state.
pub struct Simulation {
    pub grid: AxiGrid,
    pub db: MaterialDb,
    pub kinetics: KineticParams,
    pub config: CouplingConfig,
    pub controls: Controls,
    state: SimState,
    /// Initial equilibrium the secant response is measured from.
    mech_reference: MechState,
    dt_next: f64,
    transport_solver: DirectSolver,
    mech_solver: DirectSolver,
}

struct Iterate {
    x: Vec<f64>,
    mech: MechState,
    eps: Vec<f64>,
}

impl Simulation {
    pub fn new(
        grid: AxiGrid,
        db: MaterialDb,
        kinetics: KineticParams,
        config: CouplingConfig,
        controls: Controls,
        initial: PrimaryState,
    ) -> Result<Self> {
        db.validate()?;
        kinetics.validate()?;
        config.validate()?;
        controls.validate()?;
        initial.validate()?;
        if initial.num_cells() != grid.num_cells() {
            return Err(Error::Dimension {
                expected: grid.num_cells(),
                actual: initial.num_cells(),
            });
        }
        let ctrl = controls.evaluate(0.0, &grid, &initial.gas_pressure);
        let pore = pore_pressures(&db, &config.geomech, &initial.transport_unknowns(), &initial.porosity);
        let density = bulk_density(&db, &config.geomech, &initial)?;
        let mut mech = MechState::initial(&grid, &db, ctrl.mechanics.clone(), pore, density)?;
        mech.displacement = initial.displacement.clone();
        let initial_methane = methane_inventory(&grid, &db, &kinetics, &initial)?;
        let state = SimState {
            time: 0.0,
            primary: initial,
            mech,
            produced_methane: 0.0,
            produced_water: 0.0,
            initial_methane,
            steps: 0,
            total_stress: ctrl.total_stress,
            outlet_pressure: ctrl.outlet_pressure,
        };
        Ok(Simulation {
            mech_reference: state.mech.clone(),
            dt_next: config.dt_initial.min(config.dt_max),
            grid,
            db,
            kinetics,
            config,
            controls,
            state,
            transport_solver: DirectSolver::new(),
            mech_solver: DirectSolver::new(),
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    /// Solver counters for the transport and mechanics blocks.
    pub fn solvers(&self) -> (&DirectSolver, &DirectSolver) {
        (&self.transport_solver, &self.mech_solver)
    }

    fn mech_loads(&self, x: &[f64], porosity: &[f64], ctrl: &ControlOutputs) -> Result<MechLoads> {
        let n = self.grid.num_cells();
        let sh: Vec<f64> = (0..n).map(|c| x[4 * c + 2]).collect();
        let mean = self.state.mech.mean_effective_stress();
        let mut primary = self.state.primary.clone();
        primary.set_transport_unknowns(x);
        primary.porosity = porosity.to_vec();
        Ok(MechLoads {
            pore_pressure: pore_pressures(&self.db, &self.config.geomech, x, porosity),
            young_modulus: element_young_moduli(&self.db, self.config.regime, &sh, Some(&mean)),
            bulk_density: bulk_density(&self.db, &self.config.geomech, &primary)?,
            boundary: ctrl.mechanics.clone(),
        })
    }

    fn solve_mechanics(&mut self, x: &[f64], porosity: &[f64], ctrl: &ControlOutputs) -> Result<(MechState, Vec<f64>)> {
        let loads = self.mech_loads(x, porosity, ctrl)?;
        let base = match self.config.geomech.formulation {
            MechFormulation::Secant => &self.mech_reference,
            MechFormulation::Incremental => &self.state.mech,
        };
        let mech = solve_increment(&self.grid, &self.db, &self.config.geomech, base, &loads, &mut self.mech_solver)?;
        let eps = mech.volumetric_strains();
        Ok((mech, eps))
    }

    fn new_porosity(&self, eps: &[f64], current: &[f64]) -> Result<Vec<f64>> {
        let old = &self.state.primary.porosity;
        let eps_old = self.state.mech.volumetric_strains();
        let w = self.config.relaxation;
        (0..old.len())
            .map(|c| {
                let phi = update_total_porosity(old[c], eps_old[c], eps[c])?;
                Ok(w * phi + (1.0 - w) * current[c])
            })
            .collect()
    }

    /// Fixed-stress porosity compressibility `α(1−φ)/K_dr` per cell.
    fn split_compressibility(&self, porosity: &[f64]) -> Vec<f64> {
        let p = &self.state.primary;
        let mean = self.state.mech.mean_effective_stress();
        let young = element_young_moduli(&self.db, self.config.regime, &p.hydrate_saturation, Some(&mean));
        let nu = self.db.poisson_ratio;
        young
            .iter()
            .zip(porosity)
            .map(|(e, phi)| self.db.biot_coefficient * (1.0 - phi) * 3.0 * (1.0 - 2.0 * nu) / e)
            .collect()
    }

    /// Drained porosity response to the commanded confining stress change,
    /// used as the first outer iterate.
    fn predicted_porosity(&self, total_stress: f64) -> Vec<f64> {
        let committed = &self.state.primary.porosity;
        if !self.config.fixed_stress {
            return committed.clone();
        }
        let d_sigma = total_stress - self.state.total_stress;
        let alpha = self.db.biot_coefficient;
        self.split_compressibility(committed)
            .iter()
            .zip(committed)
            .map(|(b, phi)| phi - b / alpha * d_sigma)
            .collect()
    }

    /// Returns the new unknowns and the porosity the solve ended up using.
    fn solve_transport(
        &mut self,
        boundary: &TransportBoundary,
        porosity: &[f64],
        x0: Vec<f64>,
        dt: f64,
        report: &mut StepReport,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let x_old = self.state.primary.transport_unknowns();
        let split = self.config.fixed_stress.then(|| FixedStressSplit {
            compressibility: self.split_compressibility(porosity),
            reference_pressure: (0..porosity.len()).map(|c| x0[4 * c]).collect(),
        });
        let mut problem = TransportProblem::new(
            &self.grid,
            &self.db,
            &self.kinetics,
            &self.config.transport,
            boundary,
            &x_old,
            &self.state.primary.porosity,
            porosity,
            dt,
        )?;
        if let Some(split) = split {
            problem = problem.with_fixed_stress(split)?;
        }
        let (x, rep) = solve_transport_step(&mut problem, x0, &mut self.transport_solver)?;
        report.newton_iterations.push(rep.iterations);
        report.damped_steps += rep.damped_steps;
        report.clip_events += rep.clip_events;
        let used = problem.effective_porosity(&x);
        Ok((x, used))
    }

    /// One attempt at a step of length `dt`; commits on success. A porosity
    /// guess other than the committed field can seed the outer loop.
    pub fn try_step(&mut self, dt: f64, porosity_guess: Option<&[f64]>) -> Result<StepReport> {
        let t0 = self.state.time;
        let ctrl = self.controls.evaluate(t0, &self.grid, &self.state.primary.gas_pressure);
        let mut report = StepReport {
            step: self.state.steps + 1,
            time: t0 + dt,
            dt,
            outer_iterations: 0,
            newton_iterations: Vec::new(),
            outer_changes: Vec::new(),
            converged: false,
            retries: 0,
            damped_steps: 0,
            clip_events: 0,
            methane_inventory: 0.0,
            produced_methane: 0.0,
            methane_balance_error: 0.0,
            total_stress: ctrl.total_stress,
            outlet_pressure: ctrl.outlet_pressure,
        };
        let mut phi = match porosity_guess {
            Some(p) => p.to_vec(),
            None => self.predicted_porosity(ctrl.total_stress),
        };
        let mut x = self.state.primary.transport_unknowns();
        let mut eps_prev = self.state.mech.volumetric_strains();
        let mut accepted: Option<(Iterate, Vec<f64>)> = None;

        for _ in 0..self.config.max_outer {
            report.outer_iterations += 1;
            let (iterate, phi_used, phi_next) = match self.config.order {
                BlockOrder::FlowFirst => {
                    let (x_new, used) = self.solve_transport(&ctrl.transport, &phi, x.clone(), dt, &mut report)?;
                    let (mech, eps) = self.solve_mechanics(&x_new, &used, &ctrl)?;
                    let phi_new = self.new_porosity(&eps, &used)?;
                    (Iterate { x: x_new, mech, eps }, used, phi_new)
                }
                BlockOrder::MechanicsFirst => {
                    let (mech, eps) = self.solve_mechanics(&x, &phi, &ctrl)?;
                    let phi_new = self.new_porosity(&eps, &phi)?;
                    let (x_new, used) = self.solve_transport(&ctrl.transport, &phi_new, x.clone(), dt, &mut report)?;
                    (Iterate { x: x_new, mech, eps }, used.clone(), used)
                }
            };
            let d_phi = phi_next
                .iter()
                .zip(&phi_used)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / b.abs()));
            let eps_scale = iterate.eps.iter().fold(1e-12f64, |m, e| m.max(e.abs()));
            let d_eps = iterate
                .eps
                .iter()
                .zip(&eps_prev)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / eps_scale));
            let change = (d_phi / self.config.porosity_tol).max(d_eps / self.config.strain_tol);
            report.outer_changes.push(d_phi.max(d_eps));
            log::trace!("outer {}: dphi {d_phi:.3e} deps {d_eps:.3e}", report.outer_iterations);
            x = iterate.x.clone();
            eps_prev = iterate.eps.clone();
            phi = phi_next;
            if change <= 1.0 {
                accepted = Some((iterate, phi_used));
                break;
            }
        }
        let Some((iterate, phi_used)) = accepted else {
            return Err(Error::StepRejected(format!(
                "outer loop not converged after {} iterations (last change {:.3e})",
                self.config.max_outer,
                report.outer_changes.last().copied().unwrap_or(f64::NAN)
            )));
        };
        report.converged = true;
        self.commit(iterate, phi_used, &ctrl, dt, &mut report)?;
        Ok(report)
    }

    fn commit(&mut self, it: Iterate, porosity: Vec<f64>, ctrl: &ControlOutputs, dt: f64, report: &mut StepReport) -> Result<()> {
        let x_old = self.state.primary.transport_unknowns();
        let outflow = {
            let problem = TransportProblem::new(
                &self.grid,
                &self.db,
                &self.kinetics,
                &self.config.transport,
                &ctrl.transport,
                &x_old,
                &self.state.primary.porosity,
                &porosity,
                dt,
            )?;
            problem.boundary_outflow(&it.x)?
        };
        let s = &mut self.state;
        s.primary.set_transport_unknowns(&it.x);
        s.primary.porosity = porosity;
        s.primary.displacement = it.mech.displacement.clone();
        s.mech = it.mech;
        s.produced_methane += dt * outflow.methane;
        s.produced_water += dt * outflow.water;
        s.time += dt;
        s.steps += 1;
        s.total_stress = ctrl.total_stress;
        s.outlet_pressure = ctrl.outlet_pressure;
        let inventory = methane_inventory(&self.grid, &self.db, &self.kinetics, &self.state.primary)?;
        let s = &self.state;
        report.methane_inventory = inventory;
        report.produced_methane = s.produced_methane;
        report.methane_balance_error = (inventory + s.produced_methane - s.initial_methane) / s.initial_methane;
        report.time = s.time;
        Ok(())
    }

    /// Advances by one accepted step no longer than `max_dt`, halving the
    /// step on recoverable failures.
    pub fn step(&mut self, max_dt: f64) -> Result<StepReport> {
        let mut dt = self.dt_next.min(self.config.dt_max).min(max_dt);
        let mut retries = 0;
        loop {
            match self.try_step(dt, None) {
                Ok(mut rep) => {
                    rep.retries = retries;
                    self.dt_next = if retries > 0 {
                        dt
                    } else if dt < self.dt_next {
                        // truncated by an event; keep the running step size
                        self.dt_next
                    } else {
                        (dt * self.config.dt_growth).min(self.config.dt_max)
                    };
                    return Ok(rep);
                }
                Err(e) if e.is_recoverable() => {
                    retries += 1;
                    dt *= 0.5;
                    log::debug!("t = {:.3} s: {e}; retrying with dt = {dt:.4e} s", self.state.time);
                    if dt < self.config.dt_min {
                        return Err(Error::RunAborted {
                            time: self.state.time,
                            reason: format!("time step fell below dt_min after: {e}"),
                            snapshot: Box::new(self.snapshot()?),
                        });
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Marches to `t_end`, landing exactly on schedule breakpoints,
    /// snapshot times and `t_end`.
    pub fn run(&mut self, t_end: f64, plan: &OutputPlan) -> Result<RunArtifacts> {
        if !(t_end > self.state.time) {
            return Err(Error::Config(format!("end time {t_end} must exceed the current time {}", self.state.time)));
        }
        let mut events: Vec<f64> = self
            .controls
            .breakpoints()
            .into_iter()
            .chain(plan.snapshot_times.iter().copied())
            .filter(|&t| t > self.state.time && t < t_end)
            .collect();
        events.push(t_end);
        events.sort_by(f64::total_cmp);
        events.dedup();

        let mut artifacts = RunArtifacts {
            time_series: vec![self.time_series_row()?],
            steps: Vec::new(),
            snapshots: Vec::new(),
            final_state: self.state.clone(),
        };
        if plan.snapshot_times.iter().any(|&t| t <= self.state.time) {
            artifacts.snapshots.push(self.snapshot()?);
        }
        let mut last_row = self.state.time;
        let eps = 1e-9 * t_end.max(1.0);
        let started = std::time::Instant::now();
        for &event in &events {
            while self.state.time < event - eps {
                let remaining = event - self.state.time;
                let nominal = self.dt_next.min(self.config.dt_max);
                // split the last two steps evenly instead of leaving a sliver
                let max_dt = if remaining > nominal && remaining < 2.0 * nominal {
                    0.5 * remaining
                } else {
                    remaining
                };
                let rep = self.step(max_dt)?;
                if (rep.time - event).abs() <= eps {
                    self.state.time = event;
                }
                if plan.timeseries_interval <= 0.0 || self.state.time - last_row >= plan.timeseries_interval - eps || (self.state.time - event).abs() <= eps {
                    artifacts.time_series.push(self.time_series_row()?);
                    last_row = self.state.time;
                }
                artifacts.steps.push(rep);
            }
            if plan.snapshot_times.iter().any(|&t| (t - event).abs() <= eps) {
                artifacts.snapshots.push(self.snapshot()?);
            }
            log::info!("t = {:.1} s after {} steps", self.state.time, self.state.steps);
        }
        log::info!(
            "reached t = {:.1} s in {} steps ({:.1} s wall clock)",
            self.state.time,
            self.state.steps,
            started.elapsed().as_secs_f64()
        );
        artifacts.final_state = self.state.clone();
        Ok(artifacts)
    }

    pub fn time_series_row(&self) -> Result<TimeSeriesRow> {
        let g = &self.grid;
        let p = &self.state.primary;
        let n = g.num_cells();
        let moles = self.state.produced_methane / MOLAR_MASS_CH4;
        let young = element_young_moduli(&self.db, self.config.regime, &p.hydrate_saturation, Some(&self.state.mech.mean_effective_stress()));
        let mh = self.kinetics.hydrate_molar_mass();
        let mut hydrate_moles = 0.0;
        let mut rate = 0.0;
        for c in 0..n {
            let v = g.cell_volumes[c];
            hydrate_moles += v * p.porosity[c] * p.hydrate_saturation[c] * self.db.density_hydrate / mh;
            let input = CellInputs::from_slice(
                &[p.gas_pressure[c], p.extended_water_saturation(c), p.hydrate_saturation[c], p.temperature[c]],
                p.porosity[c],
            );
            let props = CellProps::evaluate(&self.db, &input)?;
            rate += v * props.kinetic_source(&self.db, &self.kinetics).molar_rate;
        }
        Ok(TimeSeriesRow {
            time: self.state.time,
            gas_pressure: g.volume_average(&p.gas_pressure),
            water_saturation: g.volume_average(&p.water_saturation),
            hydrate_saturation: g.volume_average(&p.hydrate_saturation),
            temperature: g.volume_average(&p.temperature),
            min_temperature: p.temperature.iter().copied().fold(f64::INFINITY, f64::min),
            porosity: g.volume_average(&p.porosity),
            volumetric_strain: self.state.mech.domain_volumetric_strain(g),
            produced_gas_mol: moles,
            produced_gas_std_volume: moles * GAS_CONSTANT * STANDARD_TEMPERATURE / STANDARD_PRESSURE,
            outlet_gas_pressure: Controls::probe(g, &p.gas_pressure),
            young_modulus: g.volume_average(&young),
            hydrate_moles,
            dissociation_rate: rate,
            total_stress: self.state.total_stress,
            outlet_pressure: self.state.outlet_pressure.unwrap_or(f64::NAN),
        })
    }

    /// Primary fields plus derived fields recomputed from them.
    pub fn snapshot(&self) -> Result<FieldSnapshot> {
        let p = &self.state.primary;
        let n = self.grid.num_cells();
        let mut snap = FieldSnapshot {
            time: self.state.time,
            gas_pressure: p.gas_pressure.clone(),
            water_saturation: p.water_saturation.clone(),
            hydrate_saturation: p.hydrate_saturation.clone(),
            temperature: p.temperature.clone(),
            porosity: p.porosity.clone(),
            undersaturation: p.undersaturation.clone(),
            displacement: p.displacement.clone(),
            ..FieldSnapshot::default()
        };
        for c in 0..n {
            let h = self.db.hydraulic_state(p.gas_pressure[c], p.water_saturation[c], p.hydrate_saturation[c], p.porosity[c]);
            snap.water_pressure.push(h.water_pressure);
            snap.capillary_pressure.push(h.capillary_pressure);
            snap.permeability.push(h.permeability);
            snap.gas_density.push(self.db.gas_density(p.gas_pressure[c], p.temperature[c])?);
        }
        snap.young_modulus = element_young_moduli(&self.db, self.config.regime, &p.hydrate_saturation, Some(&self.state.mech.mean_effective_stress()));
        snap.effective_stress = self.state.mech.mean_effective_stress();
        snap.volumetric_strain = self.state.mech.volumetric_strains();
        Ok(snap)
    }
}

fn pore_pressures(db: &MaterialDb, cfg: &GeomechConfig, x: &[f64], porosity: &[f64]) -> Vec<f64> {
    (0..porosity.len())
        .map(|c| {
            let (pg, sh) = (x[4 * c], x[4 * c + 2]);
            let (sw, _) = split_water_unknown(x[4 * c + 1], sh);
            let pw = pg - db.capillary_pressure(sw, porosity[c], sh).value;
            effective_pore_pressure(cfg.pore_weighting, sw, pw, 1.0 - sw - sh, pg)
        })
        .collect()
}

fn bulk_density(db: &MaterialDb, cfg: &GeomechConfig, p: &PrimaryState) -> Result<Vec<f64>> {
    if cfg.body_force.is_none() {
        return Ok(Vec::new());
    }
    (0..p.num_cells())
        .map(|c| {
            let phi = p.porosity[c];
            let rho_g = db.gas_density(p.gas_pressure[c], p.temperature[c])?;
            Ok((1.0 - phi) * db.density_sand
                + phi
                    * (p.water_saturation[c] * db.density_water
                        + p.hydrate_saturation[c] * db.density_hydrate
                        + p.gas_saturation(c) * rho_g))
        })
        .collect()
}

/// Sides with a prescribed outlet pressure.
pub fn outlet_sides(controls: &Controls) -> Vec<Side> {
    [Side::Bottom, Side::Top, Side::Outer]
        .into_iter()
        .filter(|&s| matches!(controls.flow(s), Some(crate::scenario::control::FlowControl::BackPressure(_))))
        .collect()
}
