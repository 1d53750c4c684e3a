use super::flux::{face_flux, harmonic_conductance, FaceFlux, FaceGeometry};
use super::props::{CellInputs, CellProps};
use super::{FlowBc, JacobianMode, ThermalBc, TransportBoundary, TransportConfig, EQUATION_NAMES, VARS_PER_CELL};
use crate::constitutive::MaterialDb;
use crate::dual::{gradient, pair_gradient, CellDual, Scalar};
use crate::error::{Error, Result};
use crate::grid::{AxiGrid, Side};
use crate::kinetics::KineticParams;
use crate::numerics::{newton_solve, DirectSolver, NewtonReport, NewtonSystem, SparseMatrix, TripletBuilder};

const NV: usize = VARS_PER_CELL;

/// Net flux leaving the domain through pressure-controlled faces.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BoundaryOutflow {
    /// kg/s
    pub methane: f64,
    /// kg/s
    pub water: f64,
    /// m³/s at local conditions
    pub gas_volume: f64,
    /// W
    pub energy: f64,
}

/// One implicit Euler step of the transport block at frozen porosity.
pub struct TransportProblem<'a> {
    pub grid: &'a AxiGrid,
    pub db: &'a MaterialDb,
    pub kinetics: &'a KineticParams,
    pub config: &'a TransportConfig,
    pub boundary: &'a TransportBoundary,
    porosity: &'a [f64],
    old_storage: Vec<[f64; 4]>,
    dt: f64,
    geometry: Vec<FaceGeometry>,
    split: Option<FixedStressSplit>,
}

/// Porosity response `φ = φ_k + b·(P_g − P_k)` inside a transport solve,
/// which stabilises the sequential flow–mechanics iteration. The term
/// vanishes once the outer iteration has converged.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedStressSplit {
    /// b per cell, 1/Pa.
    pub compressibility: Vec<f64>,
    /// Gas pressure of the previous outer iterate, Pa.
    pub reference_pressure: Vec<f64>,
}

fn assembly_error(cell: usize, e: Error) -> Error {
    Error::Assembly {
        cell,
        source: Box::new(e),
    }
}

fn neighbours(grid: &AxiGrid, c: usize) -> impl Iterator<Item = usize> + '_ {
    std::iter::once(c).chain(grid.cell_faces[c].iter().filter_map(move |&f| {
        let face = &grid.faces[f];
        match face.right {
            Some(r) if face.left == c => Some(r),
            Some(_) => Some(face.left),
            None => None,
        }
    }))
}

impl<'a> TransportProblem<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        grid: &'a AxiGrid,
        db: &'a MaterialDb,
        kinetics: &'a KineticParams,
        config: &'a TransportConfig,
        boundary: &'a TransportBoundary,
        old_unknowns: &[f64],
        old_porosity: &[f64],
        porosity: &'a [f64],
        dt: f64,
    ) -> Result<Self> {
        let n = grid.num_cells();
        for len in [old_porosity.len(), porosity.len()] {
            if len != n {
                return Err(Error::Dimension {
                    expected: n,
                    actual: len,
                });
            }
        }
        if old_unknowns.len() != NV * n {
            return Err(Error::Dimension {
                expected: NV * n,
                actual: old_unknowns.len(),
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let mut old_storage = Vec::with_capacity(n);
        for c in 0..n {
            let input = CellInputs::from_slice(&old_unknowns[NV * c..NV * c + NV], old_porosity[c]);
            let props = CellProps::evaluate(db, &input).map_err(|e| assembly_error(c, e))?;
            old_storage.push(props.storage(db));
        }
        let geometry = grid
            .faces
            .iter()
            .map(|face| {
                let z_left = grid.cell_centers[face.left][0];
                let z_right = match face.right {
                    Some(r) => grid.cell_centers[r][0],
                    None => face.center[0],
                };
                FaceGeometry {
                    area: face.area,
                    dist_left: face.dist_left,
                    dist_right: face.dist_right,
                    gravity_head: config.gravity * (z_left - z_right),
                }
            })
            .collect();
        Ok(TransportProblem {
            grid,
            db,
            kinetics,
            config,
            boundary,
            porosity,
            old_storage,
            dt,
            geometry,
            split: None,
        })
    }

    pub fn with_fixed_stress(mut self, split: FixedStressSplit) -> Result<Self> {
        let n = self.grid.num_cells();
        for len in [split.compressibility.len(), split.reference_pressure.len()] {
            if len != n {
                return Err(Error::Dimension { expected: n, actual: len });
            }
        }
        self.split = Some(split);
        Ok(self)
    }

    fn porosity_at(&self, x: &[f64], c: usize) -> f64 {
        match &self.split {
            Some(s) => self.porosity[c] + s.compressibility[c] * (x[NV * c] - s.reference_pressure[c]),
            None => self.porosity[c],
        }
    }

    /// Porosity actually seen by the transport equations at `x`.
    pub fn effective_porosity(&self, x: &[f64]) -> Vec<f64> {
        (0..self.grid.num_cells()).map(|c| self.porosity_at(x, c)).collect()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn row_scale(&self, equation: usize) -> f64 {
        if equation == 3 {
            self.dt / self.config.energy_scale
        } else {
            self.dt / self.config.mass_scale
        }
    }

    fn inputs(&self, x: &[f64], c: usize) -> CellInputs<f64> {
        CellInputs::from_slice(&x[NV * c..NV * c + NV], self.porosity_at(x, c))
    }

    fn seeded_inputs(&self, x: &[f64], c: usize) -> CellInputs<CellDual> {
        let mut input = self.inputs(x, c).seeded();
        if let Some(s) = &self.split {
            let b = s.compressibility[c];
            input.porosity = input.gas_pressure * b + (self.porosity[c] - b * s.reference_pressure[c]);
        }
        input
    }

    pub fn cell_props(&self, x: &[f64]) -> Result<Vec<CellProps<f64>>> {
        (0..self.grid.num_cells())
            .map(|c| CellProps::evaluate(self.db, &self.inputs(x, c)).map_err(|e| assembly_error(c, e)))
            .collect()
    }

    fn ghost<D: Scalar>(&self, side: Side, interior: &CellInputs<D>, pressure: f64) -> CellInputs<D> {
        let temperature = match self.boundary.thermal(side) {
            ThermalBc::Temperature(t) => D::from(t),
            ThermalBc::Insulated => interior.temperature,
        };
        CellInputs {
            gas_pressure: D::from(pressure),
            water_saturation: interior.water_saturation,
            hydrate_saturation: interior.hydrate_saturation,
            temperature,
            porosity: interior.porosity,
        }
    }

    /// Flux through a boundary face in terms of the interior cell's unknowns;
    /// `None` when nothing crosses it.
    fn boundary_flux<D: Scalar>(
        &self,
        f: usize,
        interior: &CellInputs<D>,
        props: &CellProps<D>,
    ) -> Result<Option<[D; 4]>> {
        let face = &self.grid.faces[f];
        let side = face.side.expect("boundary face has a side");
        let geom = &self.geometry[f];
        match self.boundary.flow(side) {
            FlowBc::Pressure(p) => {
                let ghost_in = self.ghost(side, interior, p);
                let ghost = CellProps::evaluate(self.db, &ghost_in).map_err(|e| assembly_error(face.left, e))?;
                let flux = face_flux(geom, props, &ghost, 0.0);
                Ok(Some([flux.methane, flux.water, D::from(0.0), flux.energy]))
            }
            FlowBc::NoFlow => match self.boundary.thermal(side) {
                ThermalBc::Temperature(tb) => {
                    let cond = harmonic_conductance(geom.area, props.conductivity, props.conductivity, geom.dist_left, 0.0);
                    let zero = D::from(0.0);
                    Ok(Some([zero, zero, zero, cond * (props.temperature - tb)]))
                }
                ThermalBc::Insulated => Ok(None),
            },
        }
    }

    /// Residual per unit bulk volume without row scaling.
    pub fn residual_unscaled(&self, x: &[f64]) -> Result<Vec<f64>> {
        let grid = self.grid;
        let n = grid.num_cells();
        let props = self.cell_props(x)?;
        let mut res = vec![0.0; NV * n];
        for c in 0..n {
            let storage = props[c].storage(self.db);
            let src = props[c].kinetic_source(self.db, self.kinetics);
            let source = [src.methane, src.water, src.hydrate, src.heat];
            for k in 0..NV {
                res[NV * c + k] = (storage[k] - self.old_storage[c][k]) / self.dt - source[k];
            }
        }
        for (f, face) in grid.faces.iter().enumerate() {
            let l = face.left;
            let vl = grid.cell_volumes[l];
            match face.right {
                Some(r) => {
                    let flux = face_flux(&self.geometry[f], &props[l], &props[r], self.db.diffusion_coefficient);
                    let vr = grid.cell_volumes[r];
                    for (k, v) in [(0, flux.methane), (1, flux.water), (3, flux.energy)] {
                        res[NV * l + k] += v / vl;
                        res[NV * r + k] -= v / vr;
                    }
                }
                None => {
                    if let Some(flux) = self.boundary_flux(f, &self.inputs(x, l), &props[l])? {
                        for k in 0..NV {
                            res[NV * l + k] += flux[k] / vl;
                        }
                    }
                }
            }
        }
        Ok(res)
    }

    pub fn residual_scaled(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.residual_unscaled(x)?;
        for (i, v) in r.iter_mut().enumerate() {
            *v *= self.row_scale(i % NV);
        }
        Ok(r)
    }

    /// Scaled residual and its exact Jacobian from forward-mode duals.
    pub fn analytic_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, SparseMatrix)> {
        let grid = self.grid;
        let n = grid.num_cells();
        let mut inputs = Vec::with_capacity(n);
        let mut props = Vec::with_capacity(n);
        for c in 0..n {
            let input = self.seeded_inputs(x, c);
            props.push(CellProps::<CellDual>::evaluate(self.db, &input).map_err(|e| assembly_error(c, e))?);
            inputs.push(input);
        }
        let mut res = vec![0.0; NV * n];
        let mut jac = TripletBuilder::with_capacity(NV * n, NV * n, NV * NV * n * 5);
        let scale: [f64; 4] = std::array::from_fn(|k| self.row_scale(k));

        for c in 0..n {
            let storage = props[c].storage(self.db);
            let src = props[c].kinetic_source(self.db, self.kinetics);
            let source = [src.methane, src.water, src.hydrate, src.heat];
            for k in 0..NV {
                let v = (storage[k] - self.old_storage[c][k]) / self.dt - source[k];
                res[NV * c + k] += v.re * scale[k];
                let g = gradient(&v);
                for (j, gj) in g.iter().enumerate() {
                    jac.add(NV * c + k, NV * c + j, gj * scale[k]);
                }
            }
        }
        for (f, face) in grid.faces.iter().enumerate() {
            let l = face.left;
            let vl = grid.cell_volumes[l];
            match face.right {
                Some(r) => {
                    let vr = grid.cell_volumes[r];
                    let flux: FaceFlux<_> = face_flux(
                        &self.geometry[f],
                        &props[l].lift(0),
                        &props[r].lift(NV),
                        self.db.diffusion_coefficient,
                    );
                    for (k, v) in [(0, flux.methane), (1, flux.water), (3, flux.energy)] {
                        res[NV * l + k] += v.re * scale[k] / vl;
                        res[NV * r + k] -= v.re * scale[k] / vr;
                        let g = pair_gradient(&v);
                        for (j, gj) in g.iter().enumerate() {
                            let col = if j < NV { NV * l + j } else { NV * r + j - NV };
                            jac.add(NV * l + k, col, gj * scale[k] / vl);
                            jac.add(NV * r + k, col, -gj * scale[k] / vr);
                        }
                    }
                }
                None => {
                    if let Some(flux) = self.boundary_flux(f, &inputs[l], &props[l])? {
                        for k in 0..NV {
                            res[NV * l + k] += flux[k].re * scale[k] / vl;
                            let g = gradient(&flux[k]);
                            for (j, gj) in g.iter().enumerate() {
                                jac.add(NV * l + k, NV * l + j, gj * scale[k] / vl);
                            }
                        }
                    }
                }
            }
        }
        Ok((res, jac.build()))
    }

    /// Central-difference Jacobian of the scaled residual with a distance-2
    /// colouring of the five-point stencil.
    pub fn fd_jacobian(&self, x: &[f64]) -> Result<SparseMatrix> {
        let grid = self.grid;
        let n = grid.num_cells();
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); 5];
        for i in 0..grid.nz {
            for j in 0..grid.nr {
                groups[(i + 2 * j) % 5].push(grid.cell_index(i, j));
            }
        }
        let mut jac = TripletBuilder::with_capacity(NV * n, NV * n, NV * NV * n * 5);
        for group in groups.iter().filter(|g| !g.is_empty()) {
            for v in 0..NV {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                let mut steps = Vec::with_capacity(group.len());
                for &c in group {
                    let idx = NV * c + v;
                    let h = fd_step(x[idx]);
                    xp[idx] += h;
                    xm[idx] -= h;
                    steps.push(h);
                }
                let rp = self.residual_scaled(&xp)?;
                let rm = self.residual_scaled(&xm)?;
                for (&c, &h) in group.iter().zip(&steps) {
                    for r in neighbours(grid, c) {
                        for k in 0..NV {
                            let row = NV * r + k;
                            jac.add(row, NV * c + v, (rp[row] - rm[row]) / (2.0 * h));
                        }
                    }
                }
            }
        }
        Ok(jac.build())
    }

    pub fn check_rows(&self, jac: &SparseMatrix) -> Result<()> {
        for row in 0..jac.nrows() {
            if jac.row(row).next().is_none() {
                return Err(Error::ZeroRow {
                    row,
                    cell: row / NV,
                    equation: EQUATION_NAMES[row % NV],
                });
            }
        }
        Ok(())
    }

    pub fn boundary_outflow(&self, x: &[f64]) -> Result<BoundaryOutflow> {
        let mut out = BoundaryOutflow::default();
        for (f, face) in self.grid.faces.iter().enumerate() {
            let Some(side) = face.side else { continue };
            let FlowBc::Pressure(p) = self.boundary.flow(side) else {
                continue;
            };
            let l = face.left;
            let input = self.inputs(x, l);
            let props = CellProps::evaluate(self.db, &input).map_err(|e| assembly_error(l, e))?;
            let ghost = CellProps::evaluate(self.db, &self.ghost(side, &input, p)).map_err(|e| assembly_error(l, e))?;
            let flux = face_flux(&self.geometry[f], &props, &ghost, 0.0);
            out.methane += flux.methane;
            out.water += flux.water;
            out.gas_volume += flux.gas_volume;
            out.energy += flux.energy;
        }
        Ok(out)
    }
}

pub(crate) fn fd_step(x: f64) -> f64 {
    (1e-6 * x.abs()).max(1e-8)
}

impl NewtonSystem for TransportProblem<'_> {
    fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        self.residual_scaled(x)
    }

    fn jacobian(&mut self, x: &[f64]) -> Result<SparseMatrix> {
        let jac = match self.config.jacobian {
            JacobianMode::Analytic => self.analytic_jacobian(x)?.1,
            JacobianMode::FiniteDifference => self.fd_jacobian(x)?,
        };
        self.check_rows(&jac)?;
        Ok(jac)
    }

    fn adjust_step(&mut self, x: &[f64], dx: &mut [f64]) {
        let cfg = self.config;
        for c in 0..x.len() / NV {
            let b = NV * c;
            let dp_max = cfg.max_relative_pressure_change * x[b].abs();
            dx[b] = dx[b].clamp(-dp_max, dp_max);
            for k in 1..3 {
                dx[b + k] = dx[b + k].clamp(-cfg.max_saturation_change, cfg.max_saturation_change);
            }
            dx[b + 3] = dx[b + 3].clamp(-cfg.max_temperature_change, cfg.max_temperature_change);
        }
    }

    fn project(&mut self, x: &mut [f64]) -> usize {
        let cfg = self.config;
        let mut clips = 0;
        for c in 0..x.len() / NV {
            let b = NV * c;
            if x[b] < cfg.min_pressure {
                x[b] = cfg.min_pressure;
                clips += 1;
            }
            let sh = x[b + 2].clamp(0.0, cfg.max_hydrate_saturation);
            if sh != x[b + 2] {
                x[b + 2] = sh;
                clips += 1;
            }
            let sw = x[b + 1].clamp(0.0, 2.0 - sh);
            if sw != x[b + 1] {
                x[b + 1] = sw;
                clips += 1;
            }
        }
        if clips > 0 {
            log::trace!("saturation/pressure clipping touched {clips} components");
        }
        clips
    }
}

/// Newton solve of one transport step starting from `x0`.
pub fn solve_transport_step(
    problem: &mut TransportProblem<'_>,
    x0: Vec<f64>,
    solver: &mut DirectSolver,
) -> Result<(Vec<f64>, NewtonReport)> {
    let opts = problem.config.newton.clone();
    newton_solve(problem, x0, &opts, solver)
}
