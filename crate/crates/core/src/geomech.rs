//! Quasi-static axisymmetric poro-elasticity on bilinear quadrilaterals.
//!
//! Elements coincide with the flow cells, so cell fields (stiffness, pore
//! pressure) are piecewise constant per element. Displacements live on the
//! vertices as `[u_z, u_r]`. Internally stresses are tension positive with
//! `σ = σ' − α·P_eff·I`; reported volumetric strain is compression positive.
//!
//! The solve is incremental: each call takes the last committed state and
//! applies the change in tractions, pore pressure and body force with the
//! stiffness of the current hydrate saturation. A stiffening skeleton
//! therefore does not spring back under a load it already carries.

use crate::constitutive::{MaterialDb, Regime};
use crate::error::{Error, Result};
use crate::grid::{AxiGrid, Side};
use crate::numerics::{DirectSolver, SparseMatrix, TripletBuilder};
use std::f64::consts::PI;

/// Strain or stress components `[zz, rr, θθ, zr]`; engineering shear strain.
pub type Voigt = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MechBc {
    /// Zero normal displacement.
    Roller,
    /// Prescribed total normal stress, compression positive, Pa.
    Traction(f64),
    /// Both displacement components held.
    Fixed,
}

/// Boundary conditions of the four segments. The axis is always a roller.
#[derive(Debug, Clone, PartialEq)]
pub struct MechBoundary {
    bottom: MechBc,
    top: MechBc,
    outer: MechBc,
}

impl Default for MechBoundary {
    fn default() -> Self {
        Self::triaxial(0.0, 0.0)
    }
}

impl MechBoundary {
    /// Bottom roller, axial stress on top, confining stress on the mantle.
    pub fn triaxial(axial: f64, confining: f64) -> Self {
        MechBoundary {
            bottom: MechBc::Roller,
            top: MechBc::Traction(axial),
            outer: MechBc::Traction(confining),
        }
    }

    pub fn isotropic(stress: f64) -> Self {
        Self::triaxial(stress, stress)
    }

    pub fn get(&self, side: Side) -> MechBc {
        match side {
            Side::Bottom => self.bottom,
            Side::Top => self.top,
            Side::Axis => MechBc::Roller,
            Side::Outer => self.outer,
        }
    }

    pub fn set(&mut self, side: Side, bc: MechBc) {
        match side {
            Side::Bottom => self.bottom = bc,
            Side::Top => self.top = bc,
            Side::Axis => {}
            Side::Outer => self.outer = bc,
        }
    }

    fn traction(&self, side: Side) -> f64 {
        match self.get(side) {
            MechBc::Traction(s) => s,
            _ => 0.0,
        }
    }

    /// Total confining stress seen by the sample, compression positive.
    pub fn confining_stress(&self) -> f64 {
        match (self.outer, self.top) {
            (MechBc::Traction(s), _) => s,
            (_, MechBc::Traction(s)) => s,
            _ => 0.0,
        }
    }

    fn check(&self) -> Result<()> {
        let holds_z = matches!(self.bottom, MechBc::Roller | MechBc::Fixed)
            || matches!(self.top, MechBc::Roller | MechBc::Fixed)
            || self.outer == MechBc::Fixed;
        if !holds_z {
            return Err(Error::MechanicalSetup(
                "no boundary restrains axial displacement; the system is singular".into(),
            ));
        }
        for (side, bc) in [(Side::Bottom, self.bottom), (Side::Top, self.top), (Side::Outer, self.outer)] {
            if let MechBc::Traction(s) = bc {
                if !s.is_finite() {
                    return Err(Error::MechanicalSetup(format!("non-finite traction on {}", side.name())));
                }
            }
        }
        Ok(())
    }
}

/// How phase pressures are averaged into the pressure acting on the skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoreWeighting {
    /// `(S_w P_w + S_g P_g) / (S_w + S_g)`
    Normalized,
    /// `S_w P_w + S_g P_g`
    Unnormalized,
}

impl PoreWeighting {
    pub fn name(self) -> &'static str {
        match self {
            PoreWeighting::Normalized => "normalized",
            PoreWeighting::Unnormalized => "unnormalized",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "normalized" => Some(PoreWeighting::Normalized),
            "unnormalized" => Some(PoreWeighting::Unnormalized),
            _ => None,
        }
    }
}

pub fn effective_pore_pressure(
    weighting: PoreWeighting,
    water_saturation: f64,
    water_pressure: f64,
    gas_saturation: f64,
    gas_pressure: f64,
) -> f64 {
    let sum = water_saturation * water_pressure + gas_saturation * gas_pressure;
    match weighting {
        PoreWeighting::Unnormalized => sum,
        PoreWeighting::Normalized => {
            let fluid = water_saturation + gas_saturation;
            if fluid > 0.0 {
                sum / fluid
            } else {
                gas_pressure
            }
        }
    }
}

/// Which state the elastic response is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MechFormulation {
    /// `K(E_sh) u = f − f_0` from the initial equilibrium; softening under
    /// constant load deforms the sample.
    Secant,
    /// Load increments from the committed state with the current `E_sh`;
    /// stiffness changes alone produce no strain.
    Incremental,
}

impl MechFormulation {
    pub fn name(self) -> &'static str {
        match self {
            MechFormulation::Secant => "secant",
            MechFormulation::Incremental => "incremental",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "secant" => Some(MechFormulation::Secant),
            "incremental" => Some(MechFormulation::Incremental),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeomechConfig {
    pub formulation: MechFormulation,
    pub pore_weighting: PoreWeighting,
    /// Gravity for the skeleton body force, m/s²; `None` disables it.
    pub body_force: Option<f64>,
}

impl Default for GeomechConfig {
    fn default() -> Self {
        GeomechConfig {
            formulation: MechFormulation::Secant,
            pore_weighting: PoreWeighting::Normalized,
            body_force: None,
        }
    }
}

/// Per-cell loading of one mechanical solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MechLoads {
    /// Effective pore pressure, Pa.
    pub pore_pressure: Vec<f64>,
    /// Element Young's modulus, Pa.
    pub young_modulus: Vec<f64>,
    /// Bulk density for the body force, kg/m³; may be empty when unused.
    pub bulk_density: Vec<f64>,
    pub boundary: MechBoundary,
}

/// Committed mechanical state.
#[derive(Debug, Clone, PartialEq)]
pub struct MechState {
    /// `[u_z, u_r]` per vertex, m.
    pub displacement: Vec<[f64; 2]>,
    /// Element-averaged strain per cell, tension positive.
    pub strain: Vec<Voigt>,
    /// Effective stress per cell, tension positive, Pa.
    pub effective_stress: Vec<Voigt>,
    pub pore_pressure: Vec<f64>,
    pub bulk_density: Vec<f64>,
    pub boundary: MechBoundary,
}

impl MechState {
    /// Undeformed reference state in equilibrium with the given loads. The
    /// initial effective stress follows from the boundary tractions and the
    /// pore pressure.
    pub fn initial(grid: &AxiGrid, db: &MaterialDb, boundary: MechBoundary, pore_pressure: Vec<f64>, bulk_density: Vec<f64>) -> Result<Self> {
        let n = grid.num_cells();
        if pore_pressure.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: pore_pressure.len(),
            });
        }
        let axial = match boundary.top {
            MechBc::Traction(s) => s,
            _ => boundary.confining_stress(),
        };
        let radial = boundary.confining_stress();
        let alpha = db.biot_coefficient;
        let effective_stress = pore_pressure
            .iter()
            .map(|p| [-axial + alpha * p, -radial + alpha * p, -radial + alpha * p, 0.0])
            .collect();
        Ok(MechState {
            displacement: vec![[0.0; 2]; grid.num_vertices()],
            strain: vec![[0.0; 4]; n],
            effective_stress,
            pore_pressure,
            bulk_density,
            boundary,
        })
    }

    /// Compression-positive volumetric strain of a cell.
    pub fn volumetric_strain(&self, cell: usize) -> f64 {
        let e = &self.strain[cell];
        -(e[0] + e[1] + e[2])
    }

    pub fn volumetric_strains(&self) -> Vec<f64> {
        (0..self.strain.len()).map(|c| self.volumetric_strain(c)).collect()
    }

    /// Volume-weighted compression-positive volumetric strain of the sample.
    pub fn domain_volumetric_strain(&self, grid: &AxiGrid) -> f64 {
        grid.volume_average(&self.volumetric_strains())
    }

    /// Mean effective stress per cell, compression positive.
    pub fn mean_effective_stress(&self) -> Vec<f64> {
        self.effective_stress.iter().map(|s| -(s[0] + s[1] + s[2]) / 3.0).collect()
    }
}

/// Element Young's moduli from the composite law, optionally stiffened by
/// the mean effective stress of the previous state.
pub fn element_young_moduli(db: &MaterialDb, regime: Regime, hydrate_saturation: &[f64], mean_effective_stress: Option<&[f64]>) -> Vec<f64> {
    hydrate_saturation
        .iter()
        .enumerate()
        .map(|(c, &sh)| {
            let e = db.composite_young_modulus(sh, regime);
            match mean_effective_stress {
                Some(p) if db.modulus_stress_sensitivity > 0.0 => e * (1.0 + db.modulus_stress_sensitivity * p[c].max(0.0)),
                _ => e,
            }
        })
        .collect()
}

/// Elastic matrix for `[zz, rr, θθ, zr]`.
pub fn elasticity_matrix(db: &MaterialDb, young_modulus: f64) -> [[f64; 4]; 4] {
    let (l, m) = db.lame(young_modulus);
    let d = l + 2.0 * m;
    [[d, l, l, 0.0], [l, d, l, 0.0], [l, l, d, 0.0], [0.0, 0.0, 0.0, m]]
}

/// Strain-displacement matrix and quadrature weight at one Gauss point.
struct GaussPoint {
    b: [[f64; 8]; 4],
    shape: [f64; 4],
    weight: f64,
}

const CORNERS: [(f64, f64); 4] = [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)];

fn gauss_points(grid: &AxiGrid, cell: usize) -> [GaussPoint; 4] {
    let (i, j) = (cell / grid.nr, cell % grid.nr);
    let (z0, z1) = (grid.z_edges[i], grid.z_edges[i + 1]);
    let (r0, r1) = (grid.r_edges[j], grid.r_edges[j + 1]);
    let (hz, hr) = (z1 - z0, r1 - r0);
    let g = 0.5 / 3f64.sqrt();
    let pts = [0.5 - g, 0.5 + g];
    std::array::from_fn(|q| {
        let (s, t) = (pts[q / 2], pts[q % 2]);
        let r = r0 + t * hr;
        let mut b = [[0.0; 8]; 4];
        let mut shape = [0.0; 4];
        for (a, &(sa, ta)) in CORNERS.iter().enumerate() {
            let fs = if sa > 0.0 { s } else { 1.0 - s };
            let ft = if ta > 0.0 { t } else { 1.0 - t };
            let ds = if sa > 0.0 { 1.0 } else { -1.0 };
            let dt = if ta > 0.0 { 1.0 } else { -1.0 };
            let n = fs * ft;
            let dndz = ds * ft / hz;
            let dndr = fs * dt / hr;
            shape[a] = n;
            b[0][2 * a] = dndz;
            b[1][2 * a + 1] = dndr;
            b[2][2 * a + 1] = n / r;
            b[3][2 * a] = dndr;
            b[3][2 * a + 1] = dndz;
        }
        GaussPoint {
            b,
            shape,
            weight: 2.0 * PI * r * 0.25 * hz * hr,
        }
    })
}

/// Free-DOF numbering after removing the displacement constraints.
#[derive(Debug, Clone)]
pub struct DofMap {
    index: Vec<Option<usize>>,
    num_free: usize,
}

impl DofMap {
    pub fn new(grid: &AxiGrid, boundary: &MechBoundary) -> Self {
        let mut held = vec![false; 2 * grid.num_vertices()];
        for side in Side::ALL {
            let (z, r) = match (side, boundary.get(side)) {
                (_, MechBc::Fixed) => (true, true),
                (Side::Bottom | Side::Top, MechBc::Roller) => (true, false),
                (Side::Axis | Side::Outer, MechBc::Roller) => (false, true),
                (_, MechBc::Traction(_)) => (false, false),
            };
            for v in grid.boundary_vertices(side) {
                held[2 * v] |= z;
                held[2 * v + 1] |= r;
            }
        }
        let mut num_free = 0;
        let index = held
            .iter()
            .map(|&h| {
                if h {
                    None
                } else {
                    num_free += 1;
                    Some(num_free - 1)
                }
            })
            .collect();
        DofMap { index, num_free }
    }

    pub fn num_free(&self) -> usize {
        self.num_free
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.index[dof]
    }

    fn expand(&self, reduced: &[f64]) -> Vec<[f64; 2]> {
        let nv = self.index.len() / 2;
        (0..nv)
            .map(|v| {
                let get = |d: usize| self.index[d].map_or(0.0, |k| reduced[k]);
                [get(2 * v), get(2 * v + 1)]
            })
            .collect()
    }
}

fn element_dofs(grid: &AxiGrid, cell: usize) -> [usize; 8] {
    let v = grid.cell_vertices[cell];
    std::array::from_fn(|k| 2 * v[k / 2] + k % 2)
}

/// Reduced stiffness matrix on the free DOFs.
pub fn stiffness_matrix(grid: &AxiGrid, db: &MaterialDb, young_modulus: &[f64], dofs: &DofMap) -> Result<SparseMatrix> {
    let n = grid.num_cells();
    if young_modulus.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: young_modulus.len(),
        });
    }
    let mut k = TripletBuilder::with_capacity(dofs.num_free, dofs.num_free, 64 * n).symmetric(true);
    for c in 0..n {
        let e = young_modulus[c];
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::MechanicalSetup(format!("cell {c}: Young's modulus {e} must be positive")));
        }
        let d = elasticity_matrix(db, e);
        let ldofs = element_dofs(grid, c);
        let mut ke = [[0.0; 8]; 8];
        for gp in gauss_points(grid, c) {
            // D·B
            let mut db_ = [[0.0; 8]; 4];
            for p in 0..4 {
                for col in 0..8 {
                    db_[p][col] = (0..4).map(|q| d[p][q] * gp.b[q][col]).sum();
                }
            }
            for a in 0..8 {
                for b in 0..8 {
                    ke[a][b] += gp.weight * (0..4).map(|p| gp.b[p][a] * db_[p][b]).sum::<f64>();
                }
            }
        }
        for a in 0..8 {
            let Some(ra) = dofs.index[ldofs[a]] else { continue };
            for b in 0..8 {
                if let Some(rb) = dofs.index[ldofs[b]] {
                    k.add(ra, rb, ke[a][b]);
                }
            }
        }
    }
    Ok(k.build())
}

/// Full-length load vector from traction, pore-pressure and body-force
/// increments.
fn load_vector(
    grid: &AxiGrid,
    alpha: f64,
    d_traction: [(Side, f64); 3],
    d_pore: &[f64],
    d_body: Option<&[f64]>,
) -> Vec<f64> {
    let mut f = vec![0.0; 2 * grid.num_vertices()];
    let w = grid.nr + 1;
    for (side, ds) in d_traction {
        if ds == 0.0 {
            continue;
        }
        match side {
            Side::Top => {
                // outward normal +z, traction −σ
                for j in 0..grid.nr {
                    let (r0, r1) = (grid.r_edges[j], grid.r_edges[j + 1]);
                    let h = r1 - r0;
                    let base = grid.nz * w;
                    f[2 * (base + j)] -= ds * 2.0 * PI * h * (2.0 * r0 + r1) / 6.0;
                    f[2 * (base + j + 1)] -= ds * 2.0 * PI * h * (r0 + 2.0 * r1) / 6.0;
                }
            }
            Side::Bottom => {
                for j in 0..grid.nr {
                    let (r0, r1) = (grid.r_edges[j], grid.r_edges[j + 1]);
                    let h = r1 - r0;
                    f[2 * j] += ds * 2.0 * PI * h * (2.0 * r0 + r1) / 6.0;
                    f[2 * (j + 1)] += ds * 2.0 * PI * h * (r0 + 2.0 * r1) / 6.0;
                }
            }
            Side::Outer => {
                for i in 0..grid.nz {
                    let h = grid.z_edges[i + 1] - grid.z_edges[i];
                    let share = ds * 2.0 * PI * grid.radius * h / 2.0;
                    f[2 * (i * w + grid.nr) + 1] -= share;
                    f[2 * ((i + 1) * w + grid.nr) + 1] -= share;
                }
            }
            Side::Axis => {}
        }
    }
    for c in 0..grid.num_cells() {
        let ldofs = element_dofs(grid, c);
        let dp = alpha * d_pore[c];
        let body = d_body.map_or(0.0, |b| b[c]);
        if dp == 0.0 && body == 0.0 {
            continue;
        }
        for gp in gauss_points(grid, c) {
            for a in 0..8 {
                // ∫ Bᵀ m α ΔP
                f[ldofs[a]] += gp.weight * dp * (gp.b[0][a] + gp.b[1][a] + gp.b[2][a]);
            }
            for a in 0..4 {
                // body force acts along −z
                f[ldofs[2 * a]] -= gp.weight * body * gp.shape[a];
            }
        }
    }
    f
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension { expected, actual });
    }
    Ok(())
}

/// Applies the load change from `prev` to `loads` with the stiffness of
/// `loads` and returns the resulting state. With the initial state as `prev`
/// this is the secant solution.
pub fn solve_increment(
    grid: &AxiGrid,
    db: &MaterialDb,
    config: &GeomechConfig,
    prev: &MechState,
    loads: &MechLoads,
    solver: &mut DirectSolver,
) -> Result<MechState> {
    let n = grid.num_cells();
    check_len(n, loads.pore_pressure.len())?;
    check_len(n, prev.pore_pressure.len())?;
    loads.boundary.check()?;
    let dofs = DofMap::new(grid, &loads.boundary);
    let k = stiffness_matrix(grid, db, &loads.young_modulus, &dofs)?;

    let d_pore: Vec<f64> = loads.pore_pressure.iter().zip(&prev.pore_pressure).map(|(a, b)| a - b).collect();
    let d_traction = [Side::Top, Side::Outer, Side::Bottom].map(|s| (s, loads.boundary.traction(s) - prev.boundary.traction(s)));
    let d_body = match config.body_force {
        Some(g) => {
            check_len(n, loads.bulk_density.len())?;
            let prev_rho = if prev.bulk_density.len() == n { prev.bulk_density.as_slice() } else { loads.bulk_density.as_slice() };
            Some(loads.bulk_density.iter().zip(prev_rho).map(|(a, b)| g * (a - b)).collect::<Vec<_>>())
        }
        None => None,
    };
    let f = load_vector(grid, db.biot_coefficient, d_traction, &d_pore, d_body.as_deref());
    let mut rhs = vec![0.0; dofs.num_free];
    for (d, v) in f.iter().enumerate() {
        if let Some(k) = dofs.index[d] {
            rhs[k] += v;
        }
    }
    let du_reduced = if rhs.iter().all(|v| *v == 0.0) {
        vec![0.0; dofs.num_free]
    } else {
        solver.solve(&k, &rhs).map_err(|e| match e {
            Error::SingularMatrix { row } => Error::MechanicalSetup(format!("singular stiffness at reduced row {row}")),
            e => e,
        })?
    };
    let du = dofs.expand(&du_reduced);

    let mut next = prev.clone();
    for (u, d) in next.displacement.iter_mut().zip(&du) {
        u[0] += d[0];
        u[1] += d[1];
    }
    for c in 0..n {
        let de = cell_strain(grid, c, &du);
        let d = elasticity_matrix(db, loads.young_modulus[c]);
        for p in 0..4 {
            next.strain[c][p] += de[p];
            next.effective_stress[c][p] += (0..4).map(|q| d[p][q] * de[q]).sum::<f64>();
        }
    }
    next.pore_pressure = loads.pore_pressure.clone();
    next.bulk_density = loads.bulk_density.clone();
    next.boundary = loads.boundary.clone();
    Ok(next)
}

/// Element-averaged strain of a displacement field.
pub fn cell_strain(grid: &AxiGrid, cell: usize, displacement: &[[f64; 2]]) -> Voigt {
    let ldofs = element_dofs(grid, cell);
    let ue: [f64; 8] = std::array::from_fn(|k| displacement[ldofs[k] / 2][ldofs[k] % 2]);
    let mut eps = [0.0; 4];
    let mut vol = 0.0;
    for gp in gauss_points(grid, cell) {
        for p in 0..4 {
            eps[p] += gp.weight * (0..8).map(|a| gp.b[p][a] * ue[a]).sum::<f64>();
        }
        vol += gp.weight;
    }
    eps.map(|e| e / vol)
}

/// Strain energy `uᵀ K u` of a displacement field.
pub fn strain_energy(grid: &AxiGrid, db: &MaterialDb, young_modulus: &[f64], displacement: &[[f64; 2]]) -> f64 {
    let mut energy = 0.0;
    for c in 0..grid.num_cells() {
        let d = elasticity_matrix(db, young_modulus[c]);
        let ldofs = element_dofs(grid, c);
        let ue: [f64; 8] = std::array::from_fn(|k| displacement[ldofs[k] / 2][ldofs[k] % 2]);
        for gp in gauss_points(grid, c) {
            let e: [f64; 4] = std::array::from_fn(|p| (0..8).map(|a| gp.b[p][a] * ue[a]).sum());
            for p in 0..4 {
                for q in 0..4 {
                    energy += gp.weight * e[p] * d[p][q] * e[q];
                }
            }
        }
    }
    energy
}

#[derive(Debug, Clone, PartialEq)]
pub struct StressReport {
    /// Tension positive, Pa.
    pub total: Vec<Voigt>,
    /// Tension positive, Pa.
    pub effective: Vec<Voigt>,
    /// Mean effective stress, compression positive, Pa.
    pub mean_effective: Vec<f64>,
    /// Confining total stress minus cell gas pressure, Pa.
    pub apparent_effective: Vec<f64>,
}

pub fn effective_stress_report(db: &MaterialDb, state: &MechState, gas_pressure: &[f64]) -> StressReport {
    let alpha = db.biot_coefficient;
    let total = state
        .effective_stress
        .iter()
        .zip(&state.pore_pressure)
        .map(|(s, p)| [s[0] - alpha * p, s[1] - alpha * p, s[2] - alpha * p, s[3]])
        .collect();
    let confining = state.boundary.confining_stress();
    StressReport {
        total,
        effective: state.effective_stress.clone(),
        mean_effective: state.mean_effective_stress(),
        apparent_effective: gas_pressure.iter().map(|p| confining - p).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    fn zero_state(grid: &AxiGrid, boundary: MechBoundary) -> MechState {
        MechState {
            displacement: vec![[0.0; 2]; grid.num_vertices()],
            strain: vec![[0.0; 4]; grid.num_cells()],
            effective_stress: vec![[0.0; 4]; grid.num_cells()],
            pore_pressure: vec![0.0; grid.num_cells()],
            bulk_density: Vec::new(),
            boundary,
        }
    }

    fn loads(grid: &AxiGrid, e: f64, boundary: MechBoundary) -> MechLoads {
        MechLoads {
            pore_pressure: vec![0.0; grid.num_cells()],
            young_modulus: vec![e; grid.num_cells()],
            bulk_density: Vec::new(),
            boundary,
        }
    }

    fn solve(grid: &AxiGrid, db: &MaterialDb, l: &MechLoads) -> MechState {
        let prev = zero_state(grid, MechBoundary::isotropic(0.0));
        solve_increment(grid, db, &GeomechConfig::default(), &prev, l, &mut DirectSolver::new()).unwrap()
    }

    #[test]
    fn unloaded_body_stays_put() {
        let grid = build_grid(4, 3, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let s = solve(&grid, &db, &loads(&grid, 1e8, MechBoundary::isotropic(0.0)));
        assert!(s.displacement.iter().all(|u| u[0] == 0.0 && u[1] == 0.0));
    }

    #[test]
    fn isotropic_patch_test() {
        let grid = build_grid(6, 4, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let (e, sigma) = (132e6, 1e6);
        let s = solve(&grid, &db, &loads(&grid, e, MechBoundary::isotropic(sigma)));
        let nu = db.poisson_ratio;
        let exact = 3.0 * sigma * (1.0 - 2.0 * nu) / e;
        for c in 0..grid.num_cells() {
            assert!((s.volumetric_strain(c) - exact).abs() < 1e-10 * exact);
            for p in 0..3 {
                assert!((s.effective_stress[c][p] + sigma).abs() < 1e-8 * sigma);
            }
            assert!(s.effective_stress[c][3].abs() < 1e-8 * sigma);
        }
        assert!((s.domain_volumetric_strain(&grid) - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn uniform_pore_pressure_acts_like_negative_traction() {
        let grid = build_grid(5, 3, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let mut l = loads(&grid, 1e8, MechBoundary::isotropic(2e6));
        l.pore_pressure = vec![1e6; grid.num_cells()];
        let s = solve(&grid, &db, &l);
        let eff = 2e6 - db.biot_coefficient * 1e6;
        let exact = 3.0 * eff * (1.0 - 2.0 * db.poisson_ratio) / 1e8;
        assert!((s.domain_volumetric_strain(&grid) - exact).abs() < 1e-10 * exact);
        let rep = effective_stress_report(&db, &s, &vec![1e6; grid.num_cells()]);
        assert!((rep.total[0][0] + 2e6).abs() < 1e-6);
        assert!((rep.apparent_effective[0] - 1e6).abs() < 1e-9);
    }

    #[test]
    fn zero_biot_decouples_pore_pressure() {
        let grid = build_grid(4, 2, 0.36, 0.04).unwrap();
        let db = MaterialDb {
            biot_coefficient: 0.0,
            ..MaterialDb::default()
        };
        let mut l = loads(&grid, 1e8, MechBoundary::isotropic(0.0));
        l.pore_pressure = (0..grid.num_cells()).map(|c| 1e6 * (1.0 + c as f64)).collect();
        let s = solve(&grid, &db, &l);
        assert!(s.displacement.iter().all(|u| u[0] == 0.0 && u[1] == 0.0));
    }

    #[test]
    fn zero_pressure_total_equals_effective() {
        let grid = build_grid(3, 2, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let s = solve(&grid, &db, &loads(&grid, 1e8, MechBoundary::triaxial(2e6, 1e6)));
        let rep = effective_stress_report(&db, &s, &vec![0.0; grid.num_cells()]);
        assert_eq!(rep.total, rep.effective);
    }

    #[test]
    fn doubling_modulus_halves_displacement() {
        let grid = build_grid(6, 3, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let mut l = loads(&grid, 1e8, MechBoundary::triaxial(3e6, 1e6));
        l.young_modulus = (0..grid.num_cells()).map(|c| 1e8 * (1.0 + 0.1 * c as f64)).collect();
        let a = solve(&grid, &db, &l);
        l.young_modulus.iter_mut().for_each(|e| *e *= 2.0);
        let b = solve(&grid, &db, &l);
        for (ua, ub) in a.displacement.iter().zip(&b.displacement) {
            for k in 0..2 {
                assert!((ua[k] - 2.0 * ub[k]).abs() <= 1e-12 * ua[k].abs().max(1e-12));
            }
        }
    }

    #[test]
    fn axial_load_gives_equal_lateral_strains() {
        let grid = build_grid(6, 4, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let s = solve(&grid, &db, &loads(&grid, 1e8, MechBoundary::triaxial(1e6, 0.0)));
        let nu = db.poisson_ratio;
        for e in &s.strain {
            assert!((e[1] - e[2]).abs() < 1e-10 * e[0].abs());
            assert!((e[0] + 1e6 / 1e8).abs() < 1e-10 * 1e-2);
            assert!((e[1] - nu * 1e6 / 1e8).abs() < 1e-10 * 1e-2);
        }
    }

    #[test]
    fn formation_modulus_at_forty_percent() {
        let db = MaterialDb::default();
        let e = element_young_moduli(&db, Regime::Formation, &[0.4; 3], None);
        assert!(e.iter().all(|v| (v - 132e6).abs() < 1e-3));
    }

    #[test]
    fn incremental_loading_matches_single_step() {
        let grid = build_grid(4, 3, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let cfg = GeomechConfig::default();
        let mut solver = DirectSolver::new();
        let full = solve(&grid, &db, &loads(&grid, 1e8, MechBoundary::isotropic(2e6)));
        let half = solve(&grid, &db, &loads(&grid, 1e8, MechBoundary::isotropic(1e6)));
        let two = solve_increment(&grid, &db, &cfg, &half, &loads(&grid, 1e8, MechBoundary::isotropic(2e6)), &mut solver).unwrap();
        for (a, b) in full.strain.iter().zip(&two.strain) {
            for p in 0..4 {
                assert!((a[p] - b[p]).abs() < 1e-12 * 1e-2);
            }
        }
    }

    #[test]
    fn stiffening_does_not_recover_strain() {
        let grid = build_grid(3, 2, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let cfg = GeomechConfig::default();
        let l = loads(&grid, 1e8, MechBoundary::isotropic(1e6));
        let s = solve(&grid, &db, &l);
        let stiff = MechLoads {
            young_modulus: vec![5e8; grid.num_cells()],
            ..l
        };
        let t = solve_increment(&grid, &db, &cfg, &s, &stiff, &mut DirectSolver::new()).unwrap();
        assert_eq!(s.strain, t.strain);
    }

    #[test]
    fn secant_softening_under_constant_load_deforms() {
        let grid = build_grid(3, 2, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let cfg = GeomechConfig::default();
        let reference = zero_state(&grid, MechBoundary::isotropic(0.0));
        let l = loads(&grid, 1e8, MechBoundary::isotropic(1e6));
        let stiff = solve(&grid, &db, &l);
        let soft = MechLoads {
            young_modulus: vec![5e7; grid.num_cells()],
            ..l
        };
        let s = solve_increment(&grid, &db, &cfg, &reference, &soft, &mut DirectSolver::new()).unwrap();
        for (a, b) in stiff.strain.iter().zip(&s.strain) {
            for p in 0..4 {
                assert!((2.0 * a[p] - b[p]).abs() < 1e-12);
            }
        }
        for (a, b) in stiff.effective_stress.iter().zip(&s.effective_stress) {
            for p in 0..4 {
                assert!((a[p] - b[p]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn unrestrained_sample_is_rejected() {
        let grid = build_grid(2, 2, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let mut b = MechBoundary::isotropic(1e6);
        b.set(Side::Bottom, MechBc::Traction(1e6));
        let l = loads(&grid, 1e8, b);
        let prev = zero_state(&grid, MechBoundary::isotropic(0.0));
        let err = solve_increment(&grid, &db, &GeomechConfig::default(), &prev, &l, &mut DirectSolver::new()).unwrap_err();
        assert!(matches!(err, Error::MechanicalSetup(_)));
    }

    #[test]
    fn body_force_compresses_the_base() {
        let grid = build_grid(8, 2, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let cfg = GeomechConfig {
            body_force: Some(9.81),
            ..GeomechConfig::default()
        };
        let mut prev = zero_state(&grid, MechBoundary::isotropic(0.0));
        prev.bulk_density = vec![0.0; grid.num_cells()];
        let mut l = loads(&grid, 1e8, MechBoundary::isotropic(0.0));
        l.bulk_density = vec![2000.0; grid.num_cells()];
        let s = solve_increment(&grid, &db, &cfg, &prev, &l, &mut DirectSolver::new()).unwrap();
        let top = grid.boundary_cells(Side::Top)[0];
        assert!(s.volumetric_strain(0) > s.volumetric_strain(top));
        assert!(s.displacement[grid.boundary_vertices(Side::Top)[0]][0] < 0.0);
    }

    #[test]
    fn pore_pressure_weighting() {
        let p = effective_pore_pressure(PoreWeighting::Normalized, 0.3, 9e6, 0.3, 10e6);
        assert!((p - 9.5e6).abs() < 1e-6);
        let q = effective_pore_pressure(PoreWeighting::Unnormalized, 0.3, 9e6, 0.3, 10e6);
        assert!((q - 5.7e6).abs() < 1e-6);
        assert_eq!(effective_pore_pressure(PoreWeighting::Normalized, 0.0, 0.0, 0.0, 4e6), 4e6);
    }
}
