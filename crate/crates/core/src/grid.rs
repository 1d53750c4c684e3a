//! Structured axisymmetric grid on the meridional (z, r) plane.
//!
//! Cells are indexed `c = i * nr + j` with `i` the axial and `j` the radial
//! index; vertices `v = i * (nr + 1) + j`. Volumes and face areas are those
//! of the bodies of revolution, i.e. they carry the full `2πr` factor.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Boundary segments of the meridional rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// z = 0
    Bottom,
    /// z = height
    Top,
    /// r = 0, symmetry axis
    Axis,
    /// r = radius
    Outer,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Top, Side::Axis, Side::Outer];

    pub fn name(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Top => "top",
            Side::Axis => "axis",
            Side::Outer => "outer",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s.trim() {
            "bottom" => Some(Side::Bottom),
            "top" => Some(Side::Top),
            "axis" => Some(Side::Axis),
            "outer" => Some(Side::Outer),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Axial,
    Radial,
}

/// A face of the finite volume grid. The normal points from `left` towards
/// `right`; for boundary faces it is the outward normal of `left`.
#[derive(Debug, Clone)]
pub struct Face {
    pub left: usize,
    pub right: Option<usize>,
    pub side: Option<Side>,
    pub direction: Direction,
    /// +1 when the normal points along +z / +r, −1 otherwise.
    pub orientation: f64,
    pub area: f64,
    /// Distance from the left cell centre to the face.
    pub dist_left: f64,
    /// Distance from the face to the right cell centre (0 for boundaries).
    pub dist_right: f64,
    /// Face centre (z, r).
    pub center: [f64; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct AxiGrid {
    pub nz: usize,
    pub nr: usize,
    pub height: f64,
    pub radius: f64,
    pub z_edges: Vec<f64>,
    pub r_edges: Vec<f64>,
    /// (z, r) per cell
    pub cell_centers: Vec<[f64; 2]>,
    pub cell_volumes: Vec<f64>,
    /// (z, r) per vertex
    pub vertex_coords: Vec<[f64; 2]>,
    pub faces: Vec<Face>,
    pub cell_faces: Vec<Vec<usize>>,
    /// Counter-clockwise in the (r, z) plane: (i,j), (i,j+1), (i+1,j+1), (i+1,j).
    pub cell_vertices: Vec<[usize; 4]>,
}

/// Build the grid for a cylinder of the given height and radius.
pub fn build_grid(nz: usize, nr: usize, height: f64, radius: f64) -> Result<AxiGrid> {
    if nz == 0 || nr == 0 {
        return Err(Error::Config(format!(
            "grid needs at least one cell per direction (nz = {nz}, nr = {nr})"
        )));
    }
    if !(height > 0.0 && height.is_finite() && radius > 0.0 && radius.is_finite()) {
        return Err(Error::Config(format!(
            "grid dimensions must be positive (height = {height}, radius = {radius})"
        )));
    }
    let dz = height / nz as f64;
    let dr = radius / nr as f64;
    let z_edges: Vec<f64> = (0..=nz).map(|i| i as f64 * dz).collect();
    let r_edges: Vec<f64> = (0..=nr).map(|j| j as f64 * dr).collect();

    let ncells = nz * nr;
    let mut cell_centers = Vec::with_capacity(ncells);
    let mut cell_volumes = Vec::with_capacity(ncells);
    let mut cell_vertices = Vec::with_capacity(ncells);
    for i in 0..nz {
        for j in 0..nr {
            let (r0, r1) = (r_edges[j], r_edges[j + 1]);
            cell_centers.push([0.5 * (z_edges[i] + z_edges[i + 1]), 0.5 * (r0 + r1)]);
            cell_volumes.push(PI * (r1 * r1 - r0 * r0) * dz);
            let v0 = i * (nr + 1) + j;
            cell_vertices.push([v0, v0 + 1, v0 + nr + 2, v0 + nr + 1]);
        }
    }

    let mut vertex_coords = Vec::with_capacity((nz + 1) * (nr + 1));
    for z in &z_edges {
        for r in &r_edges {
            vertex_coords.push([*z, *r]);
        }
    }

    let cell = |i: usize, j: usize| i * nr + j;
    let axial_area = |j: usize| PI * (r_edges[j + 1].powi(2) - r_edges[j].powi(2));
    let radial_area = |j: usize| 2.0 * PI * r_edges[j] * dz;

    let mut faces = Vec::new();
    // axial faces, bottom to top
    for i in 0..=nz {
        for j in 0..nr {
            let rc = 0.5 * (r_edges[j] + r_edges[j + 1]);
            let center = [z_edges[i], rc];
            let face = if i == 0 {
                Face {
                    left: cell(0, j),
                    right: None,
                    side: Some(Side::Bottom),
                    direction: Direction::Axial,
                    orientation: -1.0,
                    area: axial_area(j),
                    dist_left: 0.5 * dz,
                    dist_right: 0.0,
                    center,
                }
            } else if i == nz {
                Face {
                    left: cell(nz - 1, j),
                    right: None,
                    side: Some(Side::Top),
                    direction: Direction::Axial,
                    orientation: 1.0,
                    area: axial_area(j),
                    dist_left: 0.5 * dz,
                    dist_right: 0.0,
                    center,
                }
            } else {
                Face {
                    left: cell(i - 1, j),
                    right: Some(cell(i, j)),
                    side: None,
                    direction: Direction::Axial,
                    orientation: 1.0,
                    area: axial_area(j),
                    dist_left: 0.5 * dz,
                    dist_right: 0.5 * dz,
                    center,
                }
            };
            faces.push(face);
        }
    }
    // radial faces, axis to outer wall
    for i in 0..nz {
        let zc = 0.5 * (z_edges[i] + z_edges[i + 1]);
        for j in 0..=nr {
            let center = [zc, r_edges[j]];
            let face = if j == 0 {
                Face {
                    left: cell(i, 0),
                    right: None,
                    side: Some(Side::Axis),
                    direction: Direction::Radial,
                    orientation: -1.0,
                    area: 0.0,
                    dist_left: 0.5 * dr,
                    dist_right: 0.0,
                    center,
                }
            } else if j == nr {
                Face {
                    left: cell(i, nr - 1),
                    right: None,
                    side: Some(Side::Outer),
                    direction: Direction::Radial,
                    orientation: 1.0,
                    area: radial_area(nr),
                    dist_left: 0.5 * dr,
                    dist_right: 0.0,
                    center,
                }
            } else {
                Face {
                    left: cell(i, j - 1),
                    right: Some(cell(i, j)),
                    side: None,
                    direction: Direction::Radial,
                    orientation: 1.0,
                    area: radial_area(j),
                    dist_left: 0.5 * dr,
                    dist_right: 0.5 * dr,
                    center,
                }
            };
            faces.push(face);
        }
    }

    let mut cell_faces = vec![Vec::with_capacity(4); ncells];
    for (f, face) in faces.iter().enumerate() {
        cell_faces[face.left].push(f);
        if let Some(r) = face.right {
            cell_faces[r].push(f);
        }
    }

    Ok(AxiGrid {
        nz,
        nr,
        height,
        radius,
        z_edges,
        r_edges,
        cell_centers,
        cell_volumes,
        vertex_coords,
        faces,
        cell_faces,
        cell_vertices,
    })
}

impl AxiGrid {
    pub fn num_cells(&self) -> usize {
        self.nz * self.nr
    }

    pub fn num_vertices(&self) -> usize {
        (self.nz + 1) * (self.nr + 1)
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i * self.nr + j
    }

    pub fn dz(&self) -> f64 {
        self.height / self.nz as f64
    }

    pub fn dr(&self) -> f64 {
        self.radius / self.nr as f64
    }

    pub fn total_volume(&self) -> f64 {
        self.cell_volumes.iter().sum()
    }

    /// Cells adjacent to a boundary segment, ordered along the segment.
    pub fn boundary_cells(&self, side: Side) -> Vec<usize> {
        match side {
            Side::Bottom => (0..self.nr).collect(),
            Side::Top => (0..self.nr).map(|j| self.cell_index(self.nz - 1, j)).collect(),
            Side::Axis => (0..self.nz).map(|i| self.cell_index(i, 0)).collect(),
            Side::Outer => (0..self.nz).map(|i| self.cell_index(i, self.nr - 1)).collect(),
        }
    }

    /// Vertices lying on a boundary segment.
    pub fn boundary_vertices(&self, side: Side) -> Vec<usize> {
        let w = self.nr + 1;
        match side {
            Side::Bottom => (0..w).collect(),
            Side::Top => (0..w).map(|j| self.nz * w + j).collect(),
            Side::Axis => (0..=self.nz).map(|i| i * w).collect(),
            Side::Outer => (0..=self.nz).map(|i| i * w + self.nr).collect(),
        }
    }

    /// Volume-weighted average over a cell field.
    pub fn volume_average(&self, field: &[f64]) -> f64 {
        let (num, den) = field
            .iter()
            .zip(&self.cell_volumes)
            .fold((0.0, 0.0), |(n, d), (f, v)| (n + f * v, d + v));
        num / den
    }

    /// Volume-weighted average of adjacent cell values at every vertex.
    pub fn interpolate_cell_to_vertex(&self, field: &[f64]) -> Result<Vec<f64>> {
        if field.len() != self.num_cells() {
            return Err(Error::Dimension {
                expected: self.num_cells(),
                actual: field.len(),
            });
        }
        let nv = self.num_vertices();
        let mut num = vec![0.0; nv];
        let mut den = vec![0.0; nv];
        for (c, verts) in self.cell_vertices.iter().enumerate() {
            let w = self.cell_volumes[c];
            for &v in verts {
                num[v] += w * field[c];
                den[v] += w;
            }
        }
        Ok(num.iter().zip(&den).map(|(n, d)| n / d).collect())
    }
}
