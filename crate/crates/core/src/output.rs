//! Result files: CSV time series and step log, legacy VTK snapshots and a
//! plot-data bundle with one `(t, value…)` file per plot panel.
//!
//! All CSV files use SI units, `.` as decimal separator and a header row.
//! Numbers are written in shortest round-trip form so identical runs give
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::constitutive::Regime;
use crate::coupling::{RunArtifacts, StepReport, TimeSeriesRow};
use crate::error::{Error, Result};
use crate::grid::AxiGrid;
use crate::state::FieldSnapshot;

/// Which files a run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputSelection {
    pub time_series: bool,
    pub steps: bool,
    pub vtk: bool,
    pub plots: bool,
}

impl Default for OutputSelection {
    fn default() -> Self {
        OutputSelection {
            time_series: true,
            steps: true,
            vtk: true,
            plots: true,
        }
    }
}

impl OutputSelection {
    pub const NAMES: [&'static str; 4] = ["timeseries", "steps", "vtk", "plots"];

    pub fn none() -> Self {
        OutputSelection {
            time_series: false,
            steps: false,
            vtk: false,
            plots: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::none()
    }

    /// `none` or a comma-separated subset of [`Self::NAMES`].
    pub fn parse(text: &str) -> Option<Self> {
        let mut s = Self::none();
        if text.trim() == "none" {
            return Some(s);
        }
        for item in text.split(',') {
            match item.trim() {
                "timeseries" => s.time_series = true,
                "steps" => s.steps = true,
                "vtk" => s.vtk = true,
                "plots" => s.plots = true,
                _ => return None,
            }
        }
        Some(s)
    }

    pub fn name(&self) -> String {
        let on = [self.time_series, self.steps, self.vtk, self.plots];
        let names: Vec<&str> = Self::NAMES.iter().zip(on).filter(|(_, b)| *b).map(|(n, _)| *n).collect();
        if names.is_empty() {
            "none".into()
        } else {
            names.join(", ")
        }
    }
}

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub const TIME_SERIES_HEADER: [&str; 16] = [
    "time_s",
    "gas_pressure_Pa",
    "water_saturation",
    "hydrate_saturation",
    "temperature_K",
    "min_temperature_K",
    "porosity",
    "volumetric_strain",
    "produced_gas_mol",
    "produced_gas_std_m3",
    "outlet_gas_pressure_Pa",
    "young_modulus_Pa",
    "hydrate_mol",
    "dissociation_rate_mol_per_s",
    "total_stress_Pa",
    "outlet_pressure_Pa",
];

pub fn write_time_series(path: &Path, rows: &[TimeSeriesRow]) -> Result<()> {
    write_table(
        path,
        &TIME_SERIES_HEADER,
        rows.iter().map(|r| {
            [
                r.time,
                r.gas_pressure,
                r.water_saturation,
                r.hydrate_saturation,
                r.temperature,
                r.min_temperature,
                r.porosity,
                r.volumetric_strain,
                r.produced_gas_mol,
                r.produced_gas_std_volume,
                r.outlet_gas_pressure,
                r.young_modulus,
                r.hydrate_moles,
                r.dissociation_rate,
                r.total_stress,
                r.outlet_pressure,
            ]
            .map(num)
            .to_vec()
        }),
    )
}

pub fn write_steps(path: &Path, steps: &[StepReport]) -> Result<()> {
    let header = [
        "step",
        "time_s",
        "dt_s",
        "outer_iterations",
        "newton_iterations",
        "newton_per_outer",
        "last_outer_change",
        "converged",
        "retries",
        "damped_steps",
        "clip_events",
        "methane_inventory_kg",
        "produced_methane_kg",
        "methane_balance_error",
        "total_stress_Pa",
        "outlet_pressure_Pa",
    ];
    write_table(
        path,
        &header,
        steps.iter().map(|s| {
            vec![
                s.step.to_string(),
                num(s.time),
                num(s.dt),
                s.outer_iterations.to_string(),
                s.total_newton_iterations().to_string(),
                s.newton_iterations.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";"),
                num(s.outer_changes.last().copied().unwrap_or(0.0)),
                s.converged.to_string(),
                s.retries.to_string(),
                s.damped_steps.to_string(),
                s.clip_events.to_string(),
                num(s.methane_inventory),
                num(s.produced_methane),
                num(s.methane_balance_error),
                num(s.total_stress),
                num(s.outlet_pressure.unwrap_or(f64::NAN)),
            ]
        }),
    )
}

/// Legacy ASCII structured grid in the `(r, z)` plane; displacement as a
/// point vector, everything else as cell scalars.
pub fn write_vtk(path: &Path, grid: &AxiGrid, snap: &FieldSnapshot) -> Result<()> {
    let (nz, nr) = (grid.nz, grid.nr);
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "hydrate sample t = {} s", snap.time);
    let _ = writeln!(s, "ASCII\nDATASET STRUCTURED_GRID");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", nr + 1, nz + 1);
    let _ = writeln!(s, "POINTS {} double", grid.num_vertices());
    for v in &grid.vertex_coords {
        let _ = writeln!(s, "{} {} 0", v[1], v[0]);
    }
    let _ = writeln!(s, "POINT_DATA {}", grid.num_vertices());
    let _ = writeln!(s, "VECTORS displacement double");
    for u in &snap.displacement {
        let _ = writeln!(s, "{} {} 0", u[1], u[0]);
    }
    let _ = writeln!(s, "CELL_DATA {}", grid.num_cells());
    let fields: [(&str, &[f64]); 13] = [
        ("gas_pressure", &snap.gas_pressure),
        ("water_saturation", &snap.water_saturation),
        ("hydrate_saturation", &snap.hydrate_saturation),
        ("temperature", &snap.temperature),
        ("porosity", &snap.porosity),
        ("methane_undersaturation", &snap.undersaturation),
        ("water_pressure", &snap.water_pressure),
        ("capillary_pressure", &snap.capillary_pressure),
        ("gas_density", &snap.gas_density),
        ("permeability", &snap.permeability),
        ("young_modulus", &snap.young_modulus),
        ("mean_effective_stress", &snap.effective_stress),
        ("volumetric_strain", &snap.volumetric_strain),
    ];
    for (name, values) in fields {
        if values.len() != grid.num_cells() {
            return Err(Error::Dimension {
                expected: grid.num_cells(),
                actual: values.len(),
            });
        }
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(s, "{v}");
        }
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// One plot-data file: name, column headers, column extractors.
type Panel = (&'static str, &'static [&'static str], fn(&TimeSeriesRow) -> Vec<f64>);

const FORMATION_PANELS: [Panel; 3] = [
    ("formation_average_gas_pressure.csv", &["time_s", "gas_pressure_Pa"], |r| vec![r.gas_pressure]),
    (
        "formation_average_saturations.csv",
        &["time_s", "water_saturation", "hydrate_saturation"],
        |r| vec![r.water_saturation, r.hydrate_saturation],
    ),
    ("formation_volumetric_strain.csv", &["time_s", "volumetric_strain"], |r| vec![r.volumetric_strain]),
];

const DISSOCIATION_PANELS: [Panel; 4] = [
    (
        "dissociation_outlet_gas_pressure.csv",
        &["time_s", "outlet_gas_pressure_Pa", "back_pressure_Pa"],
        |r| vec![r.outlet_gas_pressure, r.outlet_pressure],
    ),
    (
        "dissociation_cumulative_gas.csv",
        &["time_s", "produced_gas_mol", "produced_gas_std_m3"],
        |r| vec![r.produced_gas_mol, r.produced_gas_std_volume],
    ),
    ("dissociation_volumetric_strain.csv", &["time_s", "volumetric_strain"], |r| vec![r.volumetric_strain]),
    (
        "dissociation_temperature.csv",
        &["time_s", "mean_temperature_K", "min_temperature_K"],
        |r| vec![r.temperature, r.min_temperature],
    ),
];

/// Plot-data files for the panels of one regime; returns the paths written.
pub fn write_plot_bundle(dir: &Path, regime: Regime, rows: &[TimeSeriesRow]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let panels: &[Panel] = match regime {
        Regime::Formation => &FORMATION_PANELS,
        Regime::Dissociation => &DISSOCIATION_PANELS,
    };
    let mut written = Vec::new();
    for (name, header, columns) in panels {
        let path = dir.join(name);
        write_table(
            &path,
            header,
            rows.iter().map(|r| std::iter::once(r.time).chain(columns(r)).map(num).collect()),
        )?;
        written.push(path);
    }
    Ok(written)
}

/// Linear interpolation of `(t, y)` samples at `t`, clamped at the ends.
pub fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|&ti| ti < t);
    if k == 0 {
        return values[0];
    }
    if k == times.len() {
        return values[k - 1];
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
    values[k - 1] + w * (values[k] - values[k - 1])
}

/// Volumetric strain of several runs on the time grid of the first one.
/// Each curve is labelled by its parameter value.
pub fn write_multi_curve(path: &Path, parameter: &str, curves: &[(f64, Vec<TimeSeriesRow>)]) -> Result<()> {
    let Some((_, first)) = curves.first() else {
        return Err(Error::Config("no curves to write".into()));
    };
    let labels: Vec<String> = curves.iter().map(|(v, _)| format!("volumetric_strain_{parameter}={v}")).collect();
    let mut header = vec!["time_s"];
    header.extend(labels.iter().map(String::as_str));
    let sampled: Vec<(Vec<f64>, Vec<f64>)> = curves
        .iter()
        .map(|(_, rows)| (rows.iter().map(|r| r.time).collect(), rows.iter().map(|r| r.volumetric_strain).collect()))
        .collect();
    write_table(
        path,
        &header,
        first.iter().map(|r| {
            std::iter::once(r.time)
                .chain(sampled.iter().map(|(t, y)| interpolate(t, y, r.time)))
                .map(num)
                .collect()
        }),
    )
}

/// Write the selected files of one run into `dir`; returns the paths.
pub fn write_outputs(
    dir: &Path,
    grid: &AxiGrid,
    regime: Regime,
    artifacts: &RunArtifacts,
    selection: OutputSelection,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if selection.is_empty() {
        return Ok(written);
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if selection.time_series {
        let p = dir.join("timeseries.csv");
        write_time_series(&p, &artifacts.time_series)?;
        written.push(p);
    }
    if selection.steps {
        let p = dir.join("steps.csv");
        write_steps(&p, &artifacts.steps)?;
        written.push(p);
    }
    if selection.vtk {
        for (k, snap) in artifacts.snapshots.iter().enumerate() {
            let p = dir.join(format!("snapshot_{k:03}.vtk"));
            write_vtk(&p, grid, snap)?;
            written.push(p);
        }
    }
    if selection.plots {
        written.extend(write_plot_bundle(&dir.join("plots"), regime, &artifacts.time_series)?);
    }
    Ok(written)
}
