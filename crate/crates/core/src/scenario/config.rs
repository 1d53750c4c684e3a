//! Flat `key = value` scenario files.
//!
//! Every physical value carries a unit and is converted to SI on load.
//! Unknown keys and keys that do not apply to the chosen controller are
//! rejected. Writing a config and reading it back yields an identical value.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::control::{Controls, FlowControl, PressureSchedule, StressControl};
use super::units::{
    format_quantity, format_quantity_list, parse_quantity, parse_quantity_list, Dim,
};
use crate::constitutive::{MaterialDb, Regime};
use crate::coupling::{BlockOrder, CouplingConfig, OutputPlan, Simulation};
use crate::output::OutputSelection;
use crate::error::{Error, Result};
use crate::geomech::{MechFormulation, PoreWeighting};
use crate::grid::{build_grid, AxiGrid, Side};
use crate::kinetics::{KineticParams, SurfaceAreaModel};
use crate::state::PrimaryState;
use crate::transport::{JacobianMode, ThermalBc};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nz: usize,
    pub nr: usize,
    /// m
    pub height: f64,
    /// m
    pub radius: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<AxiGrid> {
        build_grid(self.nz, self.nr, self.height, self.radius)
    }

    pub fn num_cells(&self) -> usize {
        self.nz * self.nr
    }
}

/// One value for every cell, or one per cell in cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField(pub Vec<f64>);

impl CellField {
    pub fn uniform(v: f64) -> Self {
        CellField(vec![v])
    }

    pub fn expand(&self, name: &str, ncells: usize) -> Result<Vec<f64>> {
        match self.0.len() {
            1 => Ok(vec![self.0[0]; ncells]),
            n if n == ncells => Ok(self.0.clone()),
            n => Err(Error::Config(format!("{name}: expected 1 or {ncells} values, got {n}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialFields {
    pub gas_pressure: CellField,
    pub water_saturation: CellField,
    pub hydrate_saturation: CellField,
    pub temperature: CellField,
    pub porosity: CellField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: GridSpec,
    pub initial: InitialFields,
    pub material: MaterialDb,
    pub kinetics: KineticParams,
    /// Also carries the regime tag and `dt_max`.
    pub coupling: CouplingConfig,
    pub controls: Controls,
    pub output: OutputPlan,
    pub files: OutputSelection,
    /// s
    pub t_end: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            name: "scenario".into(),
            grid: GridSpec {
                nz: 72,
                nr: 8,
                height: 0.36,
                radius: 0.04,
            },
            initial: InitialFields {
                gas_pressure: CellField::uniform(12.5e6),
                water_saturation: CellField::uniform(0.4),
                hydrate_saturation: CellField::uniform(0.0),
                temperature: CellField::uniform(275.15),
                porosity: CellField::uniform(0.35),
            },
            material: MaterialDb::default(),
            kinetics: KineticParams::default(),
            coupling: CouplingConfig::default(),
            controls: Controls::default(),
            output: OutputPlan::default(),
            files: OutputSelection::default(),
            t_end: 604800.0,
        }
    }
}

type Slot = fn(&mut ScenarioConfig) -> &mut f64;

/// Plain scalar keys, in file order.
const SCALARS: &[(&str, Dim, Slot)] = &[
    ("t_end", Dim::Time, |c| &mut c.t_end),
    ("dt_max", Dim::Time, |c| &mut c.coupling.dt_max),
    ("dt_min", Dim::Time, |c| &mut c.coupling.dt_min),
    ("dt_initial", Dim::Time, |c| &mut c.coupling.dt_initial),
    ("dt_growth", Dim::Dimensionless, |c| &mut c.coupling.dt_growth),
    ("grid.height", Dim::Length, |c| &mut c.grid.height),
    ("grid.radius", Dim::Length, |c| &mut c.grid.radius),
    ("output.timeseries_interval", Dim::Time, |c| &mut c.output.timeseries_interval),
    // hydrate kinetics
    ("k_reac_formation", Dim::RateConstant, |c| &mut c.kinetics.formation_rate),
    ("k_reac_dissociation", Dim::RateConstant, |c| &mut c.kinetics.dissociation_rate),
    ("N_hyd", Dim::Dimensionless, |c| &mut c.kinetics.hydration_number),
    ("B1", Dim::MolarEnergy, |c| &mut c.kinetics.heat_b1),
    ("B2", Dim::MolarEntropy, |c| &mut c.kinetics.heat_b2),
    // equilibrium pressure and salinity
    ("A1", Dim::Pressure, |c| &mut c.material.equilibrium_prefactor),
    ("A2", Dim::Dimensionless, |c| &mut c.material.equilibrium_a2),
    ("A3", Dim::TemperatureDifference, |c| &mut c.material.equilibrium_a3),
    ("salinity", Dim::Dimensionless, |c| &mut c.material.salinity),
    ("salinity_slope", Dim::Dimensionless, |c| &mut c.material.salinity_slope),
    // poro-elasticity
    ("alpha_biot", Dim::Dimensionless, |c| &mut c.material.biot_coefficient),
    ("nu_sh", Dim::Dimensionless, |c| &mut c.material.poisson_ratio),
    ("E_s_formation", Dim::Pressure, |c| &mut c.material.formation_stiffness.sand_modulus),
    ("E_h_formation", Dim::Pressure, |c| &mut c.material.formation_stiffness.hydrate_modulus),
    ("c_formation", Dim::Dimensionless, |c| &mut c.material.formation_stiffness.exponent),
    ("E_s_dissociation", Dim::Pressure, |c| &mut c.material.dissociation_stiffness.sand_modulus),
    ("E_h_dissociation", Dim::Pressure, |c| &mut c.material.dissociation_stiffness.hydrate_modulus),
    ("c_dissociation", Dim::Dimensionless, |c| &mut c.material.dissociation_stiffness.exponent),
    ("E_stress_sensitivity", Dim::Compliance, |c| &mut c.material.modulus_stress_sensitivity),
    // hydraulics
    ("K_0", Dim::Permeability, |c| &mut c.material.intrinsic_permeability),
    ("phi_0", Dim::Dimensionless, |c| &mut c.material.reference_porosity),
    ("lambda_BC", Dim::Dimensionless, |c| &mut c.material.bc_lambda),
    ("P_entry", Dim::Pressure, |c| &mut c.material.entry_pressure),
    ("S_wr", Dim::Dimensionless, |c| &mut c.material.residual_water_saturation),
    ("S_gr", Dim::Dimensionless, |c| &mut c.material.residual_gas_saturation),
    ("K_hydrate_exponent", Dim::Dimensionless, |c| &mut c.material.hydrate_permeability_exponent),
    ("P_c_leverett_exponent", Dim::Dimensionless, |c| &mut c.material.leverett_exponent),
    ("P_c_cap_saturation", Dim::Dimensionless, |c| &mut c.material.capillary_cap_saturation),
    ("P_c_cap_factor", Dim::Dimensionless, |c| &mut c.material.capillary_cap_factor),
    // thermal and phase properties
    ("k_c_h", Dim::Conductivity, |c| &mut c.material.conductivity_hydrate),
    ("k_c_s", Dim::Conductivity, |c| &mut c.material.conductivity_sand),
    ("dCp_res_g", Dim::Dimensionless, |c| &mut c.material.cp_gas_residual_factor),
    ("Cp_w", Dim::SpecificHeat, |c| &mut c.material.cp_water),
    ("Cv_h", Dim::SpecificHeat, |c| &mut c.material.cv_hydrate),
    ("Cv_s", Dim::SpecificHeat, |c| &mut c.material.cv_sand),
    ("rho_w", Dim::Density, |c| &mut c.material.density_water),
    ("rho_h", Dim::Density, |c| &mut c.material.density_hydrate),
    ("rho_s", Dim::Density, |c| &mut c.material.density_sand),
    ("henry_constant", Dim::Pressure, |c| &mut c.material.henry_constant),
    ("henry_temperature", Dim::TemperatureDifference, |c| &mut c.material.henry_temperature),
    ("diffusion_coefficient", Dim::Diffusivity, |c| &mut c.material.diffusion_coefficient),
    ("eos.T_c", Dim::Temperature, |c| &mut c.material.eos.critical_temperature),
    ("eos.P_c", Dim::Pressure, |c| &mut c.material.eos.critical_pressure),
    ("eos.omega", Dim::Dimensionless, |c| &mut c.material.eos.acentric_factor),
    ("eos.M", Dim::MolarMass, |c| &mut c.material.eos.molar_mass),
    // solver
    ("coupling.outer_tol_phi", Dim::Dimensionless, |c| &mut c.coupling.porosity_tol),
    ("coupling.outer_tol_strain", Dim::Dimensionless, |c| &mut c.coupling.strain_tol),
    ("coupling.relaxation", Dim::Dimensionless, |c| &mut c.coupling.relaxation),
    ("transport.gravity", Dim::Acceleration, |c| &mut c.coupling.transport.gravity),
    ("transport.max_saturation_change", Dim::Dimensionless, |c| &mut c.coupling.transport.max_saturation_change),
    ("transport.max_temperature_change", Dim::TemperatureDifference, |c| {
        &mut c.coupling.transport.max_temperature_change
    }),
    ("transport.max_relative_pressure_change", Dim::Dimensionless, |c| {
        &mut c.coupling.transport.max_relative_pressure_change
    }),
    ("transport.mass_scale", Dim::Dimensionless, |c| &mut c.coupling.transport.mass_scale),
    ("transport.energy_scale", Dim::Dimensionless, |c| &mut c.coupling.transport.energy_scale),
    ("transport.max_hydrate_saturation", Dim::Dimensionless, |c| &mut c.coupling.transport.max_hydrate_saturation),
    ("transport.min_pressure", Dim::Pressure, |c| &mut c.coupling.transport.min_pressure),
    ("newton.abs_tol", Dim::Dimensionless, |c| &mut c.coupling.transport.newton.abs_tol),
    ("newton.rel_tol", Dim::Dimensionless, |c| &mut c.coupling.transport.newton.rel_tol),
    ("newton.min_damping", Dim::Dimensionless, |c| &mut c.coupling.transport.newton.min_damping),
    ("newton.step_tol", Dim::Dimensionless, |c| &mut c.coupling.transport.newton.step_tol),
];

const FLOW_SIDES: [(Side, &str); 3] = [(Side::Bottom, "bottom"), (Side::Top, "top"), (Side::Outer, "outer")];

/// Raw `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    entries: BTreeMap<String, (usize, String)>,
    /// Keys in insertion order.
    order: Vec<String>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Document::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_' || ch == '.') {
                return Err(Error::Parse {
                    line,
                    message: format!("invalid key `{key}`"),
                });
            }
            if let Some((first, _)) = doc.entries.get(key) {
                return Err(Error::Parse {
                    line,
                    message: format!("`{key}` already set on line {first}"),
                });
            }
            doc.insert(key, line, value.trim());
        }
        Ok(doc)
    }

    fn insert(&mut self, key: &str, line: usize, value: &str) {
        if !self.entries.contains_key(key) {
            self.order.push(key.to_string());
        }
        self.entries.insert(key.to_string(), (line, value.to_string()));
    }

    pub fn set(&mut self, key: &str, value: &str) {
        let line = self.entries.get(key).map_or(0, |e| e.0);
        self.insert(key, line, value);
    }

    /// `key = value` lines in insertion order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in &self.order {
            out.push_str(&format!("{key} = {}\n", self.entries[key].1));
        }
        out
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }
}

/// Pulls typed values out of a [`Document`] and remembers what was used.
struct Reader {
    doc: Document,
    used: BTreeSet<String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        let e = self.doc.entries.get(key).cloned();
        if e.is_some() {
            self.used.insert(key.to_string());
        }
        e
    }

    fn required(&mut self, key: &str) -> Result<(usize, String)> {
        self.take(key).ok_or_else(|| Error::MissingKey(key.to_string()))
    }

    fn convert<T>(key: &str, line: usize, r: std::result::Result<T, impl std::fmt::Display>) -> Result<T> {
        r.map_err(|e| Error::Parse {
            line,
            message: format!("`{key}`: {e}"),
        })
    }

    fn quantity(&mut self, key: &str, dim: Dim, slot: &mut f64) -> Result<()> {
        if let Some((line, v)) = self.take(key) {
            *slot = Self::convert(key, line, parse_quantity(&v, dim))?;
        }
        Ok(())
    }

    fn required_quantity(&mut self, key: &str, dim: Dim) -> Result<f64> {
        let (line, v) = self.required(key)?;
        Self::convert(key, line, parse_quantity(&v, dim))
    }

    fn count(&mut self, key: &str, slot: &mut usize) -> Result<()> {
        if let Some((line, v)) = self.take(key) {
            *slot = Self::convert(key, line, v.parse::<usize>().map_err(|_| format!("`{v}` is not a count")))?;
        }
        Ok(())
    }

    fn required_count(&mut self, key: &str) -> Result<usize> {
        let mut n = 0;
        self.required(key)?;
        self.count(key, &mut n)?;
        Ok(n)
    }

    fn flag(&mut self, key: &str, slot: &mut bool) -> Result<()> {
        if let Some((line, v)) = self.take(key) {
            *slot = Self::convert(
                key,
                line,
                match v.as_str() {
                    "on" | "true" | "yes" => Ok(true),
                    "off" | "false" | "no" => Ok(false),
                    _ => Err(format!("`{v}` is not on/off")),
                },
            )?;
        }
        Ok(())
    }

    fn choice<T>(&mut self, key: &str, parse: impl Fn(&str) -> Option<T>, allowed: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => Self::convert(key, line, parse(&v).ok_or(format!("`{v}` is not one of {allowed}"))).map(Some),
        }
    }

    fn field(&mut self, key: &str, dim: Dim) -> Result<CellField> {
        let (line, v) = self.required(key)?;
        Self::convert(key, line, parse_quantity_list(&v, dim)).map(CellField)
    }

    fn finish(self) -> Result<()> {
        for (key, (line, _)) in &self.doc.entries {
            if !self.used.contains(key) {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("unknown or inapplicable key `{key}`"),
                });
            }
        }
        Ok(())
    }
}

fn parse_schedule(text: &str) -> std::result::Result<Vec<(f64, f64)>, String> {
    if text.trim() == "none" {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|item| {
            let (t, p) = item
                .split_once(':')
                .ok_or_else(|| format!("expected `time: pressure`, got `{}`", item.trim()))?;
            let t = parse_quantity(t, Dim::Time).map_err(|e| e.0)?;
            let p = parse_quantity(p, Dim::Pressure).map_err(|e| e.0)?;
            Ok((t, p))
        })
        .collect()
}

fn format_schedule(steps: &[(f64, f64)]) -> String {
    if steps.is_empty() {
        return "none".into();
    }
    steps
        .iter()
        .map(|&(t, p)| format!("{}: {}", format_quantity(t, Dim::Time), format_quantity(p, Dim::Pressure)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn parse_thermal(text: &str) -> std::result::Result<ThermalBc, String> {
    if text.trim() == "insulated" {
        return Ok(ThermalBc::Insulated);
    }
    parse_quantity(text, Dim::Temperature)
        .map(ThermalBc::Temperature)
        .map_err(|e| format!("expected `insulated` or a temperature: {e}"))
}

fn format_thermal(bc: ThermalBc) -> String {
    match bc {
        ThermalBc::Insulated => "insulated".into(),
        ThermalBc::Temperature(t) => format_quantity(t, Dim::Temperature),
    }
}

fn jacobian_name(mode: JacobianMode) -> &'static str {
    match mode {
        JacobianMode::Analytic => "analytic",
        JacobianMode::FiniteDifference => "finite-difference",
    }
}

fn parse_jacobian(s: &str) -> Option<JacobianMode> {
    match s {
        "analytic" => Some(JacobianMode::Analytic),
        "finite-difference" => Some(JacobianMode::FiniteDifference),
        _ => None,
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parse and validate.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_document(Document::parse(text)?)
    }

    pub fn from_document(doc: Document) -> Result<Self> {
        let mut r = Reader {
            doc,
            used: BTreeSet::new(),
        };
        let mut c = ScenarioConfig::default();
        if let Some((_, name)) = r.take("name") {
            c.name = name;
        }
        c.coupling.regime = r
            .choice("regime", Regime::parse, "formation, dissociation")?
            .ok_or_else(|| Error::MissingKey("regime".into()))?;
        c.grid.nz = r.required_count("grid.nz")?;
        c.grid.nr = r.required_count("grid.nr")?;
        c.t_end = r.required_quantity("t_end", Dim::Time)?;
        c.coupling.dt_max = r.required_quantity("dt_max", Dim::Time)?;
        c.initial = InitialFields {
            gas_pressure: r.field("initial.P_g", Dim::Pressure)?,
            water_saturation: r.field("initial.S_w", Dim::Dimensionless)?,
            hydrate_saturation: r.field("initial.S_h", Dim::Dimensionless)?,
            temperature: r.field("initial.T", Dim::Temperature)?,
            porosity: r.field("initial.phi", Dim::Dimensionless)?,
        };
        for &(key, dim, slot) in SCALARS {
            r.quantity(key, dim, slot(&mut c))?;
        }

        r.flag("kinetics", &mut c.kinetics.enabled)?;
        let model = r.choice("surface_area_model", |s| Some(s.to_string()).filter(|s| s == "saturation-scaled" || s == "constant"), "saturation-scaled, constant")?;
        c.kinetics.surface_area = match model.as_deref() {
            Some("constant") => SurfaceAreaModel::Constant {
                area: r.required_quantity("A_rs", Dim::SpecificArea)?,
            },
            _ => {
                let mut gamma = match c.kinetics.surface_area {
                    SurfaceAreaModel::SaturationScaled { gamma } => gamma,
                    SurfaceAreaModel::Constant { .. } => unreachable!("default is saturation-scaled"),
                };
                r.quantity("Gamma", Dim::SpecificArea, &mut gamma)?;
                SurfaceAreaModel::SaturationScaled { gamma }
            }
        };

        if let Some(o) = r.choice("coupling.order", BlockOrder::parse, "flow-first, mechanics-first")? {
            c.coupling.order = o;
        }
        r.count("coupling.max_outer", &mut c.coupling.max_outer)?;
        r.flag("coupling.fixed_stress", &mut c.coupling.fixed_stress)?;
        if let Some(f) = r.choice("geomech.formulation", MechFormulation::parse, "secant, incremental")? {
            c.coupling.geomech.formulation = f;
        }
        if let Some(w) = r.choice("geomech.pore_weighting", PoreWeighting::parse, "normalized, unnormalized")? {
            c.coupling.geomech.pore_weighting = w;
        }
        if let Some((line, v)) = r.take("geomech.body_force") {
            c.coupling.geomech.body_force = if v == "off" {
                None
            } else {
                Some(Reader::convert("geomech.body_force", line, parse_quantity(&v, Dim::Acceleration))?)
            };
        }
        r.count("newton.max_iter", &mut c.coupling.transport.newton.max_iter)?;
        if let Some(j) = r.choice("transport.jacobian", parse_jacobian, "analytic, finite-difference")? {
            c.coupling.transport.jacobian = j;
        }

        c.controls.stress = match r.choice("control.stress", |s| Some(s.to_string()), "")?.as_deref() {
            Some("follower") => StressControl::EffectiveStressFollower {
                target_delta: r.required_quantity("control.stress_offset", Dim::Pressure)?,
            },
            Some("constant") => StressControl::ConstantTotal {
                stress: r.required_quantity("control.total_stress", Dim::Pressure)?,
            },
            Some(other) => {
                let line = r.doc.entries["control.stress"].0;
                return Err(Error::Parse {
                    line,
                    message: format!("`control.stress`: `{other}` is not one of follower, constant"),
                });
            }
            None => return Err(Error::MissingKey("control.stress".into())),
        };
        for (side, name) in FLOW_SIDES {
            let key = format!("control.flow.{name}");
            let flow = match r.take(&key) {
                None => FlowControl::NoFlow,
                Some((_, v)) if v == "closed" => FlowControl::NoFlow,
                Some((_, v)) if v == "back-pressure" => {
                    let initial = r.required_quantity(&format!("{key}.initial"), Dim::Pressure)?;
                    let skey = format!("{key}.schedule");
                    let (line, text) = r.required(&skey)?;
                    let steps = Reader::convert(&skey, line, parse_schedule(&text))?;
                    let schedule = PressureSchedule::new(initial, steps).map_err(|e| Error::Parse {
                        line,
                        message: format!("`{skey}`: {e}"),
                    })?;
                    FlowControl::BackPressure(schedule)
                }
                Some((line, v)) => {
                    return Err(Error::Parse {
                        line,
                        message: format!("`{key}`: `{v}` is not one of closed, back-pressure"),
                    })
                }
            };
            *c.controls.flow_mut(side) = flow;
        }
        for (side, name) in FLOW_SIDES {
            let key = format!("control.thermal.{name}");
            if let Some((line, v)) = r.take(&key) {
                *c.controls.thermal_mut(side) = Reader::convert(&key, line, parse_thermal(&v))?;
            }
        }
        if let Some((line, v)) = r.take("output.snapshot_times") {
            c.output.snapshot_times = if v == "none" {
                Vec::new()
            } else {
                let list = if v.starts_with('[') {
                    parse_quantity_list(&v, Dim::Time)
                } else {
                    v.split(',').map(|t| parse_quantity(t, Dim::Time)).collect()
                };
                Reader::convert("output.snapshot_times", line, list)?
            };
        }
        if let Some((line, v)) = r.take("output.files") {
            c.files = OutputSelection::parse(&v).ok_or_else(|| Error::Parse {
                line,
                message: format!("`output.files`: expected `none` or a list of {}", OutputSelection::NAMES.join(", ")),
            })?;
        }
        r.finish()?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_document(&self) -> Document {
        let mut d = Document::default();
        d.set("name", &self.name);
        d.set("regime", self.coupling.regime.name());
        d.set("grid.nz", &self.grid.nz.to_string());
        d.set("grid.nr", &self.grid.nr.to_string());
        let i = &self.initial;
        d.set("initial.P_g", &format_quantity_list(&i.gas_pressure.0, Dim::Pressure));
        d.set("initial.S_w", &format_quantity_list(&i.water_saturation.0, Dim::Dimensionless));
        d.set("initial.S_h", &format_quantity_list(&i.hydrate_saturation.0, Dim::Dimensionless));
        d.set("initial.T", &format_quantity_list(&i.temperature.0, Dim::Temperature));
        d.set("initial.phi", &format_quantity_list(&i.porosity.0, Dim::Dimensionless));
        let mut tmp = self.clone();
        for &(key, dim, slot) in SCALARS {
            d.set(key, &format_quantity(*slot(&mut tmp), dim));
        }
        d.set("kinetics", if self.kinetics.enabled { "on" } else { "off" });
        match self.kinetics.surface_area {
            SurfaceAreaModel::SaturationScaled { gamma } => {
                d.set("surface_area_model", "saturation-scaled");
                d.set("Gamma", &format_quantity(gamma, Dim::SpecificArea));
            }
            SurfaceAreaModel::Constant { area } => {
                d.set("surface_area_model", "constant");
                d.set("A_rs", &format_quantity(area, Dim::SpecificArea));
            }
        }
        d.set("coupling.order", self.coupling.order.name());
        d.set("coupling.max_outer", &self.coupling.max_outer.to_string());
        d.set("coupling.fixed_stress", if self.coupling.fixed_stress { "on" } else { "off" });
        d.set("geomech.formulation", self.coupling.geomech.formulation.name());
        d.set("geomech.pore_weighting", self.coupling.geomech.pore_weighting.name());
        d.set(
            "geomech.body_force",
            &self
                .coupling
                .geomech
                .body_force
                .map_or("off".into(), |g| format_quantity(g, Dim::Acceleration)),
        );
        d.set("newton.max_iter", &self.coupling.transport.newton.max_iter.to_string());
        d.set("transport.jacobian", jacobian_name(self.coupling.transport.jacobian));
        match self.controls.stress {
            StressControl::EffectiveStressFollower { target_delta } => {
                d.set("control.stress", "follower");
                d.set("control.stress_offset", &format_quantity(target_delta, Dim::Pressure));
            }
            StressControl::ConstantTotal { stress } => {
                d.set("control.stress", "constant");
                d.set("control.total_stress", &format_quantity(stress, Dim::Pressure));
            }
        }
        for (side, name) in FLOW_SIDES {
            let key = format!("control.flow.{name}");
            match self.controls.flow(side) {
                Some(FlowControl::BackPressure(s)) => {
                    d.set(&key, "back-pressure");
                    d.set(&format!("{key}.initial"), &format_quantity(s.initial, Dim::Pressure));
                    d.set(&format!("{key}.schedule"), &format_schedule(&s.steps));
                }
                _ => d.set(&key, "closed"),
            }
            d.set(&format!("control.thermal.{name}"), &format_thermal(self.controls.thermal(side)));
        }
        let snaps = &self.output.snapshot_times;
        d.set(
            "output.snapshot_times",
            &if snaps.is_empty() {
                "none".into()
            } else {
                snaps
                    .iter()
                    .map(|&t| format_quantity(t, Dim::Time))
                    .collect::<Vec<_>>()
                    .join(", ")
            },
        );
        d.set("output.files", &self.files.name());
        d
    }

    pub fn to_text(&self) -> String {
        self.to_document().to_text()
    }

    /// Replace one key by its textual value and re-validate.
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self> {
        let mut d = self.to_document();
        d.set(key, value);
        Self::from_document(d).map_err(|e| match e {
            Error::Parse { line: 0, message } => Error::Config(format!("override {message}")),
            e => e,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.num_cells();
        if n == 0 {
            return Err(Error::Config("grid needs at least one cell per direction".into()));
        }
        if !(self.grid.height > 0.0 && self.grid.radius > 0.0) {
            return Err(Error::Config("grid dimensions must be positive".into()));
        }
        self.initial_state(&self.grid.build()?)?.validate()?;
        self.material.validate()?;
        self.kinetics.validate()?;
        self.coupling.validate()?;
        self.controls.validate()?;
        if !(self.t_end > 0.0) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.output.timeseries_interval >= 0.0) {
            return Err(Error::Config("time-series interval must be non-negative".into()));
        }
        let s = &self.output.snapshot_times;
        if s.windows(2).any(|w| !(w[1] > w[0])) || s.iter().any(|&t| !(0.0..=self.t_end).contains(&t)) {
            return Err(Error::Config("snapshot times must be increasing and within [0, t_end]".into()));
        }
        Ok(())
    }

    pub fn initial_state(&self, grid: &AxiGrid) -> Result<PrimaryState> {
        let n = grid.num_cells();
        let i = &self.initial;
        let mut s = PrimaryState::uniform(n, grid.num_vertices(), 0.0, 0.0, 0.0, 0.0, 0.0);
        s.gas_pressure = i.gas_pressure.expand("initial.P_g", n)?;
        s.water_saturation = i.water_saturation.expand("initial.S_w", n)?;
        s.hydrate_saturation = i.hydrate_saturation.expand("initial.S_h", n)?;
        s.temperature = i.temperature.expand("initial.T", n)?;
        s.porosity = i.porosity.expand("initial.phi", n)?;
        Ok(s)
    }

    pub fn build(&self) -> Result<Simulation> {
        let grid = self.grid.build()?;
        let initial = self.initial_state(&grid)?;
        Simulation::new(
            grid,
            self.material.clone(),
            self.kinetics,
            self.coupling.clone(),
            self.controls.clone(),
            initial,
        )
    }
}
