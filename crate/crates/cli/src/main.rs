//! `hydrate-sim`: run, sweep and validate scenario files, or print material
//! properties at one state point.
//!
//! Exit codes: 0 success, 1 configuration or I/O error, 2 solver failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Parser, Subcommand};
use hydrate_core::output::{write_multi_curve, write_outputs};
use hydrate_core::scenario::units::{format_number, parse_quantity, Dim};
use hydrate_core::{Error, MaterialDb, Regime, RunArtifacts, ScenarioConfig};

#[derive(Parser)]
#[command(name = "hydrate-sim", version, about = "Coupled flow, heat, kinetics and mechanics of hydrate-bearing sand samples")]
struct Cli {
    /// error, warn, info, debug or trace; RUST_LOG overrides.
    #[arg(long, global = true, default_value = "info")]
    log_level: log::LevelFilter,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        config: PathBuf,
        #[arg(long, short, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Run a scenario once per value of one parameter, in parallel.
    Sweep {
        config: PathBuf,
        /// `key=v1,v2,...`
        #[arg(long)]
        param: String,
        #[arg(long, short, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Parse and check a scenario without running it.
    Validate { config: PathBuf },
    /// Phase properties and hydrate equilibrium at a temperature and gas pressure.
    Props {
        /// e.g. `275.15 K` or `2 degC`
        temperature: String,
        /// e.g. `8 MPa`
        pressure: String,
        /// Mass fraction of salt in the pore water.
        #[arg(long, default_value_t = 0.0)]
        salinity: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .parse_default_env()
        .format_timestamp(None)
        .init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, output_dir } => {
            let cfg = ScenarioConfig::load(&config)?;
            run_one(&cfg, &output_dir).map(|_| ())
        }
        Command::Sweep {
            config,
            param,
            output_dir,
        } => sweep(&ScenarioConfig::load(&config)?, &param, &output_dir),
        Command::Validate { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            println!(
                "{}: {} scenario, {} x {} cells, t_end = {} s",
                config.display(),
                cfg.coupling.regime.name(),
                cfg.grid.nz,
                cfg.grid.nr,
                format_number(cfg.t_end)
            );
            Ok(())
        }
        Command::Props {
            temperature,
            pressure,
            salinity,
        } => props(&temperature, &pressure, salinity),
    }
}

fn run_one(cfg: &ScenarioConfig, dir: &Path) -> Result<RunArtifacts, Error> {
    let mut sim = cfg.build()?;
    log::info!("running `{}` to t = {} s", cfg.name, format_number(cfg.t_end));
    let result = sim.run(cfg.t_end, &cfg.output);
    let artifacts = match result {
        Ok(a) => a,
        Err(Error::RunAborted { time, reason, snapshot }) => {
            if cfg.files.vtk {
                let _ = std::fs::create_dir_all(dir);
                let p = dir.join("aborted.vtk");
                if hydrate_core::output::write_vtk(&p, &sim.grid, &snapshot).is_ok() {
                    log::error!("last state written to {}", p.display());
                }
            }
            return Err(Error::RunAborted { time, reason, snapshot });
        }
        Err(e) => return Err(e),
    };
    let written = write_outputs(dir, &sim.grid, cfg.coupling.regime, &artifacts, cfg.files)?;
    if !written.is_empty() {
        std::fs::write(dir.join("scenario.cfg"), cfg.to_text()).map_err(|e| Error::Io {
            path: dir.join("scenario.cfg"),
            source: e,
        })?;
    }
    log::info!(
        "finished: {} steps, {} files in {}",
        artifacts.steps.len(),
        written.len(),
        dir.display()
    );
    Ok(artifacts)
}

fn sweep(base: &ScenarioConfig, param: &str, dir: &Path) -> Result<(), Error> {
    let (key, values) = param
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--param `{param}`: expected key=v1,v2,...")))?;
    let key = key.trim();
    let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(Error::Config(format!("--param `{param}`: no values")));
    }
    let configs = values
        .iter()
        .map(|v| {
            let mut c = base.with_override(key, v)?;
            c.name = format!("{}_{key}={v}", base.name);
            Ok((v.to_string(), c))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let results: Vec<Result<RunArtifacts, Error>> = thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|(v, c)| {
                let sub = dir.join(path_component(&format!("{key}={v}")));
                s.spawn(move || run_one(c, &sub))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut curves = Vec::new();
    for ((v, _), r) in configs.iter().zip(results) {
        let art = r?;
        let label = v.split_whitespace().next().and_then(|n| n.parse::<f64>().ok()).unwrap_or(f64::NAN);
        curves.push((label, art.time_series));
    }
    if base.files.plots {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        let p = dir.join(format!("strain_vs_{}.csv", path_component(key)));
        write_multi_curve(&p, key, &curves)?;
        log::info!("sweep curves written to {}", p.display());
    }
    Ok(())
}

/// File-name-safe form of a parameter label.
fn path_component(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "=-_.".contains(c) { c } else { '_' })
        .collect()
}

fn props(temperature: &str, pressure: &str, salinity: f64) -> Result<(), Error> {
    let t = parse_quantity(temperature, Dim::Temperature).map_err(|e| Error::Config(format!("temperature: {e}")))?;
    let p = parse_quantity(pressure, Dim::Pressure).map_err(|e| Error::Config(format!("pressure: {e}")))?;
    let db = MaterialDb::default();
    let pe = db.equilibrium_pressure(t, salinity)?;
    let pp = db.phase_properties(t, p)?;
    let z = db.eos.compressibility(p, t)?;
    let rows = [
        ("temperature", t, "K"),
        ("gas_pressure", p, "Pa"),
        ("equilibrium_pressure", pe, "Pa"),
        ("gas_compressibility_factor", z, "-"),
        ("gas_density", pp.gas_density, "kg/m3"),
        ("gas_viscosity", pp.viscosity_gas, "Pa.s"),
        ("water_viscosity", pp.viscosity_water, "Pa.s"),
        ("gas_conductivity", pp.conductivity_gas, "W/(m.K)"),
        ("water_conductivity", pp.conductivity_water, "W/(m.K)"),
        ("gas_cp", pp.cp_gas, "J/(kg.K)"),
        ("gas_cv", pp.cv_gas, "J/(kg.K)"),
        ("vapour_density", pp.vapour_density, "kg/m3"),
        ("young_modulus_formation_Sh0", db.composite_young_modulus(0.0, Regime::Formation), "Pa"),
        ("young_modulus_dissociation_Sh0", db.composite_young_modulus(0.0, Regime::Dissociation), "Pa"),
    ];
    for (name, value, unit) in rows {
        println!("{name:<32} {:>14} {unit}", format_number(value));
    }
    println!("hydrate_stable                   {:>14}", p > pe);
    Ok(())
}
