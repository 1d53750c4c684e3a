use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "\
name = small
regime = formation
grid.nz = 3
grid.nr = 1
t_end = 300 s
dt_max = 60 s
initial.P_g = 10 MPa
initial.S_w = 0.4
initial.S_h = 0
initial.T = 275.15 K
initial.phi = 0.35
control.stress = follower
control.stress_offset = 1 MPa
output.timeseries_interval = 60 s
output.snapshot_times = 0 s, 300 s
";

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydrate-sim"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("case.cfg");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_the_selected_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = sim(&["--log-level", "warn", "run", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["timeseries.csv", "steps.csv", "snapshot_000.vtk", "snapshot_001.vtk", "scenario.cfg"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert!(out.join("plots/formation_average_gas_pressure.csv").is_file());
    let series = std::fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert!(series.starts_with("time_s,gas_pressure_Pa"));
    let times: Vec<f64> = series.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(times.first(), Some(&0.0));
    assert_eq!(times.last(), Some(&300.0));
    assert!(times.windows(2).all(|w| w[1] - w[0] >= 60.0 || w[1] == 300.0), "{times:?}");
    // the echoed scenario is itself a valid input
    let echo = sim(&["validate", out.join("scenario.cfg").to_str().unwrap()]);
    assert!(echo.status.success());
}

#[test]
fn file_selection_limits_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}output.files = steps\n"));
    let out = dir.path().join("out");
    let o = sim(&["--log-level", "warn", "run", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(out.join("steps.csv").is_file());
    assert!(!out.join("timeseries.csv").exists());
    assert!(!out.join("plots").exists());

    let none = dir.path().join("none");
    let cfg = write_config(dir.path(), &format!("{SMALL}output.files = none\n"));
    let o = sim(&["--log-level", "warn", "run", &cfg, "-o", none.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(!none.exists());
}

#[test]
fn validate_reports_the_setup() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = sim(&["validate", &cfg]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("formation scenario, 3 x 1 cells"), "{text}");
    assert!(text.contains("t_end = 300 s"), "{text}");
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), &SMALL.replace("initial.P_g = 10 MPa", "initial.P_g = 10"));
    let o = sim(&["validate", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("initial.P_g"));

    let missing = dir.path().join("missing.cfg");
    assert_eq!(sim(&["run", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(sim(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(sim(&["--help"]).status.code(), Some(0));
}

#[test]
fn solver_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // one Newton iteration cannot meet the tolerance, so every retry fails
    let cfg = write_config(dir.path(), &format!("{SMALL}newton.max_iter = 1\nnewton.abs_tol = 1e-30\nnewton.rel_tol = 1e-30\nnewton.step_tol = 1e-300\n"));
    let out = dir.path().join("out");
    let o = sim(&["--log-level", "error", "run", &cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("aborted.vtk").is_file());
}

#[test]
fn props_prints_equilibrium() {
    let o = sim(&["props", "2 degC", "8 MPa", "--salinity", "0.035"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let line = |name: &str| {
        text.lines()
            .find(|l| l.starts_with(name))
            .unwrap_or_else(|| panic!("{name} missing in {text}"))
            .split_whitespace()
            .nth(1)
            .unwrap()
            .to_owned()
    };
    let pe: f64 = line("equilibrium_pressure").parse().unwrap();
    assert!((pe - 3.166e6).abs() < 1e3, "{pe}");
    assert!((line("temperature").parse::<f64>().unwrap() - 275.15).abs() < 1e-9);
    assert_eq!(line("hydrate_stable"), "true");
    assert_eq!(sim(&["props", "2", "8 MPa"]).status.code(), Some(1));
}

#[test]
fn sweep_writes_one_directory_per_value_and_the_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sweep");
    let o = sim(&["--log-level", "warn", "sweep", &cfg, "--param", "c_formation=1,2", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("c_formation=1/timeseries.csv").is_file());
    assert!(out.join("c_formation=2/timeseries.csv").is_file());
    let curves = std::fs::read_to_string(out.join("strain_vs_c_formation.csv")).unwrap();
    let header = curves.lines().next().unwrap();
    assert!(header.contains("volumetric_strain_c_formation=1"), "{header}");
    assert!(header.contains("volumetric_strain_c_formation=2"), "{header}");
    let bad = sim(&["sweep", &cfg, "--param", "c_formation"]);
    assert_eq!(bad.status.code(), Some(1));
}
