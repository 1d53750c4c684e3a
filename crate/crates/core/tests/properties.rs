//! Invariants checked over randomly drawn inputs.

use hydrate_core::constitutive::{MOLAR_MASS_CH4, MOLAR_MASS_H2O};
use hydrate_core::coupling::update_total_porosity;
use hydrate_core::geomech::{solve_increment, strain_energy, GeomechConfig, MechBoundary, MechLoads, MechState};
use hydrate_core::grid::build_grid;
use hydrate_core::numerics::DirectSolver;
use hydrate_core::scenario::units::{format_quantity, parse_quantity, Dim};
use hydrate_core::state::split_water_unknown;
use hydrate_core::transport::{face_flux, CellInputs, CellProps, FaceGeometry};
use hydrate_core::{KineticParams, MaterialDb, Regime, ScenarioConfig};
use proptest::prelude::*;

const BASE: &str = include_str!("../../../scenarios/formation.cfg");

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cell_volumes_sum_to_the_cylinder(nz in 1usize..40, nr in 1usize..12, h in 0.01f64..2.0, r in 0.005f64..0.5) {
        let g = build_grid(nz, nr, h, r).unwrap();
        let exact = std::f64::consts::PI * r * r * h;
        let sum: f64 = g.cell_volumes.iter().sum();
        prop_assert!((sum - exact).abs() <= 1e-12 * exact);
        prop_assert_eq!(g.num_cells(), nz * nr);
        prop_assert_eq!(g.num_vertices(), (nz + 1) * (nr + 1));
        let interior = g.faces.iter().filter(|f| f.right.is_some()).count();
        prop_assert_eq!(interior, (nz - 1) * nr + nz * (nr - 1));
    }

    #[test]
    fn interpolation_is_bounded_and_linear_in_z(
        nz in 2usize..12,
        nr in 1usize..6,
        values in prop::collection::vec(-1e3f64..1e3, 72),
        slope in -10.0f64..10.0,
    ) {
        let g = build_grid(nz, nr, 0.36, 0.04).unwrap();
        let field: Vec<f64> = values.iter().cycle().take(g.num_cells()).copied().collect();
        let (lo, hi) = field.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        for v in g.interpolate_cell_to_vertex(&field).unwrap() {
            prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
        }
        let linear: Vec<f64> = g.cell_centers.iter().map(|c| 1.0 + slope * c[0]).collect();
        let at_vertices = g.interpolate_cell_to_vertex(&linear).unwrap();
        for (k, x) in g.vertex_coords.iter().enumerate() {
            if x[0] > 1e-12 && x[0] < g.height - 1e-12 {
                prop_assert!((at_vertices[k] - (1.0 + slope * x[0])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn phase_properties_are_positive(t in 270.0f64..300.0, p in 0.1e6f64..20e6) {
        let pp = MaterialDb::default().phase_properties(t, p).unwrap();
        for v in [
            pp.gas_density, pp.water_density, pp.viscosity_gas, pp.viscosity_water, pp.conductivity_gas,
            pp.conductivity_water, pp.cp_gas, pp.cv_gas, pp.cv_water, pp.vapour_density,
        ] {
            prop_assert!(v > 0.0 && v.is_finite());
        }
    }

    #[test]
    fn equilibrium_pressure_increases_with_temperature_and_salinity(
        t in 260.0f64..300.0,
        dt in 0.01f64..5.0,
        s in 0.0f64..0.05,
        ds in 0.001f64..0.05,
    ) {
        let db = MaterialDb::default();
        let pe = db.equilibrium_pressure(t, s).unwrap();
        prop_assert!(db.equilibrium_pressure(t + dt, s).unwrap() > pe);
        prop_assert!(db.equilibrium_pressure(t, s + ds).unwrap() > pe);
    }

    #[test]
    fn composite_modulus_is_non_decreasing(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.1f64..6.0) {
        let mut db = MaterialDb::default();
        db.formation_stiffness.exponent = c;
        db.dissociation_stiffness.exponent = c;
        for regime in [Regime::Formation, Regime::Dissociation] {
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(db.composite_young_modulus(hi, regime) >= db.composite_young_modulus(lo, regime));
            prop_assert_eq!(db.composite_young_modulus(0.0, regime), db.stiffness(regime).sand_modulus);
        }
    }

    #[test]
    fn relative_permeabilities_are_bounded_and_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let db = MaterialDb::default();
        let (lo, hi) = (a.min(b), a.max(b));
        let kl = db.relative_permeabilities_effective(lo);
        let kh = db.relative_permeabilities_effective(hi);
        for k in [kl.water, kl.gas, kh.water, kh.gas] {
            prop_assert!((0.0..=1.0).contains(&k));
        }
        prop_assert!(kh.water >= kl.water);
        prop_assert!(kh.gas <= kl.gas);
    }

    #[test]
    fn permeability_factors_multiply(phi_a in 0.2f64..0.5, phi_b in 0.2f64..0.5, sh in 0.0f64..0.9) {
        let db = MaterialDb::default();
        let ratio = db.effective_permeability(phi_a, sh) / db.effective_permeability(phi_b, sh);
        let expected = db.porosity_factor(phi_a) / db.porosity_factor(phi_b);
        prop_assert!((ratio - expected).abs() <= 1e-12 * expected);
        prop_assert!((db.apparent_porosity(phi_a, sh) - phi_a * (1.0 - sh)).abs() < 1e-15);
    }

    #[test]
    fn phase_change_is_stoichiometric(
        p in 1e6f64..15e6,
        t in 272.0f64..285.0,
        sw in 0.05f64..0.6,
        sh in 0.01f64..0.35,
        phi in 0.3f64..0.4,
    ) {
        let db = MaterialDb::default();
        let kin = KineticParams::default();
        let src = kin.phase_change_rates(&db, p, t, sw, sh, phi, 0.0);
        let pe = db.equilibrium_pressure(t, 0.0).unwrap();
        prop_assert!(src.molar_rate * (pe - p) >= 0.0);
        prop_assert!((src.methane + src.water + src.hydrate).abs() <= 1e-12 * src.hydrate.abs().max(1e-300));
        if src.methane != 0.0 {
            let ratio = src.water / src.methane;
            let expected = kin.hydration_number * MOLAR_MASS_H2O / MOLAR_MASS_CH4;
            prop_assert!((ratio - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn kinetic_rate_vanishes_at_equilibrium(t in 272.0f64..285.0, sw in 0.05f64..0.6, sh in 0.01f64..0.35, eps in 1e-9f64..1e-3) {
        let db = MaterialDb::default();
        let kin = KineticParams::default();
        let pe = db.equilibrium_pressure(t, 0.0).unwrap();
        let above = kin.phase_change_rates(&db, pe * (1.0 + eps), t, sw, sh, 0.35, 0.0).molar_rate;
        let below = kin.phase_change_rates(&db, pe * (1.0 - eps), t, sw, sh, 0.35, 0.0).molar_rate;
        // each branch is linear in the driving force
        let formation = kin.phase_change_rates(&db, pe * 1.1, t, sw, sh, 0.35, 0.0).molar_rate.abs();
        let dissociation = kin.phase_change_rates(&db, pe * 0.9, t, sw, sh, 0.35, 0.0).molar_rate.abs();
        prop_assert!(above <= 0.0 && below >= 0.0);
        prop_assert!((above.abs() - 10.0 * eps * formation).abs() <= 1e-6 * eps * formation);
        prop_assert!((below.abs() - 10.0 * eps * dissociation).abs() <= 1e-6 * eps * dissociation);
    }

    #[test]
    fn face_flux_is_antisymmetric(
        pa in 5e6f64..12e6, pb in 5e6f64..12e6,
        swa in 0.1f64..0.7, swb in 0.1f64..0.7,
        ta in 274.0f64..280.0, tb in 274.0f64..280.0,
        head in -0.1f64..0.1,
    ) {
        let db = MaterialDb::default();
        let cell = |p: f64, sw: f64, t: f64| {
            CellProps::evaluate(&db, &CellInputs::from_slice(&[p, sw, 0.1, t], 0.35)).unwrap()
        };
        let (a, b) = (cell(pa, swa, ta), cell(pb, swb, tb));
        let fwd = FaceGeometry { area: 1e-3, dist_left: 0.0025, dist_right: 0.0025, gravity_head: head };
        let back = FaceGeometry { gravity_head: -head, ..fwd };
        let ab = face_flux(&fwd, &a, &b, 9.81);
        let ba = face_flux(&back, &b, &a, 9.81);
        let close = |x: f64, y: f64| (x + y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
        prop_assert!(close(ab.gas_volume, ba.gas_volume));
        prop_assert!(close(ab.water_volume, ba.water_volume));
    }

    #[test]
    fn porosity_update_stays_in_the_unit_interval(phi in 0.05f64..0.95, e0 in -0.04f64..0.04, de in -0.04f64..0.04) {
        let next = update_total_porosity(phi, e0, e0 + de).unwrap();
        prop_assert!(next > 0.0 && next < 1.0);
        prop_assert_eq!(de > 0.0, next < phi);
    }

    #[test]
    fn water_unknown_split_is_consistent(u in 0.0f64..2.0, sh in 0.0f64..0.95) {
        let u = u.min(2.0 - sh);
        let (sw, deficit) = split_water_unknown(u, sh);
        prop_assert!((sw + deficit - u).abs() < 1e-15);
        prop_assert!(sw >= 0.0 && sw + sh <= 1.0 + 1e-15);
        prop_assert!((0.0..=1.0).contains(&deficit));
        prop_assert!(deficit == 0.0 || (sw + sh - 1.0).abs() < 1e-15);
    }

    #[test]
    fn elastic_response_is_linear_and_stores_energy(sigma in 1e4f64..5e6, scale in 0.1f64..10.0, e in 2e7f64..5e8) {
        let grid = build_grid(4, 3, 0.36, 0.04).unwrap();
        let db = MaterialDb::default();
        let n = grid.num_cells();
        let reference = MechState::initial(&grid, &db, MechBoundary::isotropic(0.0), vec![0.0; n], Vec::new()).unwrap();
        let solve = |axial: f64| {
            let loads = MechLoads {
                pore_pressure: vec![0.0; n],
                young_modulus: vec![e; n],
                bulk_density: Vec::new(),
                boundary: MechBoundary::triaxial(axial, sigma),
            };
            solve_increment(&grid, &db, &GeomechConfig::default(), &reference, &loads, &mut DirectSolver::new()).unwrap()
        };
        let a = solve(sigma);
        let b = solve(sigma * scale);
        prop_assert!(strain_energy(&grid, &db, &vec![e; n], &a.displacement) >= 0.0);
        // only the axial part is scaled, so compare against the superposition
        let c = solve(0.0);
        for k in 0..a.displacement.len() {
            for d in 0..2 {
                let expected = c.displacement[k][d] + scale * (a.displacement[k][d] - c.displacement[k][d]);
                prop_assert!((b.displacement[k][d] - expected).abs() <= 1e-9 * a.displacement[k][d].abs().max(1e-12));
            }
        }
    }

    #[test]
    fn quantities_round_trip(v in -1e9f64..1e9) {
        for dim in [Dim::Pressure, Dim::Length, Dim::Time, Dim::Dimensionless, Dim::SpecificArea] {
            let text = format_quantity(v, dim);
            prop_assert_eq!(parse_quantity(&text, dim).unwrap(), v);
        }
    }

    #[test]
    fn scenario_round_trips_through_text(
        stress in 0.5f64..20.0,
        pg in 1.0f64..15.0,
        gamma in 1e2f64..1e5,
        c in 0.1f64..6.0,
        nz in 1usize..100,
        formulation in prop::sample::select(vec!["secant", "incremental"]),
        files in prop::sample::select(vec!["none", "steps", "timeseries, vtk", "plots, steps, timeseries, vtk"]),
    ) {
        let cfg = ScenarioConfig::parse(BASE).unwrap()
            .with_override("control.stress_offset", &format!("{stress} MPa")).unwrap()
            .with_override("initial.P_g", &format!("{pg} MPa")).unwrap()
            .with_override("Gamma", &format!("{gamma} m2/m3")).unwrap()
            .with_override("c_formation", &c.to_string()).unwrap()
            .with_override("grid.nz", &nz.to_string()).unwrap()
            .with_override("geomech.formulation", formulation).unwrap()
            .with_override("output.files", files).unwrap();
        let back = ScenarioConfig::parse(&cfg.to_text()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
