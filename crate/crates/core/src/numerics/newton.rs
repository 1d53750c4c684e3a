use super::solver::DirectSolver;
use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

/// A nonlinear system `F(x) = 0` with its Jacobian.
pub trait NewtonSystem {
    fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>>;

    fn jacobian(&mut self, x: &[f64]) -> Result<SparseMatrix>;

    /// Limit a proposed update in place (e.g. per-variable chopping).
    fn adjust_step(&mut self, _x: &[f64], _dx: &mut [f64]) {}

    /// Map an iterate back onto the admissible set; returns the number of
    /// clipped components.
    fn project(&mut self, _x: &mut [f64]) -> usize {
        0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Smallest damping factor of the halving line search.
    pub min_damping: f64,
    /// An undamped update with `|dx_i| <= step_tol · max(|x_i|, 1)` in every
    /// component counts as converged (round-off floor).
    pub step_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_iter: 25,
            min_damping: 1.0 / 64.0,
            step_tol: 1e-13,
        }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Config("Newton tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max Newton iterations must be at least 1".into()));
        }
        if !(self.step_tol >= 0.0) {
            return Err(Error::Config("step tolerance must be non-negative".into()));
        }
        if !(self.min_damping > 0.0 && self.min_damping <= 1.0) {
            return Err(Error::Config("minimum damping must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// ∞-norm of the residual at every accepted iterate, starting with x0.
    pub residual_history: Vec<f64>,
    /// Accepted updates that needed a damping factor below 1.
    pub damped_steps: usize,
    pub clip_events: usize,
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Rounding error of each residual entry, `4 ε Σ_j |J_ij x_j|`.
fn noise_floor(jac: &SparseMatrix, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| 4.0 * f64::EPSILON * jac.row(i).map(|(j, v)| (v * x[j]).abs()).sum::<f64>())
        .collect()
}

/// Euclidean norm of the residual part above the noise floor.
fn merit(f: &[f64], floor: &[f64]) -> f64 {
    f.iter().zip(floor).map(|(v, n)| (v.abs() - n).max(0.0).powi(2)).sum::<f64>().sqrt()
}

/// Damped Newton iteration. A step is accepted only if it lowers the
/// Euclidean norm of the residual above its rounding floor; convergence is
/// tested in the ∞-norm, with each entry allowed to sit at its floor.
pub fn newton_solve<S: NewtonSystem + ?Sized>(
    system: &mut S,
    x0: Vec<f64>,
    opts: &NewtonOptions,
    solver: &mut DirectSolver,
) -> Result<(Vec<f64>, NewtonReport)> {
    let mut x = x0;
    let mut report = NewtonReport::default();
    report.clip_events += system.project(&mut x);
    let mut f = system.residual(&x)?;
    let mut fnorm = norm_inf(&f);
    let target = opts.abs_tol.max(opts.rel_tol * fnorm);
    report.residual_history.push(fnorm);
    if !fnorm.is_finite() {
        return Err(Error::NewtonDiverged {
            iterations: 0,
            residual: fnorm,
            best: x,
        });
    }

    while fnorm > target && fnorm > opts.abs_tol {
        if report.iterations >= opts.max_iter {
            return Err(Error::NewtonDiverged {
                iterations: report.iterations,
                residual: fnorm,
                best: x,
            });
        }
        let jac = system.jacobian(&x)?;
        let floor = noise_floor(&jac, &x);
        if f.iter().zip(&floor).all(|(v, n)| v.abs() <= target.max(*n)) {
            log::trace!("Newton reached the round-off floor at residual {fnorm:.3e}");
            break;
        }
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let mut dx = solver.solve(&jac, &rhs)?;
        system.adjust_step(&x, &mut dx);
        if x.iter().zip(&dx).all(|(a, d)| d.abs() <= opts.step_tol * a.abs().max(1.0)) {
            log::trace!("Newton stagnated at residual {fnorm:.3e}");
            break;
        }

        let f2 = merit(&f, &floor);
        let mut alpha = 1.0;
        let mut accepted = None;
        while alpha >= opts.min_damping {
            let mut trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + alpha * d).collect();
            let clips = system.project(&mut trial);
            if let Ok(ft) = system.residual(&trial) {
                let n2 = merit(&ft, &floor);
                if n2.is_finite() && n2 < f2 {
                    accepted = Some((trial, ft, clips));
                    break;
                }
            }
            alpha *= 0.5;
        }
        report.iterations += 1;
        match accepted {
            Some((trial, ft, clips)) => {
                if alpha < 1.0 {
                    report.damped_steps += 1;
                }
                report.clip_events += clips;
                x = trial;
                f = ft;
                fnorm = norm_inf(&f);
                report.residual_history.push(fnorm);
            }
            None => {
                return Err(Error::NewtonDiverged {
                    iterations: report.iterations,
                    residual: fnorm,
                    best: x,
                });
            }
        }
    }
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sparse::TripletBuilder;

    struct Scalar<F: Fn(f64) -> (f64, f64)>(F);

    impl<F: Fn(f64) -> (f64, f64)> NewtonSystem for Scalar<F> {
        fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![(self.0)(x[0]).0])
        }
        fn jacobian(&mut self, x: &[f64]) -> Result<SparseMatrix> {
            let mut b = TripletBuilder::new(1, 1);
            b.add(0, 0, (self.0)(x[0]).1);
            Ok(b.build())
        }
    }

    fn tight() -> NewtonOptions {
        NewtonOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-30,
            ..NewtonOptions::default()
        }
    }

    #[test]
    fn square_root_of_four() {
        let mut sys = Scalar(|x: f64| (x * x - 4.0, 2.0 * x));
        let (x, rep) = newton_solve(&mut sys, vec![3.0], &tight(), &mut DirectSolver::new()).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14);
        assert!(rep.iterations <= 6, "{}", rep.iterations);
        assert_eq!(rep.damped_steps, 0);
        // quadratic tail: e_{k+1} / e_k² stays bounded (→ 1/(2·2) = 0.25)
        let mut xs = vec![3.0f64];
        for _ in 0..4 {
            let x = *xs.last().unwrap();
            xs.push(x - (x * x - 4.0) / (2.0 * x));
        }
        for w in xs.windows(2) {
            let (e0, e1) = ((w[0] - 2.0).abs(), (w[1] - 2.0).abs());
            if e0 > 1e-7 {
                assert!(e1 / (e0 * e0) < 0.3);
            }
        }
    }

    struct Affine;

    impl NewtonSystem for Affine {
        fn residual(&mut self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![2.0 * x[0] + x[1] - 3.0, x[0] + 3.0 * x[1] - 5.0])
        }
        fn jacobian(&mut self, _x: &[f64]) -> Result<SparseMatrix> {
            let mut b = TripletBuilder::new(2, 2);
            b.add(0, 0, 2.0);
            b.add(0, 1, 1.0);
            b.add(1, 0, 1.0);
            b.add(1, 1, 3.0);
            Ok(b.build())
        }
    }

    #[test]
    fn affine_system_in_one_iteration() {
        let (x, rep) = newton_solve(&mut Affine, vec![10.0, -7.0], &tight(), &mut DirectSolver::new()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn arctan_needs_damping() {
        // Undamped Newton on atan diverges from |x0| > 1.39.
        let mut sys = Scalar(|x: f64| (x.atan(), 1.0 / (1.0 + x * x)));
        let (x, rep) = newton_solve(&mut sys, vec![3.0], &tight(), &mut DirectSolver::new()).unwrap();
        assert!(x[0].abs() < 1e-14);
        assert!(rep.damped_steps > 0);
        let mut h = rep.residual_history.clone();
        h.dedup();
        assert!(h.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn stagnation_at_round_off_is_accepted() {
        let mut sys = Scalar(|x: f64| (x - 1e8, 1.0));
        let opts = NewtonOptions {
            abs_tol: 1e-20,
            ..tight()
        };
        let (x, _) = newton_solve(&mut sys, vec![1e8 + 1.0], &opts, &mut DirectSolver::new()).unwrap();
        assert_eq!(x[0], 1e8);
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let mut sys = Scalar(|x: f64| (x * x + 1.0, 2.0 * x));
        let err = newton_solve(&mut sys, vec![0.3], &tight(), &mut DirectSolver::new()).unwrap_err();
        match err {
            Error::NewtonDiverged { best, .. } => assert_eq!(best.len(), 1),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn already_converged_takes_no_iterations() {
        let (_, rep) = newton_solve(&mut Affine, vec![0.8, 1.4], &NewtonOptions::default(), &mut DirectSolver::new()).unwrap();
        assert_eq!(rep.iterations, 0);
    }
}
