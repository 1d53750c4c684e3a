//! Peng–Robinson cubic for pure methane.

use crate::dual::Scalar;
use crate::error::{Error, Result};

pub const GAS_CONSTANT: f64 = 8.314462618;
pub const MOLAR_MASS_CH4: f64 = 16.043e-3;
pub const MOLAR_MASS_H2O: f64 = 18.015e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PengRobinson {
    pub critical_temperature: f64,
    pub critical_pressure: f64,
    pub acentric_factor: f64,
    pub molar_mass: f64,
}

impl Default for PengRobinson {
    fn default() -> Self {
        PengRobinson {
            critical_temperature: 190.56,
            critical_pressure: 4.599e6,
            acentric_factor: 0.0115,
            molar_mass: MOLAR_MASS_CH4,
        }
    }
}

/// Real roots of `z³ + a z² + b z + c`, ascending.
fn cubic_real_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    let mut roots = if r * r < q * q * q {
        let theta = (r / q.powf(1.5)).clamp(-1.0, 1.0).acos();
        let s = -2.0 * q.sqrt();
        let tau = 2.0 * std::f64::consts::PI;
        vec![
            s * (theta / 3.0).cos() - a / 3.0,
            s * ((theta + tau) / 3.0).cos() - a / 3.0,
            s * ((theta - tau) / 3.0).cos() - a / 3.0,
        ]
    } else {
        let big_a = -r.signum() * (r.abs() + (r * r - q * q * q).sqrt()).cbrt();
        let big_b = if big_a != 0.0 { q / big_a } else { 0.0 };
        vec![big_a + big_b - a / 3.0]
    };
    // one Newton polish per root
    for z in roots.iter_mut() {
        let f = ((*z + a) * *z + b) * *z + c;
        let df = (3.0 * *z + 2.0 * a) * *z + b;
        if df.abs() > 1e-300 {
            *z -= f / df;
        }
    }
    roots.sort_by(|x, y| x.total_cmp(y));
    roots
}

impl PengRobinson {
    /// Dimensionless attraction and covolume parameters (A, B).
    fn coefficients<D: Scalar>(&self, pressure: D, temperature: D) -> (D, D) {
        let r = GAS_CONSTANT;
        let tc = self.critical_temperature;
        let pc = self.critical_pressure;
        let w = self.acentric_factor;
        let kappa = 0.37464 + 1.54226 * w - 0.26992 * w * w;
        let alpha = {
            let s = (temperature / tc).sqrt();
            let t = (-s + 1.0) * kappa + 1.0;
            t * t
        };
        let a = alpha * (0.45724 * r * r * tc * tc / pc);
        let b = 0.07780 * r * tc / pc;
        let rt = temperature * r;
        (a * pressure / (rt * rt), pressure * b / rt)
    }

    /// Compressibility factor on the vapour branch (largest real root).
    pub fn compressibility<D: Scalar>(&self, pressure: D, temperature: D) -> Result<D> {
        let (p, t) = (pressure.value(), temperature.value());
        if !(p > 0.0 && t > 0.0 && p.is_finite() && t.is_finite()) {
            return Err(Error::Eos(format!("invalid state P = {p} Pa, T = {t} K")));
        }
        let (ad, bd) = self.coefficients(pressure, temperature);
        let (a, b) = (ad.value(), bd.value());
        let c2 = -(1.0 - b);
        let c1 = a - 3.0 * b * b - 2.0 * b;
        let c0 = -(a * b - b * b - b * b * b);
        let z = cubic_real_roots(c2, c1, c0)
            .into_iter()
            .filter(|z| z.is_finite() && *z > b)
            .last()
            .ok_or_else(|| Error::Eos(format!("no vapour root at P = {p} Pa, T = {t} K")))?;
        // Implicit-function correction carries dz/d(P, T) through the duals.
        let zd = D::from(z);
        let f = zd * zd * zd - (-bd + 1.0) * zd * zd + (ad - bd * bd * 3.0 - bd * 2.0) * zd
            - (ad * bd - bd * bd - bd * bd * bd);
        let dfdz = 3.0 * z * z + 2.0 * c2 * z + c1;
        Ok(zd - f / dfdz)
    }

    /// Mass density in kg/m³.
    pub fn density<D: Scalar>(&self, pressure: D, temperature: D) -> Result<D> {
        let z = self.compressibility(pressure, temperature)?;
        let specific_gas_constant = GAS_CONSTANT / self.molar_mass;
        Ok(pressure / (z * temperature * specific_gas_constant))
    }
}
