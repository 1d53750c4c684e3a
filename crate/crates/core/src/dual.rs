//! Scalar abstraction shared by the closure relations so that the same code
//! path yields values (`f64`) and exact first derivatives (dual numbers).

use num_dual::{Derivative, DualNum, DualSVec64};

/// Real or forward-mode dual scalar.
pub trait Scalar: DualNum<Primitive = f64> + Copy {
    fn value(&self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
}

impl<const N: usize> Scalar for DualSVec64<N> {
    #[inline]
    fn value(&self) -> f64 {
        self.re
    }
}

/// Dual number carrying derivatives with respect to one cell's unknowns.
pub type CellDual = DualSVec64<4>;
/// Dual number carrying derivatives with respect to two cells' unknowns.
pub type PairDual = DualSVec64<8>;

#[inline]
pub fn constant<D: Scalar>(x: f64) -> D {
    D::from(x)
}

/// Seed the `i`-th of four cell unknowns.
pub fn seed(x: f64, i: usize) -> CellDual {
    CellDual::from_re(x).derivative(i)
}

/// Gradient of a cell dual as a plain array (zeros when no derivative part
/// is stored).
pub fn gradient(x: &CellDual) -> [f64; 4] {
    match &x.eps.0 {
        Some(m) => [m[0], m[1], m[2], m[3]],
        None => [0.0; 4],
    }
}

pub fn pair_gradient(x: &PairDual) -> [f64; 8] {
    let mut g = [0.0; 8];
    if let Some(m) = &x.eps.0 {
        for (k, gk) in g.iter_mut().enumerate() {
            *gk = m[k];
        }
    }
    g
}

/// Embed a cell dual into the pair space, placing its derivatives at
/// slots `offset..offset + 4`.
pub fn lift(x: &CellDual, offset: usize) -> PairDual {
    let g = gradient(x);
    let mut v = nalgebra::SVector::<f64, 8>::zeros();
    for k in 0..4 {
        v[offset + k] = g[k];
    }
    PairDual::new(x.re, Derivative::some(v))
}

#[inline]
pub fn max0<D: Scalar>(x: D) -> D {
    if x.value() > 0.0 {
        x
    } else {
        D::from(0.0)
    }
}

#[inline]
pub fn clamp<D: Scalar>(x: D, lo: f64, hi: f64) -> D {
    if x.value() < lo {
        D::from(lo)
    } else if x.value() > hi {
        D::from(hi)
    } else {
        x
    }
}
