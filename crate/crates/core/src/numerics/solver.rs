//! Direct solver for the small, banded systems produced by structured grids.
//!
//! A reverse Cuthill–McKee ordering is computed once per sparsity pattern and
//! cached; numeric factorisations reuse it as long as the new pattern fits
//! inside the cached band. Symmetric matrices use a band Cholesky and fall
//! back to LU when the matrix is not positive definite.

use std::collections::VecDeque;
use std::path::PathBuf;

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Symbolic {
    n: usize,
    /// new index → original index
    perm: Vec<usize>,
    /// original index → new index
    inverse: Vec<usize>,
    lower: usize,
    upper: usize,
}

impl Symbolic {
    fn analyse(a: &SparseMatrix) -> Symbolic {
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut inverse = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            inverse[p] = k;
        }
        let (mut lower, mut upper) = (0, 0);
        for (i, j, _) in a.iter() {
            let (pi, pj) = (inverse[i], inverse[j]);
            if pi > pj {
                lower = lower.max(pi - pj);
            } else {
                upper = upper.max(pj - pi);
            }
        }
        Symbolic {
            n,
            perm,
            inverse,
            lower,
            upper,
        }
    }

    fn fits(&self, a: &SparseMatrix) -> bool {
        a.nrows() == self.n
            && a.iter().all(|(i, j, _)| {
                let (pi, pj) = (self.inverse[i], self.inverse[j]);
                if pi > pj {
                    pi - pj <= self.lower
                } else {
                    pj - pi <= self.upper
                }
            })
    }
}

/// Reverse Cuthill–McKee ordering of the symmetrised pattern.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.iter() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut seeds: Vec<usize> = (0..n).collect();
    seeds.sort_by_key(|&v| (degree[v], v));
    for &start in &seeds {
        if visited[start] {
            continue;
        }
        let root = pseudo_peripheral(start, &adj, &degree);
        let mut queue = VecDeque::new();
        visited[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(root: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut level = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    level[root] = 0;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(start: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut root = start;
    let mut ecc = 0;
    for _ in 0..8 {
        let level = bfs_levels(root, adj);
        let depth = level.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
        if depth <= ecc && root != start {
            break;
        }
        ecc = depth;
        let candidate = (0..adj.len())
            .filter(|&v| level[v] == depth)
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(root);
        if candidate == root {
            break;
        }
        root = candidate;
    }
    root
}

/// LU factors in column-major band storage, rows swapped by partial pivoting.
#[derive(Debug, Clone)]
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ld + (self.kl + self.ku + i - j)
    }

    fn factor(a: &SparseMatrix, sym: &Symbolic) -> std::result::Result<BandLu, usize> {
        let n = sym.n;
        let (kl, ku) = (sym.lower, sym.upper);
        let ld = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            ku,
            ld,
            ab: vec![0.0; ld * n],
            pivots: vec![0; n],
        };
        for (i, j, v) in a.iter() {
            let k = lu.idx(sym.inverse[i], sym.inverse[j]);
            lu.ab[k] = v;
        }
        let ku_fill = kl + ku;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut p = j;
            let mut best = lu.ab[lu.idx(j, j)].abs();
            for i in j + 1..=j + km {
                let v = lu.ab[lu.idx(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(j);
            }
            lu.pivots[j] = p;
            let last = (j + ku_fill).min(n - 1);
            if p != j {
                for c in j..=last {
                    let (x, y) = (lu.idx(j, c), lu.idx(p, c));
                    lu.ab.swap(x, y);
                }
            }
            let diag = lu.ab[lu.idx(j, j)];
            let col = lu.idx(j + 1, j);
            for v in &mut lu.ab[col..col + km] {
                *v /= diag;
            }
            for c in j + 1..=last {
                let u = lu.ab[lu.idx(j, c)];
                if u == 0.0 {
                    continue;
                }
                let dst = lu.idx(j + 1, c);
                for i in 0..km {
                    let l = lu.ab[col + i];
                    lu.ab[dst + i] -= l * u;
                }
            }
        }
        Ok(lu)
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for j in 0..n {
            let p = self.pivots[j];
            if p != j {
                b.swap(j, p);
            }
            let km = self.kl.min(n - 1 - j);
            let bj = b[j];
            if bj != 0.0 {
                let col = self.idx(j + 1, j);
                for i in 0..km {
                    b[j + 1 + i] -= self.ab[col + i] * bj;
                }
            }
        }
        let w = self.kl + self.ku;
        for j in (0..n).rev() {
            b[j] /= self.ab[self.idx(j, j)];
            let bj = b[j];
            if bj != 0.0 {
                for i in j.saturating_sub(w)..j {
                    b[i] -= self.ab[self.idx(i, j)] * bj;
                }
            }
        }
    }
}

/// Lower Cholesky factor in row-major band storage.
#[derive(Debug, Clone)]
struct BandCholesky {
    n: usize,
    kd: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kd + 1) + (j + self.kd - i)
    }

    fn factor(a: &SparseMatrix, sym: &Symbolic) -> Option<BandCholesky> {
        let n = sym.n;
        let kd = sym.lower.max(sym.upper);
        let mut ch = BandCholesky {
            n,
            kd,
            l: vec![0.0; n * (kd + 1)],
        };
        for (i, j, v) in a.iter() {
            let (pi, pj) = (sym.inverse[i], sym.inverse[j]);
            if pi >= pj {
                let k = ch.idx(pi, pj);
                ch.l[k] = v;
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(kd);
            for j in lo..=i {
                let mut s = ch.l[ch.idx(i, j)];
                let kstart = lo.max(j.saturating_sub(kd));
                for k in kstart..j {
                    s -= ch.l[ch.idx(i, k)] * ch.l[ch.idx(j, k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    let k = ch.idx(i, i);
                    ch.l[k] = s.sqrt();
                } else {
                    let k = ch.idx(i, j);
                    ch.l[k] = s / ch.l[ch.idx(j, j)];
                }
            }
        }
        Some(ch)
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(self.kd)..i {
                s -= self.l[self.idx(i, k)] * b[k];
            }
            b[i] = s / self.l[self.idx(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + self.kd + 1).min(n) {
                s -= self.l[self.idx(k, i)] * b[k];
            }
            b[i] = s / self.l[self.idx(i, i)];
        }
    }
}

#[derive(Debug, Clone)]
enum Factors {
    Lu(BandLu),
    Cholesky(BandCholesky),
}

/// Reusable direct solver with cached ordering.
#[derive(Debug, Default)]
pub struct DirectSolver {
    symbolic: Option<Symbolic>,
    factors: Option<Factors>,
    /// Number of ordering analyses performed.
    pub symbolic_count: usize,
    /// Number of numeric factorisations performed.
    pub numeric_count: usize,
    /// Write every factored matrix here in Matrix Market format when set.
    pub dump_dir: Option<PathBuf>,
}

impl DirectSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Half bandwidths (lower, upper) of the cached ordering.
    pub fn bandwidths(&self) -> Option<(usize, usize)> {
        self.symbolic.as_ref().map(|s| (s.lower, s.upper))
    }

    pub fn factor(&mut self, a: &SparseMatrix) -> Result<()> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension {
                expected: a.nrows(),
                actual: a.ncols(),
            });
        }
        if let Some(dir) = &self.dump_dir {
            let path = dir.join(format!("system_{:05}.mtx", self.numeric_count));
            a.write_matrix_market(&path)?;
        }
        let reuse = self.symbolic.as_ref().is_some_and(|s| s.fits(a));
        if !reuse {
            self.symbolic = Some(Symbolic::analyse(a));
            self.symbolic_count += 1;
        }
        let sym = self.symbolic.as_ref().expect("symbolic analysis present");
        self.numeric_count += 1;
        self.factors = None;
        if a.is_symmetric() {
            if let Some(ch) = BandCholesky::factor(a, sym) {
                self.factors = Some(Factors::Cholesky(ch));
                return Ok(());
            }
            log::debug!("Cholesky failed on symmetric matrix, falling back to LU");
        }
        match BandLu::factor(a, sym) {
            Ok(lu) => {
                self.factors = Some(Factors::Lu(lu));
                Ok(())
            }
            Err(k) => Err(Error::SingularMatrix { row: sym.perm[k] }),
        }
    }

    /// Solve with the most recent factorisation.
    pub fn solve_factored(&self, b: &[f64]) -> Result<Vec<f64>> {
        let sym = self
            .symbolic
            .as_ref()
            .ok_or_else(|| Error::Config("solve called before factor".into()))?;
        if b.len() != sym.n {
            return Err(Error::Dimension {
                expected: sym.n,
                actual: b.len(),
            });
        }
        let mut y: Vec<f64> = sym.perm.iter().map(|&p| b[p]).collect();
        match self.factors.as_ref() {
            Some(Factors::Lu(lu)) => lu.solve_in_place(&mut y),
            Some(Factors::Cholesky(ch)) => ch.solve_in_place(&mut y),
            None => return Err(Error::Config("no valid factorisation".into())),
        }
        let mut x = vec![0.0; sym.n];
        for (k, &p) in sym.perm.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(x)
    }

    pub fn solve(&mut self, a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
        self.factor(a)?;
        self.solve_factored(b)
    }

    /// True when the last factorisation used the Cholesky path.
    pub fn used_cholesky(&self) -> bool {
        matches!(self.factors, Some(Factors::Cholesky(_)))
    }
}

/// Scaled residual ‖Ax − b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞).
pub fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x).expect("dimensions checked by caller");
    let r = ax.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let xn = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bn = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    r / (a.norm_inf() * xn + bn)
}
