//! Lowest eigenpairs of Hermitian operators.
//!
//! Small operators are diagonalized densely. Larger ones use a thick-restart
//! Lanczos iteration with full reorthogonalization; eigenpairs are found one
//! at a time, each run deflating the vectors already locked, so degenerate
//! levels are resolved from independent random starts.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::limits::limits;
use crate::linalg::{self, Mat, ZERO};
use crate::rng::{complex_normal_vec, instance_rng};

/// A Hermitian linear map applied matrix-free.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[C64], y: &mut [C64]);

    fn to_dense(&self) -> Mat {
        let n = self.dim();
        let mut m = Mat::zeros(n, n);
        let mut e = vec![ZERO; n];
        let mut y = vec![ZERO; n];
        for j in 0..n {
            e[j] = linalg::ONE;
            self.apply(&e, &mut y);
            e[j] = ZERO;
            m.column_mut(j).copy_from_slice(&y);
        }
        m
    }
}

impl LinearOperator for Mat {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let r = self * linalg::Vector::from_column_slice(x);
        y.copy_from_slice(r.as_slice());
    }

    fn to_dense(&self) -> Mat {
        self.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Absolute tolerance on `‖A x − θ x‖`.
    pub tol: f64,
    pub krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: crate::tol::EIGEN_RESIDUAL, krylov: 80, max_restarts: 500, seed: 0x1a2c }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    pub residuals: Vec<f64>,
    pub dense: bool,
}

impl EigenPairs {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.par_iter().zip(b.par_iter()).map(|(x, y)| x.conj() * y).sum()
}

fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += a * xi);
}

fn norm(a: &[C64]) -> f64 {
    a.par_iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(a: &mut [C64], s: f64) {
    a.par_iter_mut().for_each(|z| *z *= s);
}

fn project_out(w: &mut [C64], vs: &[Vec<C64>]) {
    for v in vs {
        let c = dot(v, w);
        axpy(w, -c, v);
    }
}

fn residual_norm<A: LinearOperator + ?Sized>(op: &A, x: &[C64], theta: f64) -> f64 {
    let mut y = vec![ZERO; x.len()];
    op.apply(x, &mut y);
    y.par_iter().zip(x.par_iter()).map(|(a, b)| (a - b * theta).norm_sqr()).sum::<f64>().sqrt()
}

/// Lowest `k` eigenpairs.
pub fn lowest<A: LinearOperator + ?Sized>(op: &A, k: usize, opts: &EigenOptions) -> Result<EigenPairs> {
    lowest_resolving_gap(op, k, None, opts)
}

/// Iterative runs stop after this many levels even if no gap was resolved.
pub const MAX_LEVELS: usize = 64;

/// Lowest eigenpairs: at least `k`, and when `gap_tol` is given, keeps going
/// until one value exceeds the lowest by more than `gap_tol` (or the space or
/// [`MAX_LEVELS`] is exhausted).
pub fn lowest_resolving_gap<A: LinearOperator + ?Sized>(
    op: &A,
    k: usize,
    gap_tol: Option<f64>,
    opts: &EigenOptions,
) -> Result<EigenPairs> {
    let n = op.dim();
    let k = k.min(n).max(1);
    if n <= limits().dense_eig {
        let m = linalg::hermitize(&op.to_dense());
        let (vals, vecs) = linalg::eigh(&m);
        let mut take = k;
        if let Some(g) = gap_tol {
            while take < n && take < k.max(MAX_LEVELS) && vals[take - 1] - vals[0] <= g {
                take += 1;
            }
        }
        let vectors: Vec<Vec<C64>> = (0..take).map(|j| vecs.column(j).iter().copied().collect()).collect();
        let residuals = vectors.iter().zip(&vals).map(|(v, &t)| residual_norm(op, v, t)).collect();
        return Ok(EigenPairs { values: vals[..take].to_vec(), vectors, residuals, dense: true });
    }
    let mut out = EigenPairs { values: vec![], vectors: vec![], residuals: vec![], dense: false };
    loop {
        let done_k = out.values.len() >= k;
        let gap_seen = match gap_tol {
            None => true,
            Some(g) => out.values.iter().any(|&v| v - out.values[0] > g),
        };
        if (done_k && gap_seen) || out.values.len() >= n || out.values.len() >= k.max(MAX_LEVELS) {
            break;
        }
        let (theta, x, res) = lowest_deflated(op, &out.vectors, opts, out.values.len() as u64)?;
        out.values.push(theta);
        out.vectors.push(x);
        out.residuals.push(res);
    }
    // deflation finds levels in order up to rounding; sort to be safe
    let mut order: Vec<usize> = (0..out.values.len()).collect();
    order.sort_by(|&a, &b| out.values[a].total_cmp(&out.values[b]));
    Ok(EigenPairs {
        values: order.iter().map(|&i| out.values[i]).collect(),
        vectors: order.iter().map(|&i| out.vectors[i].clone()).collect(),
        residuals: order.iter().map(|&i| out.residuals[i]).collect(),
        dense: false,
    })
}

/// Lowest eigenpair of `A` restricted to the orthogonal complement of `locked`.
fn lowest_deflated<A: LinearOperator + ?Sized>(
    op: &A,
    locked: &[Vec<C64>],
    opts: &EigenOptions,
    stream: u64,
) -> Result<(f64, Vec<C64>, f64)> {
    let n = op.dim();
    let m = opts.krylov.min(n - locked.len()).max(2);
    let mut rng = instance_rng(opts.seed, stream);
    let mut v0 = complex_normal_vec(&mut rng, n);
    project_out(&mut v0, locked);
    project_out(&mut v0, locked);
    let nv = norm(&v0);
    scale(&mut v0, 1.0 / nv);

    let mut basis: Vec<Vec<C64>> = vec![v0];
    let mut h = Mat::zeros(m, m);
    let mut start = 0usize;
    let mut last_res = f64::INFINITY;
    let mut w = vec![ZERO; n];
    for _ in 0..opts.max_restarts {
        let mut beta;
        let mut j = start;
        loop {
            op.apply(&basis[j], &mut w);
            project_out(&mut w, locked);
            for pass in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(v, &w);
                    axpy(&mut w, -c, v);
                    if pass == 0 {
                        h[(i, j)] = c;
                    } else {
                        h[(i, j)] += c;
                    }
                }
                if pass == 0 {
                    project_out(&mut w, locked);
                }
            }
            beta = norm(&w);
            if j + 1 == m || beta < 1e-13 {
                break;
            }
            let mut next = w.clone();
            scale(&mut next, 1.0 / beta);
            basis.push(next);
            j += 1;
        }
        let s = j + 1;
        let hs = Mat::from_fn(s, s, |a, b| if a <= b { h[(a, b)] } else { h[(b, a)].conj() });
        let (theta, y) = linalg::eigh(&hs);
        let res0 = beta * y[(s - 1, 0)].norm();
        last_res = res0;
        let ritz = |col: usize| -> Vec<C64> {
            let mut u = vec![ZERO; n];
            for (i, v) in basis.iter().enumerate().take(s) {
                axpy(&mut u, y[(i, col)], v);
            }
            u
        };
        if res0 <= opts.tol || beta < 1e-13 {
            let mut x = ritz(0);
            project_out(&mut x, locked);
            let nx = norm(&x);
            scale(&mut x, 1.0 / nx);
            let res = residual_norm(op, &x, theta[0]);
            return Ok((theta[0], x, res));
        }
        // thick restart: keep the lowest Ritz vectors plus the residual direction
        let keep = (s / 2).clamp(1, s - 1);
        let mut new_basis: Vec<Vec<C64>> = (0..keep).map(ritz).collect();
        let mut f = w.clone();
        scale(&mut f, 1.0 / beta);
        new_basis.push(f);
        h = Mat::zeros(m, m);
        for i in 0..keep {
            h[(i, i)] = linalg::real(theta[i]);
        }
        basis = new_basis;
        start = keep;
    }
    Err(Error::NonConvergence { residual: last_res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use crate::rng::complex_normal_matrix;

    /// Diagonal operator with a prescribed spectrum hidden by a random unitary.
    struct Conjugated {
        m: Mat,
    }

    impl LinearOperator for Conjugated {
        fn dim(&self) -> usize {
            self.m.nrows()
        }
        fn apply(&self, x: &[C64], y: &mut [C64]) {
            self.m.apply(x, y)
        }
    }

    fn planted(spectrum: &[f64], seed: u64) -> Conjugated {
        let mut rng = instance_rng(seed, 0);
        let u = crate::rng::random_unitary(&mut rng, spectrum.len());
        let d = Mat::from_diagonal(&linalg::Vector::from_iterator(spectrum.len(), spectrum.iter().map(|&x| real(x))));
        Conjugated { m: &u * d * u.adjoint() }
    }

    #[test]
    fn lanczos_finds_degenerate_low_levels() {
        let n = 600;
        let mut spec: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.01).collect();
        spec[0] = 0.0;
        spec[1] = 0.0;
        spec[2] = 0.5;
        let op = planted(&spec, 3);
        assert!(n > limits().dense_eig);
        let r = lowest_resolving_gap(&op, 2, Some(1e-8), &EigenOptions::default()).unwrap();
        assert!(!r.dense);
        assert_eq!(r.values.len(), 3);
        assert!(r.values[0].abs() < 1e-9 && r.values[1].abs() < 1e-9);
        assert!((r.values[2] - 0.5).abs() < 1e-9);
        assert!(r.max_residual() < 1e-9);
    }

    #[test]
    fn dense_path_matches() {
        let mut rng = instance_rng(4, 0);
        let g = complex_normal_matrix(&mut rng, 20, 20);
        let h = linalg::hermitize(&g);
        let r = lowest(&h, 3, &EigenOptions::default()).unwrap();
        let (all, _) = linalg::eigh(&h);
        assert!(r.dense);
        for k in 0..3 {
            assert!((r.values[k] - all[k]).abs() < 1e-10);
        }
    }
}
