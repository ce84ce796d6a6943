//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64 as C64;

use crate::tol;

pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Thin SVD with singular values sorted non-increasing.
/// Returns `(U, s, V†)` with `U: m×k`, `V†: k×n`, `k = min(m, n)`.
pub fn svd(m: &Mat) -> (Mat, Vec<f64>, Mat) {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return (Mat::zeros(rows, 0), vec![], Mat::zeros(0, cols));
    }
    let dec = SVD::new(m.clone(), true, true);
    let u = dec.u.expect("u requested");
    let vt = dec.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let s = order.iter().map(|&i| dec.singular_values[i]).collect();
    let u = Mat::from_fn(rows, k, |i, j| u[(i, order[j])]);
    let vt = Mat::from_fn(k, cols, |i, j| vt[(order[i], j)]);
    (u, s, vt)
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows().min(m.ncols()) == 0 {
        return vec![];
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn rank(m: &Mat) -> usize {
    tol::numerical_rank(m.nrows(), m.ncols(), &singular_values(m))
}

/// Largest singular value.
pub fn op_norm(m: &Mat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis (as columns) of the column space, rank decided by the
/// shared rule.
pub fn range_basis(m: &Mat) -> Mat {
    let (u, s, _) = svd(m);
    let r = tol::numerical_rank(m.nrows(), m.ncols(), &s);
    u.columns(0, r).into_owned()
}

/// Orthonormal basis of the null space: right singular vectors whose singular
/// value is at most `abs_tol`.
pub fn null_space(m: &Mat, abs_tol: f64) -> Mat {
    let n = m.ncols();
    // pad to a square system so that all right singular vectors are returned
    let padded = if m.nrows() < n {
        let mut p = Mat::zeros(n, n);
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, s, vt) = svd(&padded);
    let cols: Vec<Vector> = (0..n)
        .filter(|&i| s[i] <= abs_tol)
        .map(|i| vt.row(i).adjoint())
        .collect();
    if cols.is_empty() {
        Mat::zeros(n, 0)
    } else {
        Mat::from_columns(&cols)
    }
}

/// Right singular vector of the smallest singular value, and that value.
pub fn smallest_right_singular(m: &Mat) -> (Vector, f64) {
    let n = m.ncols();
    let padded = if m.nrows() < n {
        let mut p = Mat::zeros(n, n);
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (_, s, vt) = svd(&padded);
    (vt.row(n - 1).adjoint(), s[n - 1])
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], Mat::zeros(0, 0));
    }
    let h = hermitize(m);
    let dec = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]));
    let vals = order.iter().map(|&i| dec.eigenvalues[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| dec.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Eigenvalues of a general square complex matrix (via complex Schur form).
pub fn eigenvalues(m: &Mat) -> Vec<C64> {
    if m.nrows() == 0 {
        return vec![];
    }
    let (_, t) = Schur::new(m.clone()).unpack();
    (0..m.nrows()).map(|i| t[(i, i)]).collect()
}

pub fn hermitize(m: &Mat) -> Mat {
    (m + m.adjoint()) * real(0.5)
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = eigh(m);
    let fd = Vector::from_iterator(vals.len(), vals.iter().map(|&x| real(f(x))));
    let scaled = Mat::from_fn(vecs.nrows(), vecs.ncols(), |i, j| vecs[(i, j)] * fd[j]);
    scaled * vecs.adjoint()
}

/// Moore-Penrose pseudo-inverse with the shared rank rule.
pub fn pinv(m: &Mat) -> Mat {
    let (u, s, vt) = svd(m);
    let r = tol::numerical_rank(m.nrows(), m.ncols(), &s);
    let mut out = Mat::zeros(m.ncols(), m.nrows());
    for k in 0..r {
        let col = vt.row(k).adjoint();
        let row = u.column(k).adjoint();
        out += (col * row) * real(1.0 / s[k]);
    }
    out
}

/// Unitary factor `W` of the polar decomposition `M = W P`.
pub fn polar_unitary(m: &Mat) -> Mat {
    let (u, _, vt) = svd(m);
    u * vt
}

/// 2-norm condition number (infinite when singular).
pub fn condition_number(m: &Mat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&a), Some(&b)) if b > 0.0 => a / b,
        _ => f64::INFINITY,
    }
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Frobenius norm.
pub fn fro(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Index of the largest-magnitude entry (first one on ties).
pub fn argmax_abs(v: &[C64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        match best {
            Some((_, b)) if a <= b * (1.0 + 1e-12) => {}
            _ => best = Some((i, a)),
        }
    }
    best.map(|(i, _)| i)
}

/// Unit phase that makes the largest-magnitude entry real positive.
pub fn fixing_phase(v: &[C64]) -> C64 {
    match argmax_abs(v) {
        Some(i) if v[i].norm() > 0.0 => v[i].conj() / v[i].norm(),
        _ => ONE,
    }
}

/// Multiplies by [`fixing_phase`].
pub fn phase_fixed(v: &[C64]) -> Vec<C64> {
    let p = fixing_phase(v);
    v.iter().map(|z| z * p).collect()
}

pub fn mat_phase_fixed(m: &Mat) -> Mat {
    let p = fixing_phase(m.as_slice());
    m * p
}

/// `‖A - A†‖_F`.
pub fn hermiticity_defect(m: &Mat) -> f64 {
    fro(&(m - m.adjoint()))
}

/// Matrix from row-major entries.
pub fn from_row_major(rows: usize, cols: usize, data: &[C64]) -> Mat {
    Mat::from_row_slice(rows, cols, data)
}

/// Row-major entries of a matrix.
pub fn to_row_major(m: &Mat) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_normal_matrix, instance_rng};

    #[test]
    fn svd_sorted_and_reconstructs() {
        let mut rng = instance_rng(7, 0);
        let m = complex_normal_matrix(&mut rng, 5, 3);
        let (u, s, vt) = svd(&m);
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let sd = Mat::from_diagonal(&Vector::from_iterator(3, s.iter().map(|&x| real(x))));
        assert!(fro(&(u * sd * vt - &m)) < 1e-12);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = from_row_major(1, 3, &[ONE, ONE, ZERO]);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!(fro(&(&m * &ns)) < 1e-12);
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let m = from_row_major(2, 2, &[real(2.0), real(5.0), ZERO, c(0.0, 1.0)]);
        let mut ev = eigenvalues(&m);
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(0.0, 1.0)).norm() < 1e-12);
        assert!((ev[1] - real(2.0)).norm() < 1e-12);
    }

    #[test]
    fn polar_of_scaled_unitary() {
        let mut rng = instance_rng(3, 1);
        let u = crate::rng::random_unitary(&mut rng, 3);
        let w = polar_unitary(&(&u * real(2.5)));
        assert!(fro(&(w - u)) < 1e-12);
    }

    #[test]
    fn phase_fix_is_deterministic() {
        let v = vec![c(0.1, 0.0), c(0.0, -2.0)];
        let f = phase_fixed(&v);
        assert!((f[1] - real(2.0)).norm() < 1e-15);
    }
}
