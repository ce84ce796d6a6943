//! Named tensors and local terms used throughout the tests and the CLI.

use num_complex::Complex64 as C64;

use crate::linalg::{self, c, real, Mat, ONE, ZERO};
use crate::mps::MpsTensor;
use crate::rng::complex_normal_matrix;

fn ket_bra(d: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// `A^0 = |0⟩⟨0|`, `A^1 = |1⟩⟨1|`.
pub fn ghz() -> MpsTensor {
    MpsTensor::new(vec![ket_bra(2, 0, 0), ket_bra(2, 1, 1)]).expect("valid")
}

/// AKLT tensor in the spin-1 basis `(+, 0, −)`, already trace-preserving:
/// `A^+ = √(2/3) σ^+`, `A^0 = −√(1/3) σ^z`, `A^− = −√(2/3) σ^−`.
pub fn aklt() -> MpsTensor {
    let s = (2.0f64 / 3.0).sqrt();
    let t = (1.0f64 / 3.0).sqrt();
    let plus = ket_bra(2, 0, 1) * real(s);
    let zero = linalg::from_row_major(2, 2, &[real(-t), ZERO, ZERO, real(t)]);
    let minus = ket_bra(2, 1, 0) * real(-s);
    MpsTensor::new(vec![plus, zero, minus]).expect("valid")
}

/// Cluster-state tensor `A^s = |s⟩⟨s| H`. Its injectivity index is 2.
pub fn cluster() -> MpsTensor {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let had = linalg::from_row_major(2, 2, &[real(h), real(h), real(h), real(-h)]);
    MpsTensor::new(vec![ket_bra(2, 0, 0) * &had, ket_bra(2, 1, 1) * &had]).expect("valid")
}

/// Bond-dimension-one tensor of the product state `⊗|v⟩`.
pub fn product(v: &[C64]) -> MpsTensor {
    MpsTensor::new(v.iter().map(|&z| Mat::from_element(1, 1, z)).collect()).expect("valid")
}

/// Site tensor with i.i.d. standard complex Gaussian entries, scaled so that
/// `tr Σ A^i† A^i = D`.
pub fn random_mps_tensor<R: rand::Rng + ?Sized>(rng: &mut R, d: usize, bond: usize) -> MpsTensor {
    let mats: Vec<Mat> = (0..d).map(|_| complex_normal_matrix(rng, bond, bond)).collect();
    let total: f64 = mats.iter().map(|m| linalg::fro(m).powi(2)).sum();
    let s = real((bond as f64 / total).sqrt());
    MpsTensor::new(mats.into_iter().map(|m| m * s).collect()).expect("valid")
}

/// `|01⟩⟨01| + |10⟩⟨10|` on two qubits (a domain-wall projector).
pub fn ising_projector() -> Mat {
    let mut p = Mat::zeros(4, 4);
    p[(1, 1)] = ONE;
    p[(2, 2)] = ONE;
    p
}

pub fn pauli_x() -> Mat {
    linalg::from_row_major(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> Mat {
    linalg::from_row_major(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> Mat {
    linalg::from_row_major(2, 2, &[ONE, ZERO, ZERO, real(-1.0)])
}

/// Spin-1 operators `(S^x, S^y, S^z)` in the basis `(+, 0, −)`.
pub fn spin1() -> [Mat; 3] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let sx = linalg::from_row_major(3, 3, &[ZERO, real(r), ZERO, real(r), ZERO, real(r), ZERO, real(r), ZERO]);
    let sy = linalg::from_row_major(
        3,
        3,
        &[ZERO, c(0.0, -r), ZERO, c(0.0, r), ZERO, c(0.0, -r), ZERO, c(0.0, r), ZERO],
    );
    let sz = linalg::from_row_major(3, 3, &[ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, real(-1.0)]);
    [sx, sy, sz]
}

/// `exp(iθ S)` for a Hermitian generator `S`.
pub fn rotation(generator: &Mat, theta: f64) -> Mat {
    let (vals, vecs) = linalg::eigh(generator);
    let phases = Mat::from_diagonal(&linalg::Vector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| C64::from_polar(1.0, theta * l)),
    ));
    &vecs * phases * vecs.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_preserving_defect(a: &MpsTensor) -> f64 {
        let b = a.bond_dim();
        let s = a.matrices().iter().fold(Mat::zeros(b, b), |acc, m| acc + m.adjoint() * m);
        linalg::fro(&(s - Mat::identity(b, b)))
    }

    #[test]
    fn named_tensors_are_isometric() {
        assert!(trace_preserving_defect(&aklt()) < 1e-15);
        assert!(trace_preserving_defect(&ghz()) < 1e-15);
        assert!(trace_preserving_defect(&cluster()) < 1e-15);
    }

    #[test]
    fn spin1_algebra() {
        let [sx, sy, sz] = spin1();
        let comm = &sx * &sy - &sy * &sx;
        assert!(linalg::fro(&(comm - &sz * c(0.0, 1.0))) < 1e-14);
        let casimir = &sx * &sx + &sy * &sy + &sz * &sz;
        assert!(linalg::fro(&(casimir - Mat::identity(3, 3) * real(2.0))) < 1e-14);
        // a π rotation about x squares to the identity for integer spin
        let rx = rotation(&sx, std::f64::consts::PI);
        assert!(linalg::fro(&(&rx * &rx - Mat::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn ising_projector_is_projector() {
        let p = ising_projector();
        assert_eq!(&p * &p, p);
    }
}
