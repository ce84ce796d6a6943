//! Region maps, parent Hamiltonians and their low spectra on rings and tori.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::injectivity_index_mps;
use crate::eigensolver::{self, EigenOptions, EigenPairs, LinearOperator};
use crate::error::{size_check, Error, Result, Status};
use crate::limits::limits;
use crate::linalg::{self, Mat, ZERO};
use crate::mps::{Mps, MpsTensor};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionShape {
    /// `n` consecutive sites of a chain.
    Segment(usize),
    /// `n × n` block of a square lattice, sites in row-major order.
    Square(usize),
}

impl RegionShape {
    pub fn sites(&self) -> usize {
        match *self {
            RegionShape::Segment(n) => n,
            RegionShape::Square(n) => n * n,
        }
    }
}

/// `Γ_R`: columns are region contractions with one virtual boundary basis
/// state each; rows run over physical configurations of the region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub shape: RegionShape,
    pub phys_dim: usize,
    pub gamma: Mat,
}

impl RegionMap {
    pub fn rank(&self) -> usize {
        linalg::rank(&self.gamma)
    }
}

/// Region map of `n` consecutive sites: entry `(i_1…i_n, (a, b))` is
/// `(A^{i_1} ⋯ A^{i_n})_{ab}`.
pub fn gamma_map(a: &MpsTensor, n: usize) -> Result<RegionMap> {
    if n == 0 {
        return Err(Error::Invalid("region must contain at least one site".into()));
    }
    let (d, bond) = (a.phys_dim() as u128, a.bond_dim() as u128);
    size_check("region map", d.saturating_pow(n as u32).saturating_mul(bond * bond), limits().max_region)?;
    let words = a.block(n);
    let b = a.bond_dim();
    let gamma = Mat::from_fn(words.phys_dim(), b * b, |r, c| words.matrix(r)[(c / b, c % b)]);
    Ok(RegionMap { shape: RegionShape::Segment(n), phys_dim: a.phys_dim(), gamma })
}

/// A translation-invariant local projector.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalHamiltonian {
    pub term: Mat,
    pub phys_dim: usize,
    pub shape: RegionShape,
}

impl LocalHamiltonian {
    pub fn new(term: Mat, phys_dim: usize, shape: RegionShape) -> Result<Self> {
        let dim = (phys_dim as u128).saturating_pow(shape.sites() as u32);
        if term.nrows() as u128 != dim || term.ncols() as u128 != dim {
            return Err(Error::DimensionMismatch(format!("term must be {dim}x{dim}")));
        }
        let herm = linalg::op_norm(&(&term - term.adjoint()));
        let idem = linalg::op_norm(&(&term * &term - &term));
        if herm > tol::PROJECTOR || idem > tol::PROJECTOR {
            return Err(Error::Invalid(format!("term is not a projector (‖h−h†‖ = {herm:e}, ‖h²−h‖ = {idem:e})")));
        }
        Ok(LocalHamiltonian { term, phys_dim, shape })
    }

    pub fn is_zero(&self) -> bool {
        self.term.iter().all(|z| *z == ZERO)
    }
}

/// `h = 1 − Π_{Im Γ}`.
pub fn parent_term(map: &RegionMap) -> LocalHamiltonian {
    let q = linalg::range_basis(&map.gamma);
    let n = map.gamma.nrows();
    let term = linalg::hermitize(&(Mat::identity(n, n) - &q * q.adjoint()));
    LocalHamiltonian { term, phys_dim: map.phys_dim, shape: map.shape }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Lattice {
    Ring(usize),
    Torus(usize),
}

impl Lattice {
    pub fn sites(&self) -> usize {
        match *self {
            Lattice::Ring(l) => l,
            Lattice::Torus(l) => l * l,
        }
    }

    pub fn size(&self) -> usize {
        match *self {
            Lattice::Ring(l) | Lattice::Torus(l) => l,
        }
    }
}

#[derive(Debug, Clone)]
struct Placement {
    term: usize,
    support: Vec<usize>,
    /// Offsets of the local basis states relative to the zero digit pattern.
    offsets: Vec<usize>,
}

/// Sum of local terms on a product space `(ℂ^d)^{⊗n}`, applied matrix-free.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    phys_dim: usize,
    sites: usize,
    terms: Vec<Mat>,
    placements: Vec<Placement>,
    strides: Vec<usize>,
}

impl SparseHamiltonian {
    /// `terms[k].0` acts on the sites `terms[k].1`, in that order (first site
    /// most significant in the local basis).
    pub fn from_terms(phys_dim: usize, sites: usize, terms: Vec<(Mat, Vec<usize>)>) -> Result<Self> {
        size_check("Hilbert space", (phys_dim as u128).saturating_pow(sites as u32), limits().max_hilbert)?;
        let strides: Vec<usize> = (0..sites).map(|k| phys_dim.pow((sites - 1 - k) as u32)).collect();
        let mut mats: Vec<Mat> = Vec::new();
        let mut placements = Vec::new();
        for (m, support) in terms {
            let r = support.len();
            if m.nrows() != phys_dim.pow(r as u32) || m.ncols() != m.nrows() {
                return Err(Error::DimensionMismatch(format!("term on {r} sites must be {0}x{0}", phys_dim.pow(r as u32))));
            }
            let mut seen = support.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != r || support.iter().any(|&s| s >= sites) {
                return Err(Error::Invalid(format!("bad support {support:?}")));
            }
            let idx = match mats.iter().position(|x| *x == m) {
                Some(i) => i,
                None => {
                    mats.push(m);
                    mats.len() - 1
                }
            };
            let offsets = (0..phys_dim.pow(r as u32))
                .map(|j| {
                    let mut rem = j;
                    let mut off = 0;
                    for k in (0..r).rev() {
                        off += (rem % phys_dim) * strides[support[k]];
                        rem /= phys_dim;
                    }
                    off
                })
                .collect();
            placements.push(Placement { term: idx, support, offsets });
        }
        Ok(SparseHamiltonian { phys_dim, sites, terms: mats, placements, strides })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    pub fn term_count(&self) -> usize {
        self.placements.len()
    }

    fn entry(&self, p: &Placement, x: &[C64], idx: usize) -> C64 {
        let d = self.phys_dim;
        let m = &self.terms[p.term];
        let mut row = 0;
        let mut base = idx;
        for &s in &p.support {
            let digit = (idx / self.strides[s]) % d;
            row = row * d + digit;
            base -= digit * self.strides[s];
        }
        let mut acc = ZERO;
        for (j, &off) in p.offsets.iter().enumerate() {
            let h = m[(row, j)];
            if h != ZERO {
                acc += h * x[base + off];
            }
        }
        acc
    }

    /// `y = τ(h) x` for the single placed term `k`.
    pub fn apply_term(&self, k: usize, x: &[C64], y: &mut [C64]) {
        let p = &self.placements[k];
        y.par_iter_mut().enumerate().for_each(|(idx, out)| *out = self.entry(p, x, idx));
    }
}

impl LinearOperator for SparseHamiltonian {
    fn dim(&self) -> usize {
        self.phys_dim.pow(self.sites as u32)
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.par_iter_mut().enumerate().with_min_len(256).for_each(|(idx, out)| {
            *out = self.placements.iter().map(|p| self.entry(p, x, idx)).sum();
        });
    }
}

/// Supports of all translates of a region on a lattice.
pub fn translates(shape: RegionShape, lattice: Lattice) -> Result<Vec<Vec<usize>>> {
    match (shape, lattice) {
        (RegionShape::Segment(n), Lattice::Ring(l)) => {
            if n > l {
                return Err(Error::Invalid(format!("segment of {n} sites on a ring of {l}")));
            }
            Ok((0..l).map(|k| (0..n).map(|j| (k + j) % l).collect()).collect())
        }
        (RegionShape::Square(n), Lattice::Torus(l)) => {
            if n > l {
                return Err(Error::Invalid(format!("{n}x{n} square on a {l}x{l} torus")));
            }
            Ok((0..l * l)
                .map(|k| {
                    let (r, c) = (k / l, k % l);
                    (0..n * n).map(|j| ((r + j / n) % l) * l + (c + j % n) % l).collect()
                })
                .collect())
        }
        _ => Err(Error::Invalid("region shape does not fit the lattice".into())),
    }
}

/// `H = Σ_τ τ(h)` over all translations, periodic boundary.
pub fn assemble(h: &LocalHamiltonian, lattice: Lattice) -> Result<SparseHamiltonian> {
    let supports = translates(h.shape, lattice)?;
    SparseHamiltonian::from_terms(h.phys_dim, lattice.sites(), supports.into_iter().map(|s| (h.term.clone(), s)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub l: usize,
    /// Lowest levels found, ascending.
    pub eigenvalues: Vec<f64>,
    pub ground_degeneracy: usize,
    pub e0: f64,
    /// First level above the ground band (equal to `e0` if none was found).
    pub e1: f64,
    pub gap: f64,
    pub solver_residual: f64,
}

impl SpectrumReport {
    fn from_pairs(l: usize, pairs: &EigenPairs) -> Self {
        let e0 = pairs.values[0];
        let ground_degeneracy = pairs.values.iter().filter(|&&v| v - e0 <= tol::DEGENERACY).count();
        let e1 = pairs.values.iter().copied().find(|&v| v - e0 > tol::DEGENERACY).unwrap_or(e0);
        SpectrumReport {
            l,
            eigenvalues: pairs.values.clone(),
            ground_degeneracy,
            e0,
            e1,
            gap: e1 - e0,
            solver_residual: pairs.max_residual(),
        }
    }
}

/// Ground band plus spectral data.
#[derive(Debug, Clone)]
pub struct GroundSpace {
    pub report: SpectrumReport,
    /// Orthonormal basis of the ground band.
    pub vectors: Vec<Vec<C64>>,
}

/// Lowest `k` levels (more if needed to reach the first level above the
/// ground band).
pub fn low_spectrum<A: LinearOperator + ?Sized>(h: &A, k: usize, l: usize) -> Result<SpectrumReport> {
    Ok(ground_space_k(h, k, l)?.report)
}

pub fn ground_space<A: LinearOperator + ?Sized>(h: &A, l: usize) -> Result<GroundSpace> {
    ground_space_k(h, 2, l)
}

fn ground_space_k<A: LinearOperator + ?Sized>(h: &A, k: usize, l: usize) -> Result<GroundSpace> {
    if k < 2 {
        return Err(Error::Invalid("need at least two levels".into()));
    }
    let pairs = eigensolver::lowest_resolving_gap(h, k, Some(tol::DEGENERACY), &EigenOptions::default())?;
    let report = SpectrumReport::from_pairs(l, &pairs);
    let vectors = pairs.vectors.into_iter().take(report.ground_degeneracy).collect();
    Ok(GroundSpace { report, vectors })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrustrationReport {
    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
    pub energy: f64,
    /// Largest single-term expectation.
    pub max_term: f64,
}

pub fn frustration_check(h: &SparseHamiltonian, psi: &[C64]) -> Result<FrustrationReport> {
    if psi.len() != h.dim() {
        return Err(Error::DimensionMismatch(format!("state has {} entries, space has {}", psi.len(), h.dim())));
    }
    let nn = linalg::inner(psi, psi).re;
    if !(nn > 0.0) {
        return Err(Error::Invalid("zero state".into()));
    }
    let mut y = vec![ZERO; psi.len()];
    let mut total = 0.0;
    let mut max_term: f64 = 0.0;
    for k in 0..h.term_count() {
        h.apply_term(k, psi, &mut y);
        let e = linalg::inner(psi, &y).re / nn;
        total += e;
        max_term = max_term.max(e);
    }
    Ok(FrustrationReport { energy: total, max_term })
}

/// One line of a gap series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub l: usize,
    pub status: Status,
    pub report: Option<SpectrumReport>,
    /// Frustration residual of the tensor's own ring state.
    pub frustration: Option<f64>,
    pub message: String,
}

/// Region length used by default: `i(A) + 1`.
pub fn default_region(a: &MpsTensor) -> Result<usize> {
    injectivity_index_mps(a, None)
        .index
        .map(|i| i + 1)
        .ok_or_else(|| Error::NotInjective("tensor is not normal; give the region explicitly".into()))
}

/// Parent Hamiltonian spectra on rings of the given sizes. Failures are
/// reported per row; the series continues.
pub fn gap_series(a: &MpsTensor, region: Option<usize>, sizes: &[usize]) -> Result<Vec<GapRow>> {
    let n = match region {
        Some(n) => n,
        None => default_region(a)?,
    };
    let h = parent_term(&gamma_map(a, n)?);
    Ok(sizes
        .par_iter()
        .map(|&l| {
            let run = || -> Result<(SpectrumReport, f64)> {
                let ham = assemble(&h, Lattice::Ring(l))?;
                let report = low_spectrum(&ham, 2, l)?;
                let psi = Mps::uniform(a, l).to_state()?;
                let fr = frustration_check(&ham, &psi)?;
                Ok((report, fr.energy))
            };
            match run() {
                Ok((report, fr)) => {
                    GapRow { l, status: Status::Ok, report: Some(report), frustration: Some(fr), message: String::new() }
                }
                Err(e) => GapRow { l, status: Status::of_error(&e), report: None, frustration: None, message: e.to_string() },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use crate::models;
    use crate::rng::{instance_rng, random_state};

    fn dense_ring(term: &Mat, d: usize, r: usize, l: usize) -> Mat {
        // independent oracle: embed by explicit permutation of tensor factors
        let dim = d.pow(l as u32);
        let mut out = Mat::zeros(dim, dim);
        for k in 0..l {
            for row in 0..dim {
                for col in 0..dim {
                    let digits = |x: usize| (0..l).map(|s| (x / d.pow((l - 1 - s) as u32)) % d).collect::<Vec<_>>();
                    let (dr, dc) = (digits(row), digits(col));
                    let support: Vec<usize> = (0..r).map(|j| (k + j) % l).collect();
                    if (0..l).any(|s| !support.contains(&s) && dr[s] != dc[s]) {
                        continue;
                    }
                    let lr = support.iter().fold(0, |acc, &s| acc * d + dr[s]);
                    let lc = support.iter().fold(0, |acc, &s| acc * d + dc[s]);
                    out[(row, col)] += term[(lr, lc)];
                }
            }
        }
        out
    }

    #[test]
    fn region_map_ranks() {
        assert_eq!(gamma_map(&models::ghz(), 1).unwrap().rank(), 2);
        let aklt2 = gamma_map(&models::aklt(), 2).unwrap();
        assert_eq!(aklt2.rank(), 4);
        let h = parent_term(&aklt2);
        assert!((h.term.trace().re - 5.0).abs() < 1e-10);
        let prod = gamma_map(&models::product(&[real(0.6), real(0.8)]), 3).unwrap();
        assert_eq!(prod.gamma.ncols(), 1);
    }

    #[test]
    fn ghz_parent_kernel() {
        let h = parent_term(&gamma_map(&models::ghz(), 2).unwrap());
        assert!(h.term[(0, 0)].norm() < 1e-12 && h.term[(3, 3)].norm() < 1e-12);
        assert!((h.term[(1, 1)] - real(1.0)).norm() < 1e-12);
    }

    #[test]
    fn assemble_matches_dense_oracle() {
        let p = models::ising_projector();
        let h = LocalHamiltonian::new(p.clone(), 2, RegionShape::Segment(2)).unwrap();
        let ham = assemble(&h, Lattice::Ring(4)).unwrap();
        let oracle = dense_ring(&p, 2, 2, 4);
        assert!(linalg::fro(&(ham.to_dense() - &oracle)) < 1e-14);
        let (vals, _) = linalg::eigh(&oracle);
        assert!(vals[0].abs() < 1e-12 && vals[1].abs() < 1e-12 && (vals[2] - 2.0).abs() < 1e-12);
        assert!(vals.iter().all(|v| (v - v.round()).abs() < 1e-12));

        let mut rng = instance_rng(31, 0);
        let a = models::random_mps_tensor(&mut rng, 2, 2);
        let t = parent_term(&gamma_map(&a, 3).unwrap());
        let ham = assemble(&t, Lattice::Ring(5)).unwrap();
        assert!(linalg::fro(&(ham.to_dense() - dense_ring(&t.term, 2, 3, 5))) < 1e-12);
    }

    #[test]
    fn ising_and_aklt_spectra() {
        let h = LocalHamiltonian::new(models::ising_projector(), 2, RegionShape::Segment(2)).unwrap();
        let r = low_spectrum(&assemble(&h, Lattice::Ring(6)).unwrap(), 2, 6).unwrap();
        assert_eq!(r.ground_degeneracy, 2);
        assert!(r.e0.abs() < 1e-10);
        // domain walls on a ring come in pairs
        assert!((r.gap - 2.0).abs() < 1e-10);

        let a = models::aklt();
        let t = parent_term(&gamma_map(&a, 3).unwrap());
        let ham = assemble(&t, Lattice::Ring(6)).unwrap();
        let r = low_spectrum(&ham, 2, 6).unwrap();
        assert_eq!(r.ground_degeneracy, 1);
        assert!(r.e0.abs() < 1e-9 && r.gap > 0.1);
        let psi = Mps::uniform(&a, 6).to_state().unwrap();
        assert!(frustration_check(&ham, &psi).unwrap().energy.abs() < 1e-10);
        let random = random_state(&mut instance_rng(32, 0), psi.len());
        assert!(frustration_check(&ham, &random).unwrap().energy > 0.1);
    }

    #[test]
    fn zero_term_gives_zero_operator() {
        let h = LocalHamiltonian::new(Mat::zeros(4, 4), 2, RegionShape::Segment(2)).unwrap();
        assert!(h.is_zero());
        let r = low_spectrum(&assemble(&h, Lattice::Ring(4)).unwrap(), 2, 4).unwrap();
        assert_eq!(r.gap, 0.0);
        assert!(r.eigenvalues.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn rejects_non_projector() {
        assert!(LocalHamiltonian::new(Mat::identity(4, 4) * real(2.0), 2, RegionShape::Segment(2)).is_err());
    }
}
