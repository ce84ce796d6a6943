//! PEPS on small square tori: exact contraction, region maps, the 2D
//! injectivity index and boundary states.
//!
//! Site tensors carry the labels `(phys, up, right, down, left)`. On the
//! `L × L` torus, site `(r, c)` is number `r·L + c` (row-major, first site
//! most significant). The bond above site `(r, c)` is `v{r}_{c}` and the bond
//! to its left is `h{r}_{c}`.
//!
//! Boundary legs of an `n × n` region are ordered counter-clockwise from the
//! top-left corner: the left edge top to bottom, the bottom edge left to
//! right, the right edge bottom to top, then the top edge right to left.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::channels::{IndexReport, IndexStatus};
use crate::error::{size_check, Error, Result};
use crate::limits::limits;
use crate::linalg::{self, Mat, ONE, ZERO};
use crate::parent::{RegionMap, RegionShape};
use crate::rng::complex_normal;
use crate::tensor::Tensor;

pub use crate::gibbs::{gibbs_fit, GibbsFit};

pub const PHYS: &str = "phys";
pub const UP: &str = "up";
pub const RIGHT: &str = "right";
pub const DOWN: &str = "down";
pub const LEFT: &str = "left";

#[derive(Debug, Clone, PartialEq)]
pub struct PepsTensor {
    tensor: Tensor,
}

impl PepsTensor {
    pub fn new(t: Tensor) -> Result<Self> {
        let tensor = t.permute(&[PHYS, UP, RIGHT, DOWN, LEFT])?;
        let dims = tensor.dims();
        if dims[1..].iter().any(|&b| b != dims[1]) {
            return Err(Error::DimensionMismatch(format!("virtual dims must agree, got {:?}", &dims[1..])));
        }
        Ok(PepsTensor { tensor })
    }

    pub fn from_fn(d: usize, bond: usize, f: impl FnMut(&[usize]) -> C64) -> Result<Self> {
        PepsTensor::new(Tensor::from_fn(vec![d, bond, bond, bond, bond], vec![PHYS, UP, RIGHT, DOWN, LEFT], f)?)
    }

    /// I.i.d. standard complex Gaussian entries.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, d: usize, bond: usize) -> Self {
        PepsTensor::from_fn(d, bond, |_| complex_normal(rng)).expect("valid shape")
    }

    /// `A[i, u, r, d, l] = 1` iff all five indices are equal.
    pub fn ghz_copy(d: usize) -> Self {
        PepsTensor::from_fn(d, d, |i| if i.iter().all(|&x| x == i[0]) { ONE } else { ZERO }).expect("valid shape")
    }

    /// Bond-dimension-one tensor of the product state `⊗|v⟩`.
    pub fn product(v: &[C64]) -> Self {
        PepsTensor::from_fn(v.len(), 1, |i| v[i[0]]).expect("valid shape")
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn phys_dim(&self) -> usize {
        self.tensor.dims()[0]
    }

    pub fn bond_dim(&self) -> usize {
        self.tensor.dims()[1]
    }

    fn placed(&self, labels: [String; 5]) -> Tensor {
        self.tensor.with_labels(labels.to_vec()).expect("distinct labels")
    }
}

fn hl(r: usize, c: usize) -> String {
    format!("h{r}_{c}")
}

fn vl(r: usize, c: usize) -> String {
    format!("v{r}_{c}")
}

fn pl(r: usize, c: usize) -> String {
    format!("p{r}_{c}")
}

/// Labels `(phys, up, right, down, left)` of site `(r, c)` on the torus.
fn torus_labels(r: usize, c: usize, l: usize) -> [String; 5] {
    [pl(r, c), vl(r, c), hl(r, (c + 1) % l), vl((r + 1) % l, c), hl(r, c)]
}

/// Contracts tensors one after another over shared labels, refusing any
/// intermediate above the tensor cap.
fn contract_sequence(tensors: Vec<Tensor>) -> Result<Tensor> {
    let mut it = tensors.into_iter();
    let mut acc = it.next().ok_or_else(|| Error::Invalid("empty network".into()))?;
    for t in it {
        let mut size: u128 = 1;
        for (l, &d) in acc.labels().iter().zip(acc.dims()) {
            if !t.has_label(l) {
                size = size.saturating_mul(d as u128);
            }
        }
        for (l, &d) in t.labels().iter().zip(t.dims()) {
            if !acc.has_label(l) {
                size = size.saturating_mul(d as u128);
            }
        }
        size_check("intermediate tensor", size, limits().max_tensor)?;
        acc = acc.contract_shared(&t)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractionOrder {
    RowMajor,
    ColumnMajor,
}

/// Amplitudes of the PEPS on the `L × L` torus.
pub fn peps_contract(a: &PepsTensor, l: usize) -> Result<Vec<C64>> {
    peps_contract_ordered(a, l, ContractionOrder::RowMajor)
}

pub fn peps_contract_ordered(a: &PepsTensor, l: usize, order: ContractionOrder) -> Result<Vec<C64>> {
    if l < 2 {
        return Err(Error::Invalid("torus side must be at least 2".into()));
    }
    let (d, bond) = (a.phys_dim() as u128, a.bond_dim() as u128);
    size_check("column transfer", bond.saturating_pow(2 * l as u32), 1 << 16)?;
    size_check("PEPS state", d.saturating_pow((l * l) as u32), limits().max_hilbert)?;
    let sites: Vec<(usize, usize)> = match order {
        ContractionOrder::RowMajor => (0..l * l).map(|k| (k / l, k % l)).collect(),
        ContractionOrder::ColumnMajor => (0..l * l).map(|k| (k % l, k / l)).collect(),
    };
    let net = sites.iter().map(|&(r, c)| a.placed(torus_labels(r, c, l))).collect();
    let t = contract_sequence(net)?;
    let out: Vec<String> = (0..l * l).map(|k| pl(k / l, k % l)).collect();
    let out: Vec<&str> = out.iter().map(String::as_str).collect();
    Ok(t.permute(&out)?.into_data())
}

/// Boundary leg labels of the `n × n` region in the top-left corner of an
/// `L × L` torus (`L > n`), in counter-clockwise order.
fn torus_boundary_labels(n: usize, l: usize) -> Vec<String> {
    let mut b = Vec::with_capacity(4 * n);
    b.extend((0..n).map(|r| hl(r, 0)));
    b.extend((0..n).map(|c| vl(n % l, c)));
    b.extend((0..n).rev().map(|r| hl(r, n % l)));
    b.extend((0..n).rev().map(|c| vl(0, c)));
    b
}

/// `Γ_R` for the open `n × n` square: rows are the region's physical
/// configurations (row-major), columns the `D^{4n}` boundary configurations.
pub fn peps_gamma(a: &PepsTensor, n: usize) -> Result<RegionMap> {
    if n == 0 {
        return Err(Error::Invalid("region side must be positive".into()));
    }
    let (d, bond) = (a.phys_dim() as u128, a.bond_dim() as u128);
    size_check(
        "region map",
        d.saturating_pow((n * n) as u32).saturating_mul(bond.saturating_pow(4 * n as u32)),
        limits().max_region,
    )?;
    // open square: bonds leaving the square get their own labels
    let label = |r: usize, c: usize| -> [String; 5] {
        let up = if r == 0 { format!("bt{c}") } else { vl(r, c) };
        let down = if r + 1 == n { format!("bb{c}") } else { vl(r + 1, c) };
        let left = if c == 0 { format!("bl{r}") } else { hl(r, c) };
        let right = if c + 1 == n { format!("br{r}") } else { hl(r, c + 1) };
        [pl(r, c), up, right, down, left]
    };
    let net = (0..n * n).map(|k| a.placed(label(k / n, k % n))).collect();
    let t = contract_sequence(net)?;
    let rows: Vec<String> = (0..n * n).map(|k| pl(k / n, k % n)).collect();
    let mut cols: Vec<String> = (0..n).map(|r| format!("bl{r}")).collect();
    cols.extend((0..n).map(|c| format!("bb{c}")));
    cols.extend((0..n).rev().map(|r| format!("br{r}")));
    cols.extend((0..n).rev().map(|c| format!("bt{c}")));
    let rows: Vec<&str> = rows.iter().map(String::as_str).collect();
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    Ok(RegionMap { shape: RegionShape::Square(n), phys_dim: a.phys_dim(), gamma: t.to_matrix(&rows, &cols)? })
}

/// Minimal `n ≤ n_max` with `Γ` of the `n × n` square injective. `NotFound`
/// does not certify that the tensor is not normal.
pub fn peps_injectivity_index(a: &PepsTensor, n_max: usize) -> IndexReport {
    let mut values = Vec::new();
    for n in 1..=n_max {
        let map = match peps_gamma(a, n) {
            Ok(m) => m,
            Err(e) => {
                return IndexReport {
                    index: None,
                    status: IndexStatus::SizeLimited,
                    n_max_searched: n - 1,
                    certificate: format!("n = {n}: {e}"),
                    values,
                }
            }
        };
        let rank = map.rank();
        values.push(rank as f64);
        if rank == map.gamma.ncols() {
            return IndexReport {
                index: Some(n),
                status: IndexStatus::Found,
                n_max_searched: n,
                certificate: format!("Γ of the {n}x{n} square has full column rank {rank}"),
                values,
            };
        }
    }
    IndexReport {
        index: None,
        status: IndexStatus::NotFound,
        n_max_searched: n_max,
        certificate: format!("no injective square up to {n_max}x{n_max}; this does not prove the tensor is not normal"),
        values,
    }
}

/// `ρ_R` on the virtual boundary of a region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryState {
    #[serde(skip)]
    pub rho: Mat,
    pub region: usize,
    pub l: usize,
    /// Number of boundary legs `4n`.
    pub sites: usize,
    pub site_dim: usize,
    pub trace_normalized: bool,
    pub min_eigenvalue: f64,
    pub hermiticity_defect: f64,
    pub warning: Option<String>,
}

/// Double-layer site tensor `Σ_p A[p,…] conj(A[p,…])`, each bond fused as
/// `(ket, bra)`.
fn double_layer(a: &PepsTensor, labels: [String; 4]) -> Tensor {
    let t = a.tensor();
    let (d, b) = (a.phys_dim(), a.bond_dim());
    let b2 = b * b;
    Tensor::from_fn(vec![b2; 4], labels.to_vec(), |i| {
        let (k, br): (Vec<usize>, Vec<usize>) = i.iter().map(|&x| (x / b, x % b)).unzip();
        (0..d)
            .map(|p| t.get(&[p, k[0], k[1], k[2], k[3]]) * t.get(&[p, br[0], br[1], br[2], br[3]]).conj())
            .sum()
    })
    .expect("valid shape")
}

/// Contracts the exterior of the `n × n` region (top-left corner) of the
/// `L × L` torus with its conjugate, leaving an operator on the `D^{4n}`
/// boundary space; the result is Hermitized and trace-normalized.
pub fn boundary_state(a: &PepsTensor, n: usize, l: usize) -> Result<BoundaryState> {
    if n == 0 || n >= l {
        return Err(Error::Invalid(format!("region {n}x{n} must be smaller than the {l}x{l} torus")));
    }
    let bond = a.bond_dim();
    let m = 4 * n;
    size_check("boundary state", (bond as u128).saturating_pow(2 * m as u32), limits().max_tensor)?;
    let exterior: Vec<(usize, usize)> = (0..l * l).map(|k| (k / l, k % l)).filter(|&(r, c)| r >= n || c >= n).collect();
    let net = exterior
        .iter()
        .map(|&(r, c)| {
            let [_, up, right, down, left] = torus_labels(r, c, l);
            double_layer(a, [up, right, down, left])
        })
        .collect();
    let t = contract_sequence(net)?;
    let legs = torus_boundary_labels(n, l);
    let legs_ref: Vec<&str> = legs.iter().map(String::as_str).collect();
    let t = t.permute(&legs_ref)?;
    // split each fused leg (ket, bra) into row and column indices
    let dim = bond.pow(m as u32);
    let mut rho = Mat::zeros(dim, dim);
    for (flat, z) in t.data().iter().enumerate() {
        let (mut rem, mut row, mut col, mut place) = (flat, 0usize, 0usize, 1usize);
        for _ in 0..m {
            let leg = rem % (bond * bond);
            rem /= bond * bond;
            row += (leg / bond) * place;
            col += (leg % bond) * place;
            place *= bond;
        }
        rho[(row, col)] = *z;
    }
    let defect = linalg::hermiticity_defect(&rho) / linalg::fro(&rho).max(f64::MIN_POSITIVE);
    let rho = linalg::hermitize(&rho);
    let tr = rho.trace().re;
    if !(tr.abs() > 0.0) {
        return Err(Error::Invalid("boundary state has zero trace".into()));
    }
    let rho = rho / linalg::real(tr);
    let (vals, _) = linalg::eigh(&rho);
    let warning = (vals[0] < -1e-8).then(|| format!("negative eigenvalue {:e}; check the contraction order", vals[0]));
    Ok(BoundaryState {
        rho,
        region: n,
        l,
        sites: m,
        site_dim: bond,
        trace_normalized: true,
        min_eigenvalue: vals[0],
        hermiticity_defect: defect,
        warning,
    })
}
