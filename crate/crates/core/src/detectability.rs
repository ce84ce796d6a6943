//! The detectability-lemma operator `DL(H) = (Π_even Q_i)(Π_odd Q_i)` for a
//! nearest-neighbour frustration-free ring `H = Σ P_i`, with `Q_i = 1 − P_i`.
//!
//! Bond `i` couples sites `i` and `i+1 (mod L)`. The odd layer holds the bonds
//! starting at sites `0, 2, 4, …` and is applied first; the even layer holds
//! `1, 3, …, L−1` and includes the wrap bond.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigensolver::{self, EigenOptions, LinearOperator};
use crate::error::{size_check, Error, Result};
use crate::limits::limits;
use crate::linalg::{self, Mat, ONE, ZERO};
use crate::mps::{Boundary, Mpo, IN, LEFT, OUT, RIGHT};
use crate::parent::{self, Lattice, SparseHamiltonian};
use crate::rng::{complex_normal_vec, Rng};
use crate::tensor::Tensor;
use crate::tol;

#[derive(Debug, Clone)]
pub struct DlOperator {
    p: Mat,
    q: Mat,
    phys_dim: usize,
    sites: usize,
    /// Placed `Q_i`: odd-layer bonds first, then even-layer bonds.
    bonds: SparseHamiltonian,
    odd: usize,
}

impl DlOperator {
    pub fn new(p: Mat, phys_dim: usize, sites: usize) -> Result<Self> {
        let local = phys_dim * phys_dim;
        if p.nrows() != local || p.ncols() != local {
            return Err(Error::DimensionMismatch(format!("P must be {local}x{local}")));
        }
        if sites < 4 || sites % 2 != 0 {
            return Err(Error::Invalid(format!("ring length must be even and at least 4, got {sites}")));
        }
        let herm = linalg::op_norm(&(&p - p.adjoint()));
        let idem = linalg::op_norm(&(&p * &p - &p));
        if herm > tol::PROJECTOR || idem > tol::PROJECTOR {
            return Err(Error::Invalid("P is not a projector".into()));
        }
        let q = Mat::identity(local, local) - &p;
        let order: Vec<usize> = (0..sites).step_by(2).chain((1..sites).step_by(2)).collect();
        let terms = order.iter().map(|&i| (q.clone(), vec![i, (i + 1) % sites])).collect();
        let bonds = SparseHamiltonian::from_terms(phys_dim, sites, terms)?;
        Ok(DlOperator { p, q, phys_dim, sites, bonds, odd: sites / 2 })
    }

    pub fn projector(&self) -> &Mat {
        &self.p
    }

    pub fn phys_dim(&self) -> usize {
        self.phys_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.phys_dim.pow(self.sites as u32)
    }

    /// `H = Σ_i P_i` on the ring.
    pub fn hamiltonian(&self) -> Result<SparseHamiltonian> {
        let h = parent::LocalHamiltonian::new(self.p.clone(), self.phys_dim, parent::RegionShape::Segment(2))?;
        parent::assemble(&h, Lattice::Ring(self.sites))
    }

    fn apply_bonds(&self, range: std::ops::Range<usize>, v: &mut Vec<C64>, scratch: &mut Vec<C64>) {
        for k in range {
            self.bonds.apply_term(k, v, scratch);
            std::mem::swap(v, scratch);
        }
    }

    fn check_len(&self, v: &[C64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("vector has {} entries, space has {}", v.len(), self.dim())));
        }
        Ok(())
    }

    /// `DL(H)^ℓ v`.
    pub fn apply(&self, ell: usize, v: &[C64]) -> Result<Vec<C64>> {
        self.check_len(v)?;
        let mut x = v.to_vec();
        let mut s = vec![ZERO; v.len()];
        for _ in 0..ell {
            self.apply_bonds(0..self.odd, &mut x, &mut s);
            self.apply_bonds(self.odd..self.sites, &mut x, &mut s);
        }
        Ok(x)
    }

    /// `(DL(H)^ℓ)† v`.
    pub fn apply_adjoint(&self, ell: usize, v: &[C64]) -> Result<Vec<C64>> {
        self.check_len(v)?;
        let mut x = v.to_vec();
        let mut s = vec![ZERO; v.len()];
        for _ in 0..ell {
            self.apply_bonds(self.odd..self.sites, &mut x, &mut s);
            self.apply_bonds(0..self.odd, &mut x, &mut s);
        }
        Ok(x)
    }

    /// Dense `DL(H)^ℓ`.
    pub fn dense(&self, ell: usize) -> Result<Mat> {
        let n = self.dim();
        size_check("dense DL operator", (n as u128) * (n as u128), limits().max_state * 4)?;
        let mut m = Mat::zeros(n, n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e[j] = ONE;
            let col = self.apply(ell, &e)?;
            e[j] = ZERO;
            m.column_mut(j).copy_from_slice(&col);
        }
        Ok(m)
    }
}

/// Result of comparing `‖Π_GS − DL^ℓ‖` with `(Δ/4 + 1)^{−ℓ/2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DlCheck {
    pub l: usize,
    pub ell: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub gap: f64,
    pub ground_energy: f64,
    pub ground_degeneracy: usize,
    /// The ground band was degenerate, so its projector stands in for
    /// `|Ψ_GS⟩⟨Ψ_GS|`.
    pub projector_substituted: bool,
    pub holds: bool,
}

/// `M†M` with `M = Π − DL^ℓ`, negated so that its lowest eigenvalue is `−‖M‖²`.
struct NegGram<'a> {
    dl: &'a DlOperator,
    ell: usize,
    ground: &'a [Vec<C64>],
}

impl NegGram<'_> {
    fn project(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; x.len()];
        for g in self.ground {
            let c = linalg::inner(g, x);
            out.iter_mut().zip(g).for_each(|(o, gi)| *o += c * gi);
        }
        out
    }
}

impl LinearOperator for NegGram<'_> {
    fn dim(&self) -> usize {
        self.dl.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let dlx = self.dl.apply(self.ell, x).expect("length checked");
        let mx: Vec<C64> = self.project(x).iter().zip(&dlx).map(|(a, b)| a - b).collect();
        let back = self.dl.apply_adjoint(self.ell, &mx).expect("length checked");
        let pm = self.project(&mx);
        y.iter_mut().zip(pm.iter().zip(&back)).for_each(|(o, (a, b))| *o = -(a - b));
    }
}

/// `(Δ/4 + 1)^{−ℓ/2}`.
pub fn dl_rhs(gap: f64, ell: usize) -> f64 {
    (gap / 4.0 + 1.0).powf(-(ell as f64) / 2.0)
}

/// Checks the lemma for each `ℓ` against the exact ground band of `H = Σ P_i`.
pub fn dl_bound_series(dl: &DlOperator, ells: &[usize]) -> Result<Vec<DlCheck>> {
    let h = dl.hamiltonian()?;
    let gs = parent::ground_space(&h, dl.sites)?;
    let r = &gs.report;
    if r.e0.abs() > 1e-8 {
        return Err(Error::Precondition(format!("H is frustrated: E0 = {:e}", r.e0)));
    }
    ells.iter()
        .map(|&ell| {
            let op = NegGram { dl, ell, ground: &gs.vectors };
            let pairs = eigensolver::lowest(&op, 1, &EigenOptions::default())?;
            let lhs = (-pairs.values[0]).max(0.0).sqrt();
            let rhs = dl_rhs(r.gap, ell);
            Ok(DlCheck {
                l: dl.sites,
                ell,
                lhs,
                rhs,
                margin: rhs - lhs,
                gap: r.gap,
                ground_energy: r.e0,
                ground_degeneracy: r.ground_degeneracy,
                projector_substituted: r.ground_degeneracy > 1,
                holds: lhs <= rhs + 1e-8,
            })
        })
        .collect()
}

pub fn dl_bound_check(dl: &DlOperator, ell: usize) -> Result<DlCheck> {
    Ok(dl_bound_series(dl, &[ell])?.remove(0))
}

/// Operator-Schmidt split `Q = Σ_k X_k ⊗ Y_k`, all non-zero terms kept.
fn split_two_site(q: &Mat, d: usize) -> (Vec<Mat>, Vec<Mat>) {
    // rows (o1, i1), cols (o2, i2)
    let r = Mat::from_fn(d * d, d * d, |a, b| {
        let (o1, i1, o2, i2) = (a / d, a % d, b / d, b % d);
        q[(o1 * d + o2, i1 * d + i2)]
    });
    let (u, s, vt) = linalg::svd(&r);
    let rank = tol::numerical_rank(d * d, d * d, &s).max(1);
    let xs = (0..rank).map(|k| Mat::from_fn(d, d, |o, i| u[(o * d + i, k)] * s[k].sqrt())).collect();
    let ys = (0..rank).map(|k| Mat::from_fn(d, d, |o, i| vt[(k, o * d + i)] * s[k].sqrt())).collect();
    (xs, ys)
}

fn site(left: usize, right: usize, d: usize, f: impl Fn(usize, usize, usize, usize) -> C64) -> Tensor {
    Tensor::from_fn(vec![left, d, d, right], vec![LEFT, OUT, IN, RIGHT], |i| f(i[0], i[1], i[2], i[3])).expect("shape")
}

/// One layer of two-site gates as a periodic MPO. `first` is the parity of
/// the sites that carry the left half of each gate.
fn layer_mpo(xs: &[Mat], ys: &[Mat], d: usize, sites: usize, first: usize) -> Mpo {
    let r = xs.len();
    let tensors = (0..sites)
        .map(|k| {
            if k % 2 == first {
                site(1, r, d, |_, o, i, b| xs[b][(o, i)])
            } else {
                site(r, 1, d, |a, o, i, _| ys[a][(o, i)])
            }
        })
        .collect::<Vec<_>>();
    Mpo::new(tensors, Boundary::Periodic).expect("consistent bonds")
}

/// `top · bottom` (bottom applied first), bond spaces fused `(top, bottom)`.
fn compose(top: &Mpo, bottom: &Mpo) -> Result<Mpo> {
    let sites = top
        .sites()
        .iter()
        .zip(bottom.sites())
        .map(|(t, b)| {
            let (tl, d, _, tr) = (t.dims()[0], t.dims()[1], t.dims()[2], t.dims()[3]);
            let (bl, br) = (b.dims()[0], b.dims()[3]);
            size_check("MPO site tensor", (tl * bl * tr * br * d * d) as u128, limits().max_mpo_site)?;
            let mut data = vec![ZERO; tl * bl * d * d * tr * br];
            let idx = |a: usize, o: usize, i: usize, b: usize| ((a * d + o) * d + i) * (tr * br) + b;
            for a1 in 0..tl {
                for b1 in 0..tr {
                    for o in 0..d {
                        for m in 0..d {
                            let x = t.get(&[a1, o, m, b1]);
                            if x == ZERO {
                                continue;
                            }
                            for a2 in 0..bl {
                                for b2 in 0..br {
                                    for i in 0..d {
                                        let y = b.get(&[a2, m, i, b2]);
                                        if y != ZERO {
                                            data[idx(a1 * bl + a2, o, i, b1 * br + b2)] += x * y;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            Tensor::new(vec![tl * bl, d, d, tr * br], vec![LEFT, OUT, IN, RIGHT], data)
        })
        .collect::<Result<Vec<_>>>()?;
    Mpo::new(sites, Boundary::Periodic)
}

/// Structural bond dimension of `DL^ℓ`: `r^ℓ` with `r` the operator-Schmidt
/// rank of `Q`.
pub fn dl_mpo_bond(dl: &DlOperator, ell: usize) -> usize {
    let (xs, _) = split_two_site(&dl.q, dl.phys_dim);
    xs.len().pow(ell as u32)
}

/// `DL(H)^ℓ` as a stack of `2ℓ` single-layer periodic MPOs, bottom layer
/// first. Contracting the stack site by site gives an MPO whose bond is the
/// product of the layer bonds; [`LayeredMpo::fuse`] does that explicitly when
/// the fused site tensors fit the cap.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredMpo {
    layers: Vec<Mpo>,
    sites: usize,
    phys_dim: usize,
}

impl LayeredMpo {
    pub fn layers(&self) -> &[Mpo] {
        &self.layers
    }

    /// Fused bond at every cut (`N + 1` values, periodic).
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut out = vec![1usize; self.sites + 1];
        for layer in &self.layers {
            for (o, b) in out.iter_mut().zip(layer.bond_dims()) {
                *o = o.saturating_mul(b);
            }
        }
        out
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.layers.iter().try_fold(v.to_vec(), |acc, layer| layer.apply(&acc))
    }

    /// Explicit MPO with fused bonds.
    pub fn fuse(&self) -> Result<Mpo> {
        let d = self.phys_dim;
        let bond = self.max_bond() as u128;
        size_check("MPO site tensor", bond.saturating_mul(bond).saturating_mul((d * d) as u128), limits().max_mpo_site)?;
        let identity = Mpo::new(
            (0..self.sites).map(|_| site(1, 1, d, |_, o, i, _| if o == i { ONE } else { ZERO })).collect(),
            Boundary::Periodic,
        )?;
        self.layers.iter().try_fold(identity, |acc, layer| compose(layer, &acc))
    }
}

/// `DL(H)^ℓ` from the SVD split of each `Q_i`, without truncation. Every
/// fused bond is `r^ℓ ≤ d^{2ℓ}`.
pub fn dl_as_mpo(dl: &DlOperator, ell: usize) -> Result<LayeredMpo> {
    let d = dl.phys_dim;
    let (xs, ys) = split_two_site(&dl.q, d);
    let odd = layer_mpo(&xs, &ys, d, dl.sites, 0);
    let even = layer_mpo(&xs, &ys, d, dl.sites, 1);
    let layers = (0..ell).flat_map(|_| [odd.clone(), even.clone()]).collect();
    Ok(LayeredMpo { layers, sites: dl.sites, phys_dim: d })
}

/// Largest deviation between the MPO and the matrix-free operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MpoAgreement {
    /// Compared column by column on every basis vector (`true`) or on
    /// `samples` random vectors.
    pub dense: bool,
    /// Largest entry deviation (dense) or largest `‖(W − DL^ℓ)v‖ / ‖v‖`.
    pub max_deviation: f64,
    pub samples: usize,
}

/// Compares the MPO with `DL^ℓ` applied matrix-free: on every basis vector
/// when `d^N ≤ 1024`, otherwise on random Gaussian vectors.
pub fn mpo_agreement(dl: &DlOperator, ell: usize, mpo: &LayeredMpo, samples: usize, seed: u64) -> Result<MpoAgreement> {
    let dim = dl.dim();
    if dim <= 1024 {
        let dev = (0..dim)
            .into_par_iter()
            .map(|j| -> Result<f64> {
                let mut e = vec![ZERO; dim];
                e[j] = ONE;
                let a = mpo.apply(&e)?;
                let b = dl.apply(ell, &e)?;
                Ok(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        return Ok(MpoAgreement { dense: true, max_deviation: dev, samples: dim });
    }
    let mut rng = Rng::seed_from_u64(seed);
    let mut dev: f64 = 0.0;
    for _ in 0..samples {
        let v = complex_normal_vec(&mut rng, dim);
        let a = mpo.apply(&v)?;
        let b = dl.apply(ell, &v)?;
        let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        dev = dev.max(diff / linalg::vec_norm(&v));
    }
    Ok(MpoAgreement { dense: false, max_deviation: dev, samples })
}
