//! Matrix product states and operators on open chains and rings.
//!
//! Site tensors carry the labels `(left, phys, right)`; MPO site tensors
//! carry `(left, out, in, right)`. Physical configurations are ordered
//! row-major with site 0 most significant.

use num_complex::Complex64 as C64;

use crate::channels;
use crate::error::{size_check, Error, Result};
use crate::limits::limits;
use crate::linalg::{self, real, Mat, ONE, ZERO};
use crate::tensor::Tensor;
use crate::tol;

pub const LEFT: &str = "left";
pub const PHYS: &str = "phys";
pub const RIGHT: &str = "right";
pub const OUT: &str = "out";
pub const IN: &str = "in";

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

/// A translation-invariant site tensor: `d` square `D×D` matrices `A^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsTensor {
    mats: Vec<Mat>,
}

impl MpsTensor {
    pub fn new(mats: Vec<Mat>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::Invalid("site tensor needs at least one matrix".into()));
        };
        let bond = first.nrows();
        if bond == 0 || mats.iter().any(|m| m.nrows() != bond || m.ncols() != bond) {
            return Err(Error::DimensionMismatch("site matrices must be square and of equal size".into()));
        }
        if mats.iter().flat_map(|m| m.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("site tensor".into()));
        }
        Ok(MpsTensor { mats })
    }

    /// Reads a rank-3 tensor labelled `(left, phys, right)`.
    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        let t = t.permute(&[PHYS, LEFT, RIGHT])?;
        let (d, dl, dr) = (t.dims()[0], t.dims()[1], t.dims()[2]);
        if dl != dr {
            return Err(Error::DimensionMismatch(format!("virtual dims {dl} and {dr} differ")));
        }
        let block = dl * dr;
        MpsTensor::new((0..d).map(|i| linalg::from_row_major(dl, dr, &t.data()[i * block..(i + 1) * block])).collect())
    }

    pub fn to_tensor(&self) -> Tensor {
        let (d, b) = (self.phys_dim(), self.bond_dim());
        Tensor::from_fn(vec![b, d, b], vec![LEFT, PHYS, RIGHT], |i| self.mats[i[1]][(i[0], i[2])])
            .expect("consistent shape")
    }

    pub fn phys_dim(&self) -> usize {
        self.mats.len()
    }

    pub fn bond_dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn matrices(&self) -> &[Mat] {
        &self.mats
    }

    pub fn matrix(&self, i: usize) -> &Mat {
        &self.mats[i]
    }

    /// Blocks `k` consecutive sites: the new physical index runs over words
    /// `i_1 … i_k` in row-major order.
    pub fn block(&self, k: usize) -> MpsTensor {
        assert!(k >= 1);
        let mut words = self.mats.clone();
        for _ in 1..k {
            words = words.iter().flat_map(|w| self.mats.iter().map(move |a| w * a)).collect();
        }
        MpsTensor { mats: words }
    }

    /// `B^i = Σ_j U_ij A^j`.
    pub fn apply_physical(&self, u: &Mat) -> Result<MpsTensor> {
        let d = self.phys_dim();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch(format!("physical operator must be {d}x{d}")));
        }
        let b = self.bond_dim();
        Ok(MpsTensor {
            mats: (0..d)
                .map(|i| (0..d).fold(Mat::zeros(b, b), |acc, j| acc + &self.mats[j] * u[(i, j)]))
                .collect(),
        })
    }

    /// `A^i ↦ Y⁻¹ A^i Y`.
    pub fn conjugate_by(&self, y: &Mat) -> Result<MpsTensor> {
        let yinv = invert(y)?;
        Ok(MpsTensor { mats: self.mats.iter().map(|a| &yinv * a * y).collect() })
    }

    /// `A^i ↦ Y A^i Y⁻¹` followed by a scalar factor.
    pub(crate) fn similarity(&self, y: &Mat, yinv: &Mat, scale: f64) -> MpsTensor {
        MpsTensor { mats: self.mats.iter().map(|a| y * a * yinv * real(scale)).collect() }
    }

    pub fn scaled(&self, z: C64) -> MpsTensor {
        MpsTensor { mats: self.mats.iter().map(|a| a * z).collect() }
    }
}

pub(crate) fn invert(y: &Mat) -> Result<Mat> {
    if y.nrows() != y.ncols() {
        return Err(Error::DimensionMismatch("gauge matrix must be square".into()));
    }
    let cond = linalg::condition_number(y);
    if !cond.is_finite() || cond > 1.0 / (y.nrows() as f64 * tol::RANK_EPS) {
        return Err(Error::Singular(format!("condition number {cond:e}")));
    }
    y.clone().try_inverse().ok_or_else(|| Error::Singular("inverse failed".into()))
}

/// Matrix product state with per-site tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct Mps {
    sites: Vec<MpsSite>,
    boundary: Boundary,
}

/// One site of an [`Mps`]: `d` matrices of shape `D_left × D_right`.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsSite {
    mats: Vec<Mat>,
}

impl MpsSite {
    pub fn new(mats: Vec<Mat>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::Invalid("site needs at least one matrix".into()));
        };
        if mats.iter().any(|m| m.shape() != first.shape()) || first.nrows() == 0 || first.ncols() == 0 {
            return Err(Error::DimensionMismatch("site matrices differ in shape".into()));
        }
        Ok(MpsSite { mats })
    }

    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        let t = t.permute(&[PHYS, LEFT, RIGHT])?;
        let (d, dl, dr) = (t.dims()[0], t.dims()[1], t.dims()[2]);
        let block = dl * dr;
        MpsSite::new((0..d).map(|i| linalg::from_row_major(dl, dr, &t.data()[i * block..(i + 1) * block])).collect())
    }

    pub fn to_tensor(&self) -> Tensor {
        let (dl, dr) = self.mats[0].shape();
        Tensor::from_fn(vec![dl, self.mats.len(), dr], vec![LEFT, PHYS, RIGHT], |i| self.mats[i[1]][(i[0], i[2])])
            .expect("consistent shape")
    }

    pub fn phys_dim(&self) -> usize {
        self.mats.len()
    }

    pub fn left_dim(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn right_dim(&self) -> usize {
        self.mats[0].ncols()
    }

    pub fn matrices(&self) -> &[Mat] {
        &self.mats
    }
}

impl Mps {
    pub fn new(sites: Vec<MpsSite>, boundary: Boundary) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Invalid("empty chain".into()));
        }
        let d = sites[0].phys_dim();
        for (k, w) in sites.windows(2).enumerate() {
            if w[0].right_dim() != w[1].left_dim() {
                return Err(Error::DimensionMismatch(format!("bond between sites {} and {}", k, k + 1)));
            }
        }
        if sites.iter().any(|s| s.phys_dim() != d) {
            return Err(Error::DimensionMismatch("physical dimensions differ".into()));
        }
        let (first, last) = (sites[0].left_dim(), sites[sites.len() - 1].right_dim());
        match boundary {
            Boundary::Periodic if first != last => {
                return Err(Error::DimensionMismatch("ring closure bond mismatch".into()))
            }
            Boundary::Open if first != 1 || last != 1 => {
                return Err(Error::DimensionMismatch("open chain must end in bond 1".into()))
            }
            _ => {}
        }
        Ok(Mps { sites, boundary })
    }

    /// Ring of `n` copies of a translation-invariant tensor.
    pub fn uniform(a: &MpsTensor, n: usize) -> Mps {
        let site = MpsSite { mats: a.mats.clone() };
        Mps { sites: vec![site; n.max(1)], boundary: Boundary::Periodic }
    }

    pub fn from_tensors(tensors: &[Tensor], boundary: Boundary) -> Result<Self> {
        Mps::new(tensors.iter().map(MpsSite::from_tensor).collect::<Result<_>>()?, boundary)
    }

    pub fn to_tensors(&self) -> Vec<Tensor> {
        self.sites.iter().map(MpsSite::to_tensor).collect()
    }

    pub fn sites(&self) -> &[MpsSite] {
        &self.sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn phys_dim(&self) -> usize {
        self.sites[0].phys_dim()
    }

    /// Bond dimensions from the left edge to the right edge (`N + 1` values).
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut b = vec![self.sites[0].left_dim()];
        b.extend(self.sites.iter().map(MpsSite::right_dim));
        b
    }

    /// Amplitude `Tr[A^{i_1} ⋯ A^{i_N}]` (the single entry for open chains).
    pub fn amplitude(&self, config: &[usize]) -> Result<C64> {
        if config.len() != self.len() {
            return Err(Error::DimensionMismatch(format!("config of length {} for {} sites", config.len(), self.len())));
        }
        let mut acc: Option<Mat> = None;
        for (k, (&i, site)) in config.iter().zip(&self.sites).enumerate() {
            if i >= site.phys_dim() {
                return Err(Error::IndexOutOfRange(format!("site {k}: {i} >= {}", site.phys_dim())));
            }
            acc = Some(match acc {
                None => site.mats[i].clone(),
                Some(m) => m * &site.mats[i],
            });
        }
        Ok(acc.expect("non-empty").trace())
    }

    /// Dense expansion of the state.
    pub fn to_state(&self) -> Result<Vec<C64>> {
        let d = self.phys_dim() as u128;
        size_check("dense MPS state", d.saturating_pow(self.len() as u32), limits().max_state)?;
        let d0 = self.sites[0].left_dim();
        // rows are (a0, configuration), columns the current right bond
        let mut cur = Mat::identity(d0, d0);
        for site in &self.sites {
            let rows = cur.nrows();
            let dp = site.phys_dim();
            let mut next = Mat::zeros(rows * dp, site.right_dim());
            for (i, a) in site.mats.iter().enumerate() {
                let block = &cur * a;
                for r in 0..rows {
                    next.row_mut(r * dp + i).copy_from(&block.row(r));
                }
            }
            cur = next;
        }
        let nconf = cur.nrows() / d0;
        Ok((0..nconf).map(|cfg| (0..d0).map(|a| cur[(a * nconf + cfg, a)]).sum()).collect())
    }

    /// `⟨ψ|ψ⟩` by transfer-matrix contraction.
    pub fn norm_sqr(&self) -> f64 {
        let ops: Vec<Option<&Mat>> = vec![None; self.len()];
        self.transfer_expectation(&ops).re
    }

    /// Contracts `⟨ψ| ⊗_k O_k |ψ⟩` where `None` means identity.
    fn transfer_expectation(&self, ops: &[Option<&Mat>]) -> C64 {
        let d0 = self.sites[0].left_dim();
        // environment indexed by (bra bond pair, ket bond pair) flattened as
        // rows (a0, a0') → cols (b, b')
        let mut env: Option<Mat> = None;
        for (site, op) in self.sites.iter().zip(ops) {
            let t = site_transfer(site, site, *op);
            env = Some(match env {
                None => t,
                Some(e) => e * t,
            });
        }
        let env = env.expect("non-empty");
        (0..d0).flat_map(|a| (0..d0).map(move |ap| (a, ap))).map(|(a, ap)| env[(a * d0 + ap, a * d0 + ap)]).sum()
    }

    /// `⟨ψ|O_site|ψ⟩ / ⟨ψ|ψ⟩` through transfer matrices.
    pub fn expectation_value(&self, op: &Mat, site: usize) -> Result<C64> {
        let d = self.phys_dim();
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch(format!("operator must be {d}x{d}")));
        }
        if site >= self.len() {
            return Err(Error::IndexOutOfRange(format!("site {site} of {}", self.len())));
        }
        let mut ops: Vec<Option<&Mat>> = vec![None; self.len()];
        ops[site] = Some(op);
        let norm = self.norm_sqr();
        if norm <= 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(self.transfer_expectation(&ops) / norm)
    }

    /// `⟨ψ|W|ψ⟩ / ⟨ψ|ψ⟩` for an MPO `W` on the same chain.
    pub fn expectation_mpo(&self, mpo: &Mpo) -> Result<C64> {
        if mpo.len() != self.len() || mpo.phys_dim() != self.phys_dim() {
            return Err(Error::DimensionMismatch("MPO and MPS sizes differ".into()));
        }
        let d0 = self.sites[0].left_dim();
        let w0 = mpo.sites[0].dim_of(LEFT)?;
        let mut env: Option<Mat> = None;
        for (site, w) in self.sites.iter().zip(&mpo.sites) {
            let t = mpo_transfer(site, w)?;
            env = Some(match env {
                None => t,
                Some(e) => e * t,
            });
        }
        let env = env.expect("non-empty");
        let mut acc = ZERO;
        for a in 0..d0 {
            for w in 0..w0 {
                for ap in 0..d0 {
                    let r = (a * w0 + w) * d0 + ap;
                    acc += env[(r, r)];
                }
            }
        }
        let norm = self.norm_sqr();
        if norm <= 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(acc / norm)
    }

    /// Von Neumann entropy (natural log) of the block of the first `cut`
    /// sites, from transfer-matrix Gram matrices.
    pub fn entanglement_entropy(&self, cut: usize) -> Result<f64> {
        Ok(entropy_of(&self.schmidt_weights(cut)?))
    }

    /// Squared Schmidt values across the cut after the first `cut` sites
    /// (for rings, the block `[0, cut)` against the rest), normalized to sum 1.
    pub fn schmidt_weights(&self, cut: usize) -> Result<Vec<f64>> {
        if cut == 0 || cut >= self.len() {
            return Err(Error::EmptySide);
        }
        let block_transfer = |range: std::ops::Range<usize>| -> Mat {
            range
                .map(|k| site_transfer(&self.sites[k], &self.sites[k], None))
                .reduce(|a, b| a * b)
                .expect("non-empty range")
        };
        let w = self.sites[0].left_dim();
        let c = self.sites[cut].left_dim();
        // T[(a,a'),(b,b')] = Σ conj(W_ab) W_a'b'
        let tl = block_transfer(0..cut);
        let tr = block_transfer(cut..self.len());
        let n = w * c;
        // left Gram G[(a,b),(a',b')] and right overlap C[(a,b),(a',b')]
        let gl = Mat::from_fn(n, n, |r, s| {
            let (a, b, ap, bp) = (r / c, r % c, s / c, s % c);
            tl[(a * w + ap, b * c + bp)]
        });
        let cm = Mat::from_fn(n, n, |r, s| {
            let (a, b, ap, bp) = (r / c, r % c, s / c, s % c);
            tr[(bp * c + b, ap * w + a)]
        });
        let sq = linalg::hermitian_fn(&gl, |x| x.max(0.0).sqrt());
        let m = &sq * linalg::hermitize(&cm) * &sq;
        let (vals, _) = linalg::eigh(&m);
        let total: f64 = vals.iter().filter(|&&x| x > 0.0).sum();
        if total <= 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        let mut p: Vec<f64> = vals.iter().map(|&x| (x / total).max(0.0)).collect();
        p.sort_by(|a, b| b.total_cmp(a));
        Ok(p)
    }
}

/// Transfer matrix of one site: rows `(a, a')`, cols `(b, b')`,
/// entry `Σ_{ij} conj(A^i_ab) O_ij B^j_a'b'`.
fn site_transfer(bra: &MpsSite, ket: &MpsSite, op: Option<&Mat>) -> Mat {
    let (dl, dr) = (bra.left_dim(), bra.right_dim());
    let (kl, kr) = (ket.left_dim(), ket.right_dim());
    let mut t = Mat::zeros(dl * kl, dr * kr);
    let d = bra.phys_dim();
    for i in 0..d {
        for j in 0..d {
            let w = match op {
                None if i == j => ONE,
                None => continue,
                Some(o) => o[(i, j)],
            };
            if w == ZERO {
                continue;
            }
            let (a, b) = (&bra.mats[i], &ket.mats[j]);
            for x in 0..dl {
                for y in 0..dr {
                    let ca = a[(x, y)].conj() * w;
                    if ca == ZERO {
                        continue;
                    }
                    for xp in 0..kl {
                        for yp in 0..kr {
                            t[(x * kl + xp, y * kr + yp)] += ca * b[(xp, yp)];
                        }
                    }
                }
            }
        }
    }
    t
}

/// Three-layer transfer: rows `(a, w, a')`, cols `(b, v, b')`.
fn mpo_transfer(site: &MpsSite, w: &Tensor) -> Result<Mat> {
    let w = w.permute(&[LEFT, OUT, IN, RIGHT])?;
    let (wl, d, _, wr) = (w.dims()[0], w.dims()[1], w.dims()[2], w.dims()[3]);
    let (dl, dr) = (site.left_dim(), site.right_dim());
    let mut t = Mat::zeros(dl * wl * dl, dr * wr * dr);
    for i in 0..d {
        for j in 0..d {
            for x in 0..wl {
                for y in 0..wr {
                    let wv = w.get(&[x, i, j, y]);
                    if wv == ZERO {
                        continue;
                    }
                    let (a, b) = (&site.mats[i], &site.mats[j]);
                    for p in 0..dl {
                        for q in 0..dr {
                            let ca = a[(p, q)].conj() * wv;
                            for pp in 0..dl {
                                for qp in 0..dr {
                                    t[((p * wl + x) * dl + pp, (q * wr + y) * dr + qp)] += ca * b[(pp, qp)];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(t)
}

/// `-Σ p log p` (natural log), ignoring zero weights.
pub fn entropy_of(weights: &[f64]) -> f64 {
    -weights.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

fn check_normalized(psi: &[C64]) -> Result<()> {
    let n = linalg::vec_norm(psi);
    if (n - 1.0).abs() > tol::RECONSTRUCTION {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

/// Number of sites `N` with `d^N == len`, if any.
fn sites_for(len: usize, d: usize) -> Option<usize> {
    if d < 2 {
        return None;
    }
    let (mut n, mut p) = (0usize, 1usize);
    while p < len {
        p = p.checked_mul(d)?;
        n += 1;
    }
    (p == len && n >= 1).then_some(n)
}

/// Open-boundary MPS from a dense state by successive Schmidt decompositions.
/// Singular values below `threshold` (absolute) or below the shared rank
/// cutoff are discarded.
pub fn mps_from_state(psi: &[C64], d: usize, n: usize, threshold: f64) -> Result<Mps> {
    match sites_for(psi.len(), d) {
        Some(m) if m == n => {}
        _ => return Err(Error::DimensionMismatch(format!("length {} is not {d}^{n}", psi.len()))),
    }
    check_normalized(psi)?;
    let mut sites = Vec::with_capacity(n);
    let mut bond = 1usize;
    let mut rest = Mat::from_row_slice(1, psi.len(), psi);
    for _ in 0..n - 1 {
        let cols = rest.ncols() / d;
        // rows (left bond, phys), cols remaining sites
        let m = Mat::from_fn(bond * d, cols, |r, c| {
            let (a, i) = (r / d, r % d);
            rest[(a, i * cols + c)]
        });
        let (u, s, vt) = linalg::svd(&m);
        let keep = tol::numerical_rank(m.nrows(), m.ncols(), &s)
            .min(s.iter().take_while(|&&x| x >= threshold).count())
            .max(1);
        let mats = (0..d)
            .map(|i| Mat::from_fn(bond, keep, |a, b| u[(a * d + i, b)]))
            .collect();
        sites.push(MpsSite { mats });
        rest = Mat::from_fn(keep, cols, |b, c| vt[(b, c)] * s[b]);
        bond = keep;
    }
    let mats = (0..d).map(|i| Mat::from_fn(bond, 1, |a, _| rest[(a, i)])).collect();
    sites.push(MpsSite { mats });
    Mps::new(sites, Boundary::Open)
}

/// Entropy of the reduced state on `subsystem` (sites, any order) of a dense
/// state of `n` sites with local dimension `d`.
pub fn entanglement_entropy_dense(psi: &[C64], d: usize, n: usize, subsystem: &[usize]) -> Result<f64> {
    Ok(entropy_of(&schmidt_weights_dense(psi, d, n, subsystem)?))
}

pub fn schmidt_weights_dense(psi: &[C64], d: usize, n: usize, subsystem: &[usize]) -> Result<Vec<f64>> {
    match sites_for(psi.len(), d) {
        Some(m) if m == n => {}
        _ => return Err(Error::DimensionMismatch(format!("length {} is not {d}^{n}", psi.len()))),
    }
    check_normalized(psi)?;
    let mut a: Vec<usize> = subsystem.to_vec();
    a.sort_unstable();
    a.dedup();
    if a.is_empty() || a.len() >= n || a.iter().any(|&s| s >= n) {
        return Err(Error::EmptySide);
    }
    let rest: Vec<usize> = (0..n).filter(|s| !a.contains(s)).collect();
    let labels: Vec<String> = (0..n).map(|k| format!("s{k}")).collect();
    let t = Tensor::new(vec![d; n], labels.clone(), psi.to_vec())?;
    let rows: Vec<&str> = a.iter().map(|&k| labels[k].as_str()).collect();
    let cols: Vec<&str> = rest.iter().map(|&k| labels[k].as_str()).collect();
    let m = t.to_matrix(&rows, &cols)?;
    Ok(linalg::singular_values(&m).iter().map(|s| s * s).collect())
}

/// Conjugates every internal bond by `Y` (`A ↦ Y⁻¹ A Y` on rings). On open
/// chains the two boundary bonds keep the identity.
pub fn gauge_transform(m: &Mps, y: &Mat) -> Result<Mps> {
    let yinv = invert(y)?;
    let n = m.len();
    let bonds = m.bond_dims();
    let gauge_at = |k: usize| -> Option<(&Mat, &Mat)> {
        // bond k sits to the left of site k
        let edge = m.boundary == Boundary::Open && (k == 0 || k == n);
        (!edge).then_some((y, &yinv))
    };
    for (k, &b) in bonds.iter().enumerate() {
        if gauge_at(k).is_some() && b != y.nrows() {
            return Err(Error::DimensionMismatch(format!("bond {k} has dim {b}, gauge is {}", y.nrows())));
        }
    }
    let sites = m
        .sites
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let left = gauge_at(k);
            let right = gauge_at(k + 1);
            let mats = s
                .mats
                .iter()
                .map(|a| {
                    let mut x = a.clone();
                    if let Some((_, yi)) = left {
                        x = yi * x;
                    }
                    if let Some((yy, _)) = right {
                        x *= yy;
                    }
                    x
                })
                .collect();
            MpsSite { mats }
        })
        .collect();
    Mps::new(sites, m.boundary)
}

/// Outcome of [`fundamental_gauge`].
#[derive(Debug, Clone)]
pub enum GaugeResult {
    /// `B^i = Y⁻¹ A^i Y` with the given relative residual. `Y` has unit
    /// Frobenius norm and its largest-magnitude entry is real positive.
    Gauge { y: Mat, residual: f64 },
    NoGauge { residual: f64 },
}

impl GaugeResult {
    pub fn gauge(&self) -> Option<&Mat> {
        match self {
            GaugeResult::Gauge { y, .. } => Some(y),
            GaugeResult::NoGauge { .. } => None,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            GaugeResult::Gauge { residual, .. } | GaugeResult::NoGauge { residual } => *residual,
        }
    }
}

/// Relative residual `‖(B^i) - (Y⁻¹A^iY)‖ / ‖(B^i)‖` over all `i`.
pub fn gauge_residual(a: &MpsTensor, b: &MpsTensor, y: &Mat) -> Result<f64> {
    let moved = a.conjugate_by(y)?;
    let num: f64 = moved.mats.iter().zip(&b.mats).map(|(x, z)| linalg::fro(&(x - z)).powi(2)).sum();
    let den: f64 = b.mats.iter().map(|z| linalg::fro(z).powi(2)).sum();
    Ok((num / den.max(f64::MIN_POSITIVE)).sqrt())
}

/// Finds `Y` with `B^i = Y⁻¹ A^i Y` for all `i`.
///
/// Solves the homogeneous system `A^i Y − Y B^i = 0` in the least-squares
/// sense (smallest right singular vector of the stacked coefficient matrix).
/// For a normal `A` the solution space of this system is at most one
/// dimensional, so the solution is unique up to a scalar.
pub fn fundamental_gauge(a: &MpsTensor, b: &MpsTensor) -> Result<GaugeResult> {
    if a.phys_dim() != b.phys_dim() || a.bond_dim() != b.bond_dim() {
        return Err(Error::DimensionMismatch("tensors differ in d or D".into()));
    }
    let report = channels::injectivity_index_mps(a, None);
    if report.index.is_none() {
        return Err(Error::NotInjective("A is not normal within the injectivity search cap".into()));
    }
    let dd = a.bond_dim();
    let n = dd * dd;
    let mut sys = Mat::zeros(a.phys_dim() * n, n);
    for (i, (ai, bi)) in a.mats.iter().zip(&b.mats).enumerate() {
        // row-major vec: vec(AY) = (A ⊗ 1) vec Y, vec(YB) = (1 ⊗ Bᵀ) vec Y
        let blk = linalg::kron(ai, &Mat::identity(dd, dd)) - linalg::kron(&Mat::identity(dd, dd), &bi.transpose());
        sys.rows_mut(i * n, n).copy_from(&blk);
    }
    let (v, _) = linalg::smallest_right_singular(&sys);
    let y = linalg::from_row_major(dd, dd, v.as_slice());
    let y = linalg::mat_phase_fixed(&y);
    let y = &y * real(1.0 / linalg::fro(&y));
    match gauge_residual(a, b, &y) {
        Ok(r) if r <= tol::GAUGE_RESIDUAL => Ok(GaugeResult::Gauge { y, residual: r }),
        Ok(r) => Ok(GaugeResult::NoGauge { residual: r }),
        Err(Error::Singular(_)) => Ok(GaugeResult::NoGauge { residual: f64::INFINITY }),
        Err(e) => Err(e),
    }
}

/// Matrix product operator with site tensors labelled `(left, out, in, right)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mpo {
    sites: Vec<Tensor>,
    boundary: Boundary,
}

impl Mpo {
    pub fn new(sites: Vec<Tensor>, boundary: Boundary) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Invalid("empty MPO".into()));
        }
        let sites: Vec<Tensor> = sites.iter().map(|t| t.permute(&[LEFT, OUT, IN, RIGHT])).collect::<Result<_>>()?;
        let d = sites[0].dims()[1];
        for t in &sites {
            if t.dims()[1] != d || t.dims()[2] != d {
                return Err(Error::DimensionMismatch("MPO physical dims differ".into()));
            }
        }
        for (k, w) in sites.windows(2).enumerate() {
            if w[0].dims()[3] != w[1].dims()[0] {
                return Err(Error::DimensionMismatch(format!("MPO bond between sites {} and {}", k, k + 1)));
            }
        }
        let (first, last) = (sites[0].dims()[0], sites[sites.len() - 1].dims()[3]);
        match boundary {
            Boundary::Periodic if first != last => return Err(Error::DimensionMismatch("MPO ring closure".into())),
            Boundary::Open if first != 1 || last != 1 => {
                return Err(Error::DimensionMismatch("open MPO must end in bond 1".into()))
            }
            _ => {}
        }
        Ok(Mpo { sites, boundary })
    }

    pub fn sites(&self) -> &[Tensor] {
        &self.sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn phys_dim(&self) -> usize {
        self.sites[0].dims()[1]
    }

    /// Bond dimensions from the left edge to the right edge (`N + 1` values).
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut b = vec![self.sites[0].dims()[0]];
        b.extend(self.sites.iter().map(|t| t.dims()[3]));
        b
    }

    /// Dense `d^N × d^N` matrix.
    pub fn to_dense(&self) -> Result<Mat> {
        let d = self.phys_dim();
        let n = self.len();
        let dim = (d as u128).saturating_pow(n as u32);
        size_check("dense MPO", dim.saturating_mul(dim), limits().max_state * 4)?;
        let dim = dim as usize;
        let w0 = self.sites[0].dims()[0];
        // rows (w0, out-config, in-config) packed as (w0, pair-config); cols right bond
        let mut cur = Mat::identity(w0, w0);
        for t in &self.sites {
            let (wl, _, _, wr) = (t.dims()[0], t.dims()[1], t.dims()[2], t.dims()[3]);
            let rows = cur.nrows();
            let mut next = Mat::zeros(rows * d * d, wr);
            for o in 0..d {
                for i in 0..d {
                    let m = Mat::from_fn(wl, wr, |x, y| t.get(&[x, o, i, y]));
                    let block = &cur * m;
                    for r in 0..rows {
                        next.row_mut(r * d * d + o * d + i).copy_from(&block.row(r));
                    }
                }
            }
            cur = next;
        }
        let nconf = cur.nrows() / w0;
        let mut out = Mat::zeros(dim, dim);
        for pc in 0..nconf {
            let val: C64 = (0..w0).map(|a| cur[(a * nconf + pc, a)]).sum();
            // pair-config digits are (o_k, i_k) per site
            let (mut o, mut i, mut rem) = (0usize, 0usize, pc);
            let mut place = 1usize;
            for _ in 0..n {
                let pair = rem % (d * d);
                rem /= d * d;
                o += (pair / d) * place;
                i += (pair % d) * place;
                place *= d;
            }
            out[(o, i)] = val;
        }
        Ok(out)
    }

    /// `W v` for a dense vector `v` over `d^N`.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let d = self.phys_dim();
        let n = self.len();
        if v.len() as u128 != (d as u128).saturating_pow(n as u32) {
            return Err(Error::DimensionMismatch("vector length".into()));
        }
        let w0 = self.sites[0].dims()[0];
        let labels: Vec<String> = (0..n).map(|k| format!("p{k}")).collect();
        let mut state = Tensor::new(vec![d; n], labels.clone(), v.to_vec())?;
        // open ring bond as an explicit identity pair
        let eye = Tensor::from_fn(vec![w0, w0], vec!["wrapL", "b0"], |i| if i[0] == i[1] { ONE } else { ZERO })?;
        state = state.contract(&eye, &[])?;
        for (k, t) in self.sites.iter().enumerate() {
            let bl = format!("b{k}");
            let br = format!("b{}", k + 1);
            let out = format!("q{k}");
            let w = t.relabel(&[(LEFT, &bl), (OUT, &out), (IN, &labels[k]), (RIGHT, &br)])?;
            state = state.contract(&w, &[(&bl, &bl), (&labels[k], &labels[k])])?;
        }
        let last = format!("b{n}");
        let traced = state.self_contract(&[("wrapL", &last)])?;
        let order: Vec<String> = (0..n).map(|k| format!("q{k}")).collect();
        let order: Vec<&str> = order.iter().map(String::as_str).collect();
        Ok(traced.permute(&order)?.into_data())
    }

    /// `⟨x_1 ⊗ ⋯ ⊗ x_N| W |y_1 ⊗ ⋯ ⊗ y_N⟩` by a ring of bond-space matrices.
    pub fn product_element(&self, xs: &[Vec<C64>], ys: &[Vec<C64>]) -> Result<C64> {
        if xs.len() != self.len() || ys.len() != self.len() {
            return Err(Error::DimensionMismatch("one local vector per site".into()));
        }
        let d = self.phys_dim();
        let mut acc: Option<Mat> = None;
        for ((t, x), y) in self.sites.iter().zip(xs).zip(ys) {
            let (wl, wr) = (t.dims()[0], t.dims()[3]);
            let mut m = Mat::zeros(wl, wr);
            for o in 0..d {
                for i in 0..d {
                    let f = x[o].conj() * y[i];
                    if f == ZERO {
                        continue;
                    }
                    for a in 0..wl {
                        for b in 0..wr {
                            m[(a, b)] += f * t.get(&[a, o, i, b]);
                        }
                    }
                }
            }
            acc = Some(match acc {
                None => m,
                Some(p) => p * m,
            });
        }
        Ok(acc.expect("non-empty").trace())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, fro};
    use crate::models;
    use crate::rng::{complex_normal_matrix, instance_rng, random_state};

    fn dist_up_to_phase(a: &[C64], b: &[C64]) -> f64 {
        let (pa, pb) = (linalg::phase_fixed(a), linalg::phase_fixed(b));
        pa.iter().zip(&pb).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn bell_state_has_bond_two() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = vec![ZERO, real(h), real(h), ZERO];
        let m = mps_from_state(&psi, 2, 2, 0.0).unwrap();
        assert_eq!(m.bond_dims(), vec![1, 2, 1]);
        assert!((m.entanglement_entropy(1).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((entanglement_entropy_dense(&psi, 2, 2, &[0]).unwrap() - 0.693147).abs() < 1e-6);
    }

    #[test]
    fn product_state_has_unit_bonds_and_zero_entropy() {
        let mut psi = vec![ZERO; 16];
        psi[0] = ONE;
        let m = mps_from_state(&psi, 2, 4, 0.0).unwrap();
        assert!(m.bond_dims().iter().all(|&b| b == 1));
        for cut in 1..4 {
            assert!(m.entanglement_entropy(cut).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn random_three_qubit_round_trip() {
        let mut rng = instance_rng(1, 0);
        let psi = random_state(&mut rng, 8);
        let m = mps_from_state(&psi, 2, 3, 0.0).unwrap();
        assert!(m.bond_dims()[1] <= 2 && m.bond_dims()[2] <= 2);
        let back = m.to_state().unwrap();
        assert!(dist_up_to_phase(&back, &psi) < 1e-10);
    }

    #[test]
    fn from_state_errors() {
        assert!(matches!(mps_from_state(&[ONE, ONE], 2, 1, 0.0), Err(Error::NotNormalized(_))));
        assert!(matches!(mps_from_state(&[ONE, ZERO, ZERO], 2, 2, 0.0), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn ghz_amplitudes_and_state() {
        let ghz = Mps::uniform(&models::ghz(), 4);
        assert!((ghz.amplitude(&[0, 0, 0, 0]).unwrap() - ONE).norm() < 1e-15);
        assert!(ghz.amplitude(&[0, 1, 0, 0]).unwrap().norm() < 1e-15);
        assert!(matches!(ghz.amplitude(&[0, 2, 0, 0]), Err(Error::IndexOutOfRange(_))));
        let s3 = Mps::uniform(&models::ghz(), 3).to_state().unwrap();
        for (k, z) in s3.iter().enumerate() {
            let expect = if k == 0 || k == 7 { ONE } else { ZERO };
            assert!((z - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn amplitude_matches_dense_expansion() {
        let mut rng = instance_rng(2, 0);
        let a = models::random_mps_tensor(&mut rng, 3, 2);
        let m = Mps::uniform(&a, 4);
        let psi = m.to_state().unwrap();
        for cfg in [[0, 1, 2, 0], [2, 2, 1, 0], [1, 1, 1, 1]] {
            let idx = cfg.iter().fold(0, |acc, &i| acc * 3 + i);
            assert!((m.amplitude(&cfg).unwrap() - psi[idx]).norm() < 1e-12);
        }
    }

    #[test]
    fn product_tensor_gives_product_vector() {
        let a = MpsTensor::new(vec![Mat::from_element(1, 1, real(0.6)), Mat::from_element(1, 1, real(0.8))]).unwrap();
        let psi = Mps::uniform(&a, 2).to_state().unwrap();
        let expect = [0.36, 0.48, 0.48, 0.64];
        assert!(psi.iter().zip(expect).all(|(z, e)| (z - real(e)).norm() < 1e-15));
    }

    fn dense_expectation(psi: &[C64], op: &Mat, site: usize, d: usize, n: usize) -> C64 {
        let full = (0..n).fold(Mat::identity(1, 1), |acc, k| {
            linalg::kron(&acc, &if k == site { op.clone() } else { Mat::identity(d, d) })
        });
        let v = linalg::Vector::from_column_slice(psi);
        let num = (v.adjoint() * &full * &v)[(0, 0)];
        num / real(linalg::vec_norm(psi).powi(2))
    }

    #[test]
    fn expectation_values() {
        let z = linalg::from_row_major(2, 2, &[ONE, ZERO, ZERO, real(-1.0)]);
        let ghz = Mps::uniform(&models::ghz(), 5);
        for site in 0..5 {
            assert!(ghz.expectation_value(&z, site).unwrap().norm() < 1e-14);
            assert!((ghz.expectation_value(&Mat::identity(2, 2), site).unwrap() - ONE).norm() < 1e-14);
        }
        let mut rng = instance_rng(3, 0);
        let a = models::random_mps_tensor(&mut rng, 2, 3);
        let m = Mps::uniform(&a, 5);
        let psi = m.to_state().unwrap();
        let op = complex_normal_matrix(&mut rng, 2, 2);
        for site in [0, 2, 4] {
            let got = m.expectation_value(&op, site).unwrap();
            assert!((got - dense_expectation(&psi, &op, site, 2, 5)).norm() < 1e-10);
        }
        let open = mps_from_state(&random_state(&mut rng, 32), 2, 5, 0.0).unwrap();
        let psi = open.to_state().unwrap();
        let got = open.expectation_value(&op, 3).unwrap();
        assert!((got - dense_expectation(&psi, &op, 3, 2, 5)).norm() < 1e-10);
        assert!(matches!(m.expectation_value(&Mat::identity(3, 3), 0), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn mpo_expectation_matches_dense() {
        let mut rng = instance_rng(4, 0);
        let a = models::random_mps_tensor(&mut rng, 2, 2);
        let m = Mps::uniform(&a, 4);
        let w = Tensor::from_fn(vec![2, 2, 2, 2], vec![LEFT, OUT, IN, RIGHT], |_| crate::rng::complex_normal(&mut rng)).unwrap();
        let mpo = Mpo::new(vec![w; 4], Boundary::Periodic).unwrap();
        let dense = mpo.to_dense().unwrap();
        let psi = linalg::Vector::from_vec(m.to_state().unwrap());
        let expect = (psi.adjoint() * &dense * &psi)[(0, 0)] / real(psi.norm_squared());
        assert!((m.expectation_mpo(&mpo).unwrap() - expect).norm() < 1e-10);
        let v: Vec<C64> = crate::rng::complex_normal_vec(&mut rng, 16);
        let applied = mpo.apply(&v).unwrap();
        let dv = &dense * linalg::Vector::from_column_slice(&v);
        assert!(applied.iter().zip(dv.iter()).all(|(x, y)| (x - y).norm() < 1e-10));
        let xs: Vec<Vec<C64>> = (0..4).map(|_| crate::rng::complex_normal_vec(&mut rng, 2)).collect();
        let ys: Vec<Vec<C64>> = (0..4).map(|_| crate::rng::complex_normal_vec(&mut rng, 2)).collect();
        let kx = xs.iter().fold(linalg::Vector::from_element(1, ONE), |acc, x| acc.kronecker(&linalg::Vector::from_column_slice(x)));
        let ky = ys.iter().fold(linalg::Vector::from_element(1, ONE), |acc, y| acc.kronecker(&linalg::Vector::from_column_slice(y)));
        let expect = (kx.adjoint() * &dense * ky)[(0, 0)];
        assert!((mpo.product_element(&xs, &ys).unwrap() - expect).norm() < 1e-10);
    }

    #[test]
    fn gauge_transform_preserves_ring_state() {
        let mut rng = instance_rng(5, 0);
        let a = models::random_mps_tensor(&mut rng, 2, 3);
        let m = Mps::uniform(&a, 4);
        let y = complex_normal_matrix(&mut rng, 3, 3);
        let g = gauge_transform(&m, &y).unwrap();
        let (s0, s1) = (m.to_state().unwrap(), g.to_state().unwrap());
        let rel = s0.iter().zip(&s1).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt() / linalg::vec_norm(&s0);
        assert!(rel < 1e-9);
        let same = gauge_transform(&m, &Mat::identity(3, 3)).unwrap();
        assert_eq!(same, m);
        let ghz = Mps::uniform(&models::ghz(), 3);
        let diag = Mat::from_diagonal(&linalg::Vector::from_vec(vec![real(2.0), c(0.0, 3.0)]));
        let g = gauge_transform(&ghz, &diag).unwrap();
        assert!((g.amplitude(&[1, 1, 1]).unwrap() - ONE).norm() < 1e-12);
        assert!(matches!(gauge_transform(&m, &Mat::zeros(3, 3)), Err(Error::Singular(_))));
    }

    #[test]
    fn open_gauge_keeps_state() {
        let mut rng = instance_rng(6, 0);
        let psi = random_state(&mut rng, 16);
        let m = mps_from_state(&psi, 2, 4, 0.0).unwrap();
        // the open chain of 4 qubits has bonds (1,2,4,2,1): only a
        // uniform-bond chain accepts one gauge matrix
        assert!(gauge_transform(&m, &Mat::identity(2, 2)).is_err());
        let ring = Mps::uniform(&models::random_mps_tensor(&mut rng, 2, 2), 3);
        let sites: Vec<MpsSite> = {
            let mut s = ring.sites().to_vec();
            s[0] = MpsSite::new(s[0].matrices().iter().map(|m| m.rows(0, 1).into_owned()).collect()).unwrap();
            s[2] = MpsSite::new(s[2].matrices().iter().map(|m| m.columns(0, 1).into_owned()).collect()).unwrap();
            s
        };
        let open = Mps::new(sites, Boundary::Open).unwrap();
        let y = complex_normal_matrix(&mut rng, 2, 2);
        let g = gauge_transform(&open, &y).unwrap();
        let (a, b) = (open.to_state().unwrap(), g.to_state().unwrap());
        assert!(a.iter().zip(&b).all(|(x, z)| (x - z).norm() < 1e-10));
    }

    #[test]
    fn fundamental_gauge_recovers_similarity() {
        let mut rng = instance_rng(7, 0);
        let a = models::random_mps_tensor(&mut rng, 2, 2);
        let same = fundamental_gauge(&a, &a).unwrap();
        let y = same.gauge().expect("B = A has a gauge");
        let ratio = y[(0, 0)];
        assert!(fro(&(y - Mat::identity(2, 2) * ratio)) < 1e-8);

        let y0 = complex_normal_matrix(&mut rng, 2, 2);
        let b = a.conjugate_by(&y0).unwrap();
        let got = fundamental_gauge(&a, &b).unwrap();
        let y = got.gauge().expect("gauge exists");
        let y0n = linalg::mat_phase_fixed(&y0) * real(1.0 / fro(&y0));
        assert!(fro(&(y - y0n)) < 1e-8);

        let other = models::random_mps_tensor(&mut rng, 2, 2);
        assert!(fundamental_gauge(&a, &other).unwrap().gauge().is_none());
        assert!(matches!(fundamental_gauge(&models::ghz(), &models::ghz()), Err(Error::NotInjective(_))));
    }

    #[test]
    fn entropy_complement_and_bound() {
        let mut rng = instance_rng(8, 0);
        let psi = random_state(&mut rng, 64);
        let a = entanglement_entropy_dense(&psi, 2, 6, &[0, 3]).unwrap();
        let b = entanglement_entropy_dense(&psi, 2, 6, &[1, 2, 4, 5]).unwrap();
        assert!((a - b).abs() < 1e-10);
        let ring = Mps::uniform(&models::random_mps_tensor(&mut rng, 2, 2), 6);
        let psi = ring.to_state().unwrap();
        let n = linalg::vec_norm(&psi);
        let psi: Vec<C64> = psi.iter().map(|z| z / n).collect();
        for cut in 1..6 {
            let from_mps = ring.entanglement_entropy(cut).unwrap();
            let block: Vec<usize> = (0..cut).collect();
            let dense = entanglement_entropy_dense(&psi, 2, 6, &block).unwrap();
            assert!((from_mps - dense).abs() < 1e-9, "cut {cut}: {from_mps} vs {dense}");
            assert!(from_mps <= 4f64.ln() + 1e-10);
        }
    }
}
