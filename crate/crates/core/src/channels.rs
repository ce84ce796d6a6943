//! Stochastic matrices, quantum channels and their primitivity and
//! injectivity indices.

use nalgebra::DMatrix;
use rand::SeedableRng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, real, Mat, Vector, ONE};
use crate::mps::MpsTensor;
use crate::rng::{self, Rng};
use crate::tensor::Tensor;
use crate::tol;

pub const KRAUS: &str = "kraus";
pub const OUT: &str = "out";
pub const IN: &str = "in";

/// Column-stochastic matrix: non-negative entries, unit column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    entries: DMatrix<f64>,
}

impl StochasticMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n == 0 || entries.ncols() != n {
            return Err(Error::DimensionMismatch("stochastic matrix must be square and non-empty".into()));
        }
        if n > 64 {
            return Err(Error::Unsupported("stochastic matrices above dimension 64".into()));
        }
        if entries.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::Invalid("entries must be finite and non-negative".into()));
        }
        for j in 0..n {
            let s: f64 = entries.column(j).sum();
            if (s - 1.0).abs() > tol::STOCHASTIC {
                return Err(Error::Invalid(format!("column {j} sums to {s}")));
            }
        }
        Ok(StochasticMatrix { entries })
    }

    /// Uniform weights on a 0/1 pattern, `pattern[i][j]` meaning `j → i`.
    /// Every column needs at least one entry.
    pub fn from_pattern(pattern: &[Vec<bool>]) -> Result<Self> {
        let n = pattern.len();
        if pattern.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("pattern must be square".into()));
        }
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let count = (0..n).filter(|&i| pattern[i][j]).count();
            if count == 0 {
                return Err(Error::Invalid(format!("column {j} of the pattern is empty")));
            }
            for i in 0..n {
                if pattern[i][j] {
                    m[(i, j)] = 1.0 / count as f64;
                }
            }
        }
        StochasticMatrix::new(m)
    }

    /// Pattern from a bit mask: bit `i·D + j` set means entry `(i, j)` positive.
    pub fn from_mask(dim: usize, mask: u64) -> Result<Self> {
        let pattern: Vec<Vec<bool>> = (0..dim).map(|i| (0..dim).map(|j| mask >> (i * dim + j) & 1 == 1).collect()).collect();
        StochasticMatrix::from_pattern(&pattern)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn pattern(&self) -> Vec<Vec<bool>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.entries[(i, j)] > 0.0).collect()).collect()
    }

    /// Rows of the positivity pattern as bit sets.
    fn bit_rows(&self) -> Vec<u64> {
        self.pattern().iter().map(|r| r.iter().enumerate().filter(|(_, &b)| b).fold(0u64, |acc, (j, _)| acc | 1 << j)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexStatus {
    Found,
    NotFound,
    Indeterminate,
    SizeLimited,
}

/// Result of an index search. `values[k]` is the per-`n` diagnostic for
/// `n = k + 1` (rank, number of positive entries, or smallest residual).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexReport {
    pub index: Option<usize>,
    pub status: IndexStatus,
    pub n_max_searched: usize,
    pub certificate: String,
    pub values: Vec<f64>,
}

impl IndexReport {
    fn found(n: usize, certificate: String, values: Vec<f64>) -> Self {
        IndexReport { index: Some(n), status: IndexStatus::Found, n_max_searched: n, certificate, values }
    }

    fn not_found(n: usize, certificate: String, values: Vec<f64>) -> Self {
        IndexReport { index: None, status: IndexStatus::NotFound, n_max_searched: n, certificate, values }
    }
}

/// `D² − 2D + 2`.
pub fn wielandt_bound(dim: usize) -> usize {
    dim * dim + 2 - 2 * dim
}

/// Minimal `n` with all entries of `Aⁿ` positive, by boolean matrix powers.
/// The default cap `D² − 2D + 2` makes `NotFound` a proof of non-primitivity.
pub fn classical_primitivity_index(m: &StochasticMatrix, n_max: Option<usize>) -> IndexReport {
    let dim = m.dim();
    let n_max = n_max.unwrap_or_else(|| wielandt_bound(dim)).max(1);
    let full = if dim == 64 { u64::MAX } else { (1u64 << dim) - 1 };
    let base = m.bit_rows();
    let mut power = base.clone();
    let mut counts = Vec::new();
    for n in 1..=n_max {
        if n > 1 {
            power = power
                .iter()
                .map(|&row| (0..dim).filter(|&k| row >> k & 1 == 1).fold(0u64, |acc, k| acc | base[k]))
                .collect();
        }
        let positive: u32 = power.iter().map(|r| r.count_ones()).sum();
        counts.push(positive as f64);
        if power.iter().all(|&r| r == full) {
            return IndexReport::found(n, format!("all {} entries of A^{n} positive", dim * dim), counts);
        }
    }
    IndexReport::not_found(n_max, format!("A^{n_max} still has zero entries"), counts)
}

/// Cycle `1 → 2 → ⋯ → D → 1` plus the chord `D → 2`, columns normalized.
pub fn wielandt_matrix(dim: usize) -> Result<StochasticMatrix> {
    if dim < 2 {
        return Err(Error::Invalid("Wielandt matrix needs D >= 2".into()));
    }
    let mut p = vec![vec![false; dim]; dim];
    for j in 0..dim {
        p[(j + 1) % dim][j] = true;
    }
    p[1][dim - 1] = true;
    StochasticMatrix::from_pattern(&p)
}

/// Index of every primitive pattern among all `2^{D²}` 0/1 matrices whose
/// columns are all non-empty. Returns `(mask, index)` pairs; `index` is
/// `None` for non-primitive patterns.
pub fn wielandt_scan(dim: usize) -> Result<Vec<(u64, Option<usize>)>> {
    if dim == 0 || dim * dim > 24 {
        return Err(Error::Unsupported(format!("exhaustive scan at D = {dim}")));
    }
    use rayon::prelude::*;
    let total = 1u64 << (dim * dim);
    let col_mask = |j: usize| (0..dim).fold(0u64, |acc, i| acc | 1 << (i * dim + j));
    let cols: Vec<u64> = (0..dim).map(col_mask).collect();
    Ok((0..total)
        .into_par_iter()
        .filter(|mask| cols.iter().all(|c| mask & c != 0))
        .map(|mask| {
            let m = StochasticMatrix::from_mask(dim, mask).expect("non-empty columns");
            (mask, classical_primitivity_index(&m, None).index)
        })
        .collect())
}

/// Channel `ρ ↦ Σ A_i ρ A_i†` with `Σ A_i† A_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    kraus: Vec<Mat>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<Mat>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::Invalid("channel needs at least one Kraus operator".into()));
        };
        let dim = first.nrows();
        if dim == 0 || kraus.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::DimensionMismatch("Kraus operators must be square of equal size".into()));
        }
        let defect = trace_preserving_defect(&kraus);
        if !(defect <= tol::TRACE_PRESERVING) {
            return Err(Error::Invalid(format!("not trace preserving: ‖Σ A†A − 1‖ = {defect:e}")));
        }
        Ok(QuantumChannel { kraus })
    }

    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        let t = t.permute(&[KRAUS, OUT, IN])?;
        let (k, o, i) = (t.dims()[0], t.dims()[1], t.dims()[2]);
        QuantumChannel::new((0..k).map(|n| linalg::from_row_major(o, i, &t.data()[n * o * i..(n + 1) * o * i])).collect())
    }

    pub fn to_tensor(&self) -> Tensor {
        let dim = self.dim();
        Tensor::from_fn(vec![self.kraus.len(), dim, dim], vec![KRAUS, OUT, IN], |i| self.kraus[i[0]][(i[1], i[2])])
            .expect("consistent shape")
    }

    pub fn kraus(&self) -> &[Mat] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn kraus_count(&self) -> usize {
        self.kraus.len()
    }

    pub fn apply(&self, rho: &Mat) -> Mat {
        self.kraus.iter().fold(Mat::zeros(self.dim(), self.dim()), |acc, a| acc + a * rho * a.adjoint())
    }

    /// `D² × D²` matrix acting on row-major vectorized operators.
    pub fn matrix(&self) -> Mat {
        superoperator(&self.kraus)
    }
}

fn superoperator(kraus: &[Mat]) -> Mat {
    let dim = kraus[0].nrows();
    kraus.iter().fold(Mat::zeros(dim * dim, dim * dim), |acc, a| acc + linalg::kron(a, &a.conjugate()))
}

fn trace_preserving_defect(kraus: &[Mat]) -> f64 {
    let dim = kraus[0].nrows();
    let s = kraus.iter().fold(Mat::zeros(dim, dim), |acc, a| acc + a.adjoint() * a);
    linalg::op_norm(&(s - Mat::identity(dim, dim)))
}

/// Channel with Kraus operators `√a_ij |i⟩⟨j|`.
pub fn embed_stochastic(m: &StochasticMatrix) -> QuantumChannel {
    let n = m.dim();
    let mut kraus = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let a = m.entries[(i, j)];
            if a > 0.0 {
                let mut k = Mat::zeros(n, n);
                k[(i, j)] = real(a.sqrt());
                kraus.push(k);
            }
        }
    }
    QuantumChannel::new(kraus).expect("stochastic columns give a trace-preserving channel")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimitivityStatus {
    Primitive,
    NotPrimitive,
    Indeterminate,
}

/// Spectral certificate behind [`is_primitive`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimitivityCheck {
    pub status: PrimitivityStatus,
    /// Eigenvalue moduli of the channel matrix, non-increasing.
    pub moduli: Vec<f64>,
    pub peripheral_count: usize,
    pub fixed_point_rank: usize,
    pub reason: String,
}

impl PrimitivityCheck {
    pub fn is_primitive(&self) -> bool {
        self.status == PrimitivityStatus::Primitive
    }
}

/// Exactly one eigenvalue on the unit circle, non-degenerate, with a
/// full-rank fixed point.
pub fn is_primitive(t: &QuantumChannel) -> PrimitivityCheck {
    let dim = t.dim();
    let m = t.matrix();
    let mut moduli: Vec<f64> = linalg::eigenvalues(&m).iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    let peripheral_count = moduli.iter().filter(|&&r| r >= 1.0 - tol::PERIPHERAL).count();
    let borderline = moduli.iter().filter(|&&r| r >= 1.0 - tol::PERIPHERAL_BORDERLINE && r < 1.0 - tol::PERIPHERAL).count();
    let done = |status, fixed_point_rank, reason: String| PrimitivityCheck {
        status,
        moduli: moduli.clone(),
        peripheral_count,
        fixed_point_rank,
        reason,
    };
    if peripheral_count > 1 {
        return done(PrimitivityStatus::NotPrimitive, 0, format!("{peripheral_count} eigenvalues of modulus 1"));
    }
    if peripheral_count == 0 {
        return done(PrimitivityStatus::Indeterminate, 0, "no eigenvalue of modulus 1 found".into());
    }
    if borderline > 0 {
        return done(
            PrimitivityStatus::Indeterminate,
            0,
            format!("second modulus {:e} within the borderline band", moduli.get(1).copied().unwrap_or(0.0)),
        );
    }
    let shifted = &m - Mat::identity(dim * dim, dim * dim);
    let (v, _) = linalg::smallest_right_singular(&shifted);
    let rho = linalg::hermitize(&linalg::from_row_major(dim, dim, v.as_slice()));
    let tr = rho.trace();
    let rho = &rho / tr;
    let (vals, _) = linalg::eigh(&rho);
    let mut s: Vec<f64> = vals.iter().map(|x| x.abs()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let rank = tol::numerical_rank(dim, dim, &s);
    if rank == dim {
        done(PrimitivityStatus::Primitive, rank, "unique peripheral eigenvalue, full-rank fixed point".into())
    } else {
        done(PrimitivityStatus::NotPrimitive, rank, format!("fixed point has rank {rank} < {dim}"))
    }
}

/// Orthonormal basis (row-major vectorized, as columns) of the span of the
/// given matrices.
fn span_basis(mats: &[Mat]) -> Mat {
    let dim = mats[0].nrows() * mats[0].ncols();
    let stacked = Mat::from_fn(dim, mats.len(), |r, c| {
        let m = &mats[c];
        m[(r / m.ncols(), r % m.ncols())]
    });
    linalg::range_basis(&stacked)
}

fn basis_matrices(basis: &Mat, dim: usize) -> Vec<Mat> {
    basis.column_iter().map(|col| linalg::from_row_major(dim, dim, col.as_slice())).collect()
}

/// Span of all words of length `n + 1` from the span of length-`n` words.
fn extend_span(basis: &Mat, kraus: &[Mat]) -> Mat {
    let dim = kraus[0].nrows();
    let words = basis_matrices(basis, dim);
    let next: Vec<Mat> = words.iter().flat_map(|w| kraus.iter().map(move |a| w * a)).collect();
    span_basis(&next)
}

/// Smallest value of `Σ_k |u† W_k v|²` over unit `u, v`, found by alternating
/// minimal-eigenvector iterations from several starts. `W_k` is an
/// orthonormal basis of the word span, so the value is 1 when the span is
/// the full matrix algebra.
fn min_rank_one_overlap(words: &[Mat], restarts: usize, rng: &mut Rng) -> f64 {
    let dim = words[0].nrows();
    let mut best = f64::INFINITY;
    for r in 0..restarts {
        let mut v: Vector = if r < dim {
            let mut e = Vector::zeros(dim);
            e[r] = ONE;
            e
        } else {
            let x = Vector::from_vec(rng::complex_normal_vec(rng, dim));
            let n = x.norm();
            x / real(n)
        };
        let mut f = f64::INFINITY;
        for _ in 0..500 {
            let mu = words.iter().fold(Mat::zeros(dim, dim), |acc, w| {
                let x = w * &v;
                acc + &x * x.adjoint()
            });
            let (_, vecs) = linalg::eigh(&mu);
            let u = vecs.column(0).into_owned();
            let nv = words.iter().fold(Mat::zeros(dim, dim), |acc, w| {
                let x = w.adjoint() * &u;
                acc + &x * x.adjoint()
            });
            let (vals, vecs) = linalg::eigh(&nv);
            v = vecs.column(0).into_owned();
            let next = vals[0].max(0.0);
            let stalled = f - next <= 1e-12 * f.max(1e-300);
            f = next;
            if f < tol::ZERO_PAIR_WITNESS * 1e-3 || stalled {
                break;
            }
        }
        if f < tol::ZERO_FREE_CERTIFICATE && f >= tol::ZERO_PAIR_WITNESS {
            f = f.min(polish_zero_pair(words, &v));
        }
        best = best.min(f);
        if best < tol::ZERO_PAIR_WITNESS {
            break;
        }
    }
    best
}

/// Gauss-Newton on `x^T W_k v = 0` (with `x = conj(u)`, so the system is
/// holomorphic), started from the alternating search's best `v`. Near a
/// degenerate root the alternating iteration crawls; this converges at least
/// linearly there.
fn polish_zero_pair(words: &[Mat], v0: &Vector) -> f64 {
    let dim = words[0].nrows();
    let value = |x: &Vector, v: &Vector| -> f64 {
        let (nx, nv) = (x.norm(), v.norm());
        words.iter().map(|w| (x.transpose() * w * v)[(0, 0)].norm_sqr()).sum::<f64>() / (nx * nx * nv * nv)
    };
    let mu = words.iter().fold(Mat::zeros(dim, dim), |acc, w| {
        let y = w * v0;
        acc + &y * y.adjoint()
    });
    let (_, vecs) = linalg::eigh(&mu);
    let mut x: Vector = vecs.column(0).conjugate();
    let mut v = v0.clone();
    let mut best = value(&x, &v);
    for _ in 0..200 {
        let m = words.len();
        let mut jac = Mat::zeros(m, 2 * dim);
        let mut f = Vector::zeros(m);
        for (k, w) in words.iter().enumerate() {
            let wv = w * &v;
            let xw = w.transpose() * &x;
            f[k] = x.dot(&wv);
            for j in 0..dim {
                jac[(k, j)] = wv[j];
                jac[(k, dim + j)] = xw[j];
            }
        }
        let step = linalg::pinv(&jac) * f;
        let nx = &x - step.rows(0, dim);
        let nv = &v - step.rows(dim, dim);
        let (xn, vn) = (nx.norm(), nv.norm());
        if !(xn > 0.0 && vn > 0.0) {
            break;
        }
        x = nx / real(xn);
        v = nv / real(vn);
        let val = value(&x, &v);
        if !(val < best) {
            break;
        }
        best = val;
        if best < tol::ZERO_PAIR_WITNESS * 1e-6 {
            break;
        }
    }
    best
}

/// `2(D−1)²`, at least 1.
pub fn improved_primitivity_bound(dim: usize) -> usize {
    (2 * (dim - 1) * (dim - 1)).max(1)
}

/// `(D² − d + 1) D²`, at least 1.
pub fn quadratic_primitivity_bound(dim: usize, kraus: usize) -> usize {
    ((dim * dim + 1).saturating_sub(kraus) * dim * dim).max(1)
}

/// Minimal `n` such that no unit pair `(u, v)` has `u† w v = 0` for every
/// Kraus word `w` of length `n`.
///
/// The search runs to `n_max` (default `2(D−1)²`); if nothing is found there
/// it continues to `(D² − d + 1) D²` and says so in the certificate.
pub fn primitivity_index(t: &QuantumChannel, n_max: Option<usize>) -> IndexReport {
    let check = is_primitive(t);
    if check.status != PrimitivityStatus::Primitive {
        let status = match check.status {
            PrimitivityStatus::Indeterminate => IndexStatus::Indeterminate,
            _ => IndexStatus::NotFound,
        };
        return IndexReport {
            index: None,
            status,
            n_max_searched: 0,
            certificate: format!("precondition failed: {}", check.reason),
            values: vec![],
        };
    }
    let dim = t.dim();
    let improved = n_max.unwrap_or_else(|| improved_primitivity_bound(dim));
    let cap = if n_max.is_some() { improved } else { improved.max(quadratic_primitivity_bound(dim, t.kraus_count())) };
    let mut rng = Rng::seed_from_u64(0x7072_696d);
    let mut basis = span_basis(t.kraus());
    let mut values = Vec::new();
    for n in 1..=cap {
        if n > 1 {
            basis = extend_span(&basis, t.kraus());
        }
        let f = if basis.ncols() == dim * dim {
            1.0
        } else {
            min_rank_one_overlap(&basis_matrices(&basis, dim), tol::ZERO_PAIR_RESTARTS, &mut rng)
        };
        values.push(f);
        if f > tol::ZERO_FREE_CERTIFICATE {
            let beyond = if n > improved { " (beyond the improved bound)" } else { "" };
            return IndexReport::found(n, format!("no zero pair for words of length {n}, min overlap {f:.3e}{beyond}"), values);
        }
        if f >= tol::ZERO_PAIR_WITNESS {
            return IndexReport {
                index: None,
                status: IndexStatus::Indeterminate,
                n_max_searched: n,
                certificate: format!("inconclusive at n = {n}: smallest residual {f:e}"),
                values,
            };
        }
    }
    IndexReport::not_found(cap, format!("zero pair found at every n <= {cap}"), values)
}

/// `ceil(2 D² (6 + log₂ D))`.
pub fn injectivity_cap(bond: usize) -> usize {
    let d2 = (bond * bond) as f64;
    (2.0 * d2 * (6.0 + (bond as f64).log2())).ceil() as usize
}

/// Minimal `n` such that the length-`n` words span the full `D × D` matrix
/// algebra. `NotFound` at the default cap certifies that `A` is not normal.
pub fn injectivity_index_mps(a: &MpsTensor, n_max: Option<usize>) -> IndexReport {
    let bond = a.bond_dim();
    let n_max = n_max.unwrap_or_else(|| injectivity_cap(bond)).max(1);
    let mut basis = span_basis(a.matrices());
    let mut values = Vec::new();
    for n in 1..=n_max {
        if n > 1 {
            let next = extend_span(&basis, a.matrices());
            if next.ncols() == basis.ncols() && same_span(&basis, &next) {
                values.push(next.ncols() as f64);
                return IndexReport::not_found(
                    n,
                    format!("word span stabilized at dimension {} < {} at n = {n}", next.ncols(), bond * bond),
                    values,
                );
            }
            basis = next;
        }
        values.push(basis.ncols() as f64);
        if basis.ncols() == bond * bond {
            return IndexReport::found(n, format!("length-{n} words span all {} matrices", bond * bond), values);
        }
    }
    IndexReport::not_found(n_max, format!("word span has dimension {} < {} at n = {n_max}", basis.ncols(), bond * bond), values)
}

fn same_span(a: &Mat, b: &Mat) -> bool {
    // b lies in span(a) iff projecting b onto a loses nothing
    let residual = b - a * (a.adjoint() * b);
    linalg::fro(&residual) <= 1e-10 * (b.ncols() as f64).sqrt()
}

/// Trace-preserving form of a transfer operator:
/// `B_i = Y A_i Y⁻¹ · scale` with `Σ B_i† B_i = 1`.
#[derive(Debug, Clone)]
pub struct TransferChannel {
    pub channel: QuantumChannel,
    pub y: Mat,
    pub y_inv: Mat,
    pub scale: f64,
    pub spectral_radius: f64,
}

impl TransferChannel {
    /// The trace-preserving site tensor `B`.
    pub fn tensor(&self) -> MpsTensor {
        MpsTensor::new(self.channel.kraus().to_vec()).expect("valid")
    }
}

pub fn transfer_channel(a: &MpsTensor) -> Result<TransferChannel> {
    let dim = a.bond_dim();
    // adjoint map X ↦ Σ A_i† X A_i
    let adj: Vec<Mat> = a.matrices().iter().map(|m| m.adjoint()).collect();
    let m = superoperator(&adj);
    let eig = linalg::eigenvalues(&m);
    let radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(radius > 0.0) {
        return Err(Error::NotNormalizable("transfer operator is nilpotent".into()));
    }
    let shifted = &m - Mat::identity(dim * dim, dim * dim) * real(radius);
    let scale_ref = linalg::op_norm(&m);
    let ns = linalg::null_space(&shifted, 1e-8 * scale_ref.max(radius));
    if ns.ncols() == 0 {
        return Err(Error::NotNormalizable("no eigenvector for the spectral radius".into()));
    }
    let id: Vec<_> = linalg::to_row_major(&Mat::identity(dim, dim));
    let id = Vector::from_vec(id);
    let proj = &ns * (ns.adjoint() * &id);
    let lam = linalg::hermitize(&linalg::from_row_major(dim, dim, proj.as_slice()));
    let tr = lam.trace().re;
    if !(tr.abs() > 0.0) {
        return Err(Error::NotNormalizable("fixed point orthogonal to the identity".into()));
    }
    let lam = lam * real(dim as f64 / tr);
    let (vals, _) = linalg::eigh(&lam);
    if vals[0] <= tol::rank_cutoff(dim, dim, vals[dim - 1]) {
        return Err(Error::NotNormalizable(format!("fixed point is singular (smallest eigenvalue {:e})", vals[0])));
    }
    let y = linalg::hermitian_fn(&lam, f64::sqrt);
    let y_inv = linalg::hermitian_fn(&lam, |x| 1.0 / x.sqrt());
    let scale = 1.0 / radius.sqrt();
    let b = a.similarity(&y, &y_inv, scale);
    let channel = QuantumChannel::new(b.matrices().to_vec())?;
    Ok(TransferChannel { channel, y, y_inv, scale, spectral_radius: radius })
}

/// Outcome of the full-rank scan behind [`zero_error_certificate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroErrorReport {
    pub certified: bool,
    pub power: usize,
    pub inputs_checked: usize,
    pub min_eigenvalue: f64,
}

/// Checks that `T^p(|v⟩⟨v|)` is full rank for a deterministic grid of inputs
/// plus 1000 random pure inputs, where `p` is the primitivity index.
pub fn zero_error_certificate(t: &QuantumChannel, seed: u64) -> Result<ZeroErrorReport> {
    let report = primitivity_index(t, None);
    let Some(p) = report.index else {
        return Err(Error::Precondition(format!("channel has no primitivity index: {}", report.certificate)));
    };
    let dim = t.dim();
    let mut inputs: Vec<Vector> = Vec::new();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..dim {
        let mut e = Vector::zeros(dim);
        e[j] = ONE;
        inputs.push(e);
        for k in j + 1..dim {
            for phase in [real(1.0), real(-1.0), linalg::c(0.0, 1.0), linalg::c(0.0, -1.0)] {
                let mut e = Vector::zeros(dim);
                e[j] = real(h);
                e[k] = phase * h;
                inputs.push(e);
            }
        }
    }
    let mut rng = rng::instance_rng(seed, 0);
    for _ in 0..1000 {
        inputs.push(Vector::from_vec(rng::random_state(&mut rng, dim)));
    }
    let mut min_eig = f64::INFINITY;
    let mut certified = true;
    for v in &inputs {
        let mut rho = v * v.adjoint();
        for _ in 0..p {
            rho = t.apply(&rho);
        }
        let (vals, _) = linalg::eigh(&linalg::hermitize(&rho));
        let mut s: Vec<f64> = vals.iter().map(|x| x.abs()).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        min_eig = min_eig.min(vals[0]);
        if tol::numerical_rank(dim, dim, &s) < dim || vals[0] <= 0.0 {
            certified = false;
        }
    }
    Ok(ZeroErrorReport { certified, power: p, inputs_checked: inputs.len(), min_eigenvalue: min_eig })
}
