//! Dense complex tensors whose indices are identified by string labels.
//!
//! Data is stored row-major over `dims`. All operations return new values;
//! a [`Tensor`] is never mutated after construction through the public API.

use std::collections::HashSet;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    labels: Vec<String>,
    data: Vec<C64>,
}

fn check_labels(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

pub(crate) fn row_major_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

impl Tensor {
    pub fn new<S: Into<String>>(dims: Vec<usize>, labels: Vec<S>, data: Vec<C64>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} dims",
                labels.len(),
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::DimensionMismatch("dimensions must be positive".into()));
        }
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "dims {:?} need {} entries, got {}",
                dims,
                n,
                data.len()
            )));
        }
        check_labels(&labels)?;
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("tensor data".into()));
        }
        Ok(Tensor { dims, labels, data })
    }

    pub fn from_fn<S: Into<String>>(
        dims: Vec<usize>,
        labels: Vec<S>,
        mut f: impl FnMut(&[usize]) -> C64,
    ) -> Result<Self> {
        let n: usize = dims.iter().product();
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for k in (0..dims.len()).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Tensor::new(dims, labels, data)
    }

    pub fn scalar(z: C64) -> Self {
        Tensor { dims: vec![], labels: vec![], data: vec![z] }
    }

    /// Matrix as a rank-2 tensor with labels `(row, col)`.
    pub fn from_matrix(m: &Mat, row: &str, col: &str) -> Result<Self> {
        Tensor::new(vec![m.nrows(), m.ncols()], vec![row, col], linalg::to_row_major(m))
    }

    pub fn from_vector(v: &[C64], label: &str) -> Result<Self> {
        Tensor::new(vec![v.len()], vec![label], v.to_vec())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn norm(&self) -> f64 {
        linalg::vec_norm(&self.data)
    }

    /// Value of a rank-0 tensor (or the first entry otherwise).
    pub fn scalar_value(&self) -> C64 {
        self.data[0]
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        let strides = row_major_strides(&self.dims);
        self.data[idx.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>()]
    }

    /// Renames labels; pairs not present are an error.
    pub fn relabel(&self, map: &[(&str, &str)]) -> Result<Self> {
        let mut labels = self.labels.clone();
        for (from, to) in map {
            let p = self.position(from)?;
            labels[p] = (*to).to_string();
        }
        check_labels(&labels)?;
        Ok(Tensor { dims: self.dims.clone(), labels, data: self.data.clone() })
    }

    pub fn with_labels<S: Into<String>>(&self, labels: Vec<S>) -> Result<Self> {
        Tensor::new(self.dims.clone(), labels, self.data.clone())
    }

    pub fn scale(&self, z: C64) -> Self {
        Tensor { dims: self.dims.clone(), labels: self.labels.clone(), data: self.data.iter().map(|x| x * z).collect() }
    }

    pub fn conj(&self) -> Self {
        Tensor { dims: self.dims.clone(), labels: self.labels.clone(), data: self.data.iter().map(|x| x.conj()).collect() }
    }

    /// `self + other` after aligning `other` to this label order.
    pub fn add(&self, other: &Tensor) -> Result<Self> {
        let order: Vec<&str> = self.labels.iter().map(String::as_str).collect();
        let o = other.permute(&order)?;
        if o.dims != self.dims {
            return Err(Error::DimensionMismatch("add: shapes differ".into()));
        }
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect();
        Ok(Tensor { dims: self.dims.clone(), labels: self.labels.clone(), data })
    }

    /// Reorders indices so that labels appear in `order`.
    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.rank() {
            return Err(Error::NotPartition(format!("permutation {:?} of {:?}", order, self.labels)));
        }
        let perm: Vec<usize> = order.iter().map(|l| self.position(l)).collect::<Result<_>>()?;
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::NotPartition(format!("repeated label in {:?}", order)));
            }
        }
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let old_strides = row_major_strides(&self.dims);
        let src_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let data = gather(&new_dims, &src_strides, &self.data);
        Ok(Tensor {
            dims: new_dims,
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
            data,
        })
    }

    /// Matrix view with the given row labels (fused row-major, in order) and
    /// column labels.
    pub fn to_matrix(&self, rows: &[&str], cols: &[&str]) -> Result<Mat> {
        let order: Vec<&str> = rows.iter().chain(cols).copied().collect();
        let t = self.permute(&order)?;
        let r: usize = t.dims[..rows.len()].iter().product();
        let c: usize = t.dims[rows.len()..].iter().product();
        Ok(Mat::from_row_slice(r, c, &t.data))
    }

    /// Contraction with `other` over the listed `(label in self, label in
    /// other)` pairs. Free indices of `self` come first, then those of
    /// `other`, each in their original order.
    pub fn contract(&self, other: &Tensor, pairs: &[(&str, &str)]) -> Result<Tensor> {
        let mut ca = Vec::with_capacity(pairs.len());
        let mut cb = Vec::with_capacity(pairs.len());
        for (la, lb) in pairs {
            let da = self.dim_of(la)?;
            let db = other.dim_of(lb)?;
            if da != db {
                return Err(Error::DimensionMismatch(format!("`{la}` has dim {da}, `{lb}` has dim {db}")));
            }
            if ca.contains(la) || cb.contains(lb) {
                return Err(Error::DuplicateLabel(format!("{la}/{lb} contracted twice")));
            }
            ca.push(*la);
            cb.push(*lb);
        }
        let free_a: Vec<&str> = self.labels.iter().map(String::as_str).filter(|l| !ca.contains(l)).collect();
        let free_b: Vec<&str> = other.labels.iter().map(String::as_str).filter(|l| !cb.contains(l)).collect();
        let out_labels: Vec<String> = free_a.iter().chain(&free_b).map(|s| s.to_string()).collect();
        check_labels(&out_labels)?;
        let mut out_dims = Vec::with_capacity(out_labels.len());
        for l in &free_a {
            out_dims.push(self.dim_of(l)?);
        }
        for l in &free_b {
            out_dims.push(other.dim_of(l)?);
        }
        let ma = self.to_matrix(&free_a, &ca)?;
        let mb = other.to_matrix(&cb, &free_b)?;
        let prod = ma * mb;
        Ok(Tensor { dims: out_dims, labels: out_labels, data: linalg::to_row_major(&prod) })
    }

    /// Contracts every label the two tensors have in common.
    pub fn contract_shared(&self, other: &Tensor) -> Result<Tensor> {
        let shared: Vec<&str> = self
            .labels
            .iter()
            .map(String::as_str)
            .filter(|l| other.has_label(l))
            .collect();
        let pairs: Vec<(&str, &str)> = shared.iter().map(|l| (*l, *l)).collect();
        self.contract(other, &pairs)
    }

    /// Partial trace over pairs of indices of this tensor.
    pub fn self_contract(&self, pairs: &[(&str, &str)]) -> Result<Tensor> {
        let mut traced: Vec<&str> = Vec::new();
        for (a, b) in pairs {
            if a == b {
                return Err(Error::DuplicateLabel(a.to_string()));
            }
            let (da, db) = (self.dim_of(a)?, self.dim_of(b)?);
            if da != db {
                return Err(Error::DimensionMismatch(format!("`{a}` has dim {da}, `{b}` has dim {db}")));
            }
            for l in [a, b] {
                if traced.contains(l) {
                    return Err(Error::DuplicateLabel(l.to_string()));
                }
                traced.push(l);
            }
        }
        let free: Vec<&str> = self.labels.iter().map(String::as_str).filter(|l| !traced.contains(l)).collect();
        let mut order = free.clone();
        for (a, b) in pairs {
            order.push(a);
            order.push(b);
        }
        let t = self.permute(&order)?;
        let free_dims: Vec<usize> = t.dims[..free.len()].to_vec();
        let nf: usize = free_dims.iter().product();
        let pair_dims: Vec<usize> = pairs.iter().map(|(a, _)| self.dim_of(a).unwrap()).collect();
        let block: usize = pair_dims.iter().map(|d| d * d).product();
        let npairs: usize = pair_dims.iter().product();
        // offsets of the diagonal entries inside one block of paired indices
        let mut diag = Vec::with_capacity(npairs);
        let mut idx = vec![0usize; pair_dims.len()];
        for _ in 0..npairs {
            let mut off = 0usize;
            for (k, &i) in idx.iter().enumerate() {
                let d = pair_dims[k];
                off = off * d * d + i * d + i;
            }
            diag.push(off);
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < pair_dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        let data: Vec<C64> = (0..nf)
            .map(|f| diag.iter().map(|&o| t.data[f * block + o]).sum())
            .collect();
        Ok(Tensor { dims: free_dims, labels: free.iter().map(|s| s.to_string()).collect(), data })
    }

    /// Fuses each group of labels into one index. Groups must partition the
    /// labels; the fused index is named after its group joined with `*`.
    pub fn group_indices(&self, groups: &[Vec<&str>]) -> Result<Grouped> {
        let flat: Vec<&str> = groups.iter().flatten().copied().collect();
        let as_set: HashSet<&str> = flat.iter().copied().collect();
        let own: HashSet<&str> = self.labels.iter().map(String::as_str).collect();
        if flat.len() != self.rank() || as_set != own || groups.iter().any(|g| g.is_empty()) {
            return Err(Error::NotPartition(format!("{:?} vs labels {:?}", groups, self.labels)));
        }
        let t = self.permute(&flat)?;
        let mut parts = Vec::with_capacity(groups.len());
        let mut dims = Vec::with_capacity(groups.len());
        let mut labels = Vec::with_capacity(groups.len());
        for g in groups {
            let members: Vec<(String, usize)> =
                g.iter().map(|l| (l.to_string(), self.dim_of(l).unwrap())).collect();
            dims.push(members.iter().map(|m| m.1).product());
            labels.push(g.join("*"));
            parts.push(members);
        }
        check_labels(&labels)?;
        Ok(Grouped { tensor: Tensor { dims, labels, data: t.data }, parts })
    }

    /// Singular value decomposition across the bipartition `left_labels` |
    /// rest. Numerically zero singular values are always dropped; `max_rank`
    /// then `threshold` (relative to `σ_max`) truncate further. The new bond
    /// is labelled `bond`.
    pub fn factorize(
        &self,
        left_labels: &[&str],
        max_rank: Option<usize>,
        threshold: Option<f64>,
    ) -> Result<Factorization> {
        self.factorize_with_bond(left_labels, max_rank, threshold, "bond")
    }

    pub fn factorize_with_bond(
        &self,
        left_labels: &[&str],
        max_rank: Option<usize>,
        threshold: Option<f64>,
        bond: &str,
    ) -> Result<Factorization> {
        if left_labels.is_empty() || left_labels.len() >= self.rank() {
            return Err(Error::EmptySide);
        }
        for l in left_labels {
            self.position(l)?;
        }
        if self.has_label(bond) {
            return Err(Error::DuplicateLabel(bond.to_string()));
        }
        let right: Vec<&str> = self
            .labels
            .iter()
            .map(String::as_str)
            .filter(|l| !left_labels.contains(l))
            .collect();
        let m = self.to_matrix(left_labels, &right)?;
        let (u, s, vt) = linalg::svd(&m);
        let mut keep = tol::numerical_rank(m.nrows(), m.ncols(), &s).max(1);
        if let Some(r) = max_rank {
            keep = keep.min(r.max(1));
        }
        if let Some(th) = threshold {
            let smax = s.first().copied().unwrap_or(0.0);
            keep = keep.min(s.iter().take_while(|&&x| x >= th * smax).count().max(1));
        }
        let truncation_error = s[keep..].iter().map(|x| x * x).sum::<f64>().sqrt();
        let left_dims: Vec<usize> = left_labels.iter().map(|l| self.dim_of(l).unwrap()).collect();
        let right_dims: Vec<usize> = right.iter().map(|l| self.dim_of(l).unwrap()).collect();
        let uk = u.columns(0, keep).into_owned();
        let vk = vt.rows(0, keep).into_owned();
        let mut ldims = left_dims;
        ldims.push(keep);
        let mut llabels: Vec<String> = left_labels.iter().map(|s| s.to_string()).collect();
        llabels.push(bond.to_string());
        let mut rdims = vec![keep];
        rdims.extend(right_dims);
        let mut rlabels = vec![bond.to_string()];
        rlabels.extend(right.iter().map(|s| s.to_string()));
        Ok(Factorization {
            left: Tensor { dims: ldims, labels: llabels, data: linalg::to_row_major(&uk) },
            singular_values: s[..keep].to_vec(),
            right: Tensor { dims: rdims, labels: rlabels, data: linalg::to_row_major(&vk) },
            truncation_error,
        })
    }
}

/// Copies `src` into a fresh row-major buffer of shape `dims`, where moving
/// one step along output axis `k` moves `src_strides[k]` in the source.
fn gather(dims: &[usize], src_strides: &[usize], src: &[C64]) -> Vec<C64> {
    let n: usize = dims.iter().product();
    let mut out = Vec::with_capacity(n);
    if dims.is_empty() {
        out.push(src[0]);
        return out;
    }
    let last = dims.len() - 1;
    let (inner_dim, inner_stride) = (dims[last], src_strides[last]);
    let mut idx = vec![0usize; last];
    let outer: usize = dims[..last].iter().product();
    for _ in 0..outer {
        let base: usize = idx.iter().zip(src_strides).map(|(i, s)| i * s).sum();
        for j in 0..inner_dim {
            out.push(src[base + j * inner_stride]);
        }
        for k in (0..last).rev() {
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// A tensor whose indices were fused by [`Tensor::group_indices`]; keeps
/// enough structure to undo the fusion.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouped {
    pub tensor: Tensor,
    parts: Vec<Vec<(String, usize)>>,
}

impl Grouped {
    pub fn ungroup(&self) -> Tensor {
        let dims = self.parts.iter().flatten().map(|p| p.1).collect();
        let labels = self.parts.iter().flatten().map(|p| p.0.clone()).collect();
        Tensor { dims, labels, data: self.tensor.data.clone() }
    }
}

/// Result of [`Tensor::factorize`]: `left · diag(s) · right`.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub left: Tensor,
    pub singular_values: Vec<f64>,
    pub right: Tensor,
    pub truncation_error: f64,
}

impl Factorization {
    /// Recombines the three factors into a single tensor with labels in
    /// `left ∪ right` order.
    pub fn recombine(&self, bond: &str) -> Result<Tensor> {
        let k = self.singular_values.len();
        let s = Tensor::from_fn(vec![k], vec![bond], |i| C64::new(self.singular_values[i[0]], 0.0))?;
        // scale the right factor row-wise by the singular values
        let pos = self.right.position(bond)?;
        let strides = row_major_strides(&self.right.dims);
        let mut right = self.right.clone();
        for (flat, z) in right.data.iter_mut().enumerate() {
            *z *= s.data[(flat / strides[pos]) % k];
        }
        self.left.contract(&right, &[(bond, bond)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real, ONE, ZERO};
    use crate::rng::{complex_normal_vec, instance_rng};

    fn random(dims: Vec<usize>, labels: Vec<&str>, seed: u64) -> Tensor {
        let n = dims.iter().product();
        let mut rng = instance_rng(seed, 0);
        Tensor::new(dims, labels, complex_normal_vec(&mut rng, n)).unwrap()
    }

    fn eye(n: usize, a: &str, b: &str) -> Tensor {
        Tensor::from_fn(vec![n, n], vec![a, b], |i| if i[0] == i[1] { ONE } else { ZERO }).unwrap()
    }

    #[test]
    fn trace_of_identity_by_contraction() {
        let a = eye(2, "i", "j");
        let b = eye(2, "k", "l");
        let t = a.contract(&b, &[("i", "k"), ("j", "l")]).unwrap();
        assert_eq!(t.rank(), 0);
        assert!((t.scalar_value() - real(2.0)).norm() < 1e-15);
    }

    #[test]
    fn matrix_vector_product() {
        let m = Tensor::new(vec![2, 2], vec!["r", "c"], vec![real(1.0), real(2.0), real(3.0), real(4.0)]).unwrap();
        let v = Tensor::new(vec![2], vec!["x"], vec![real(1.0), c(0.0, 1.0)]).unwrap();
        let out = m.contract(&v, &[("c", "x")]).unwrap();
        assert_eq!(out.labels(), ["r"]);
        assert!((out.data()[0] - c(1.0, 2.0)).norm() < 1e-15);
        assert!((out.data()[1] - c(3.0, 4.0)).norm() < 1e-15);
    }

    #[test]
    fn contraction_matches_naive_triple_loop() {
        let a = random(vec![2, 3], vec!["i", "k"], 1);
        let b = random(vec![3, 4], vec!["k2", "j"], 2);
        let out = a.contract(&b, &[("k", "k2")]).unwrap();
        for i in 0..2 {
            for j in 0..4 {
                let mut acc = ZERO;
                for k in 0..3 {
                    acc += a.get(&[i, k]) * b.get(&[k, j]);
                }
                assert!((out.get(&[i, j]) - acc).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn self_contract_trace_and_identity() {
        let m = Tensor::new(vec![2, 2], vec!["r", "c"], vec![real(1.0), real(2.0), real(3.0), real(4.0)]).unwrap();
        assert!((m.self_contract(&[("r", "c")]).unwrap().scalar_value() - real(5.0)).norm() < 1e-15);
        let i3 = eye(3, "a", "b");
        assert!((i3.self_contract(&[("a", "b")]).unwrap().scalar_value() - real(3.0)).norm() < 1e-15);
    }

    #[test]
    fn self_contract_matches_explicit_sum() {
        let t = random(vec![3, 2, 3, 4], vec!["a", "b", "c", "d"], 5);
        let out = t.self_contract(&[("a", "c")]).unwrap();
        assert_eq!(out.labels(), ["b", "d"]);
        for b in 0..2 {
            for d in 0..4 {
                let acc: C64 = (0..3).map(|a| t.get(&[a, b, a, d])).sum();
                assert!((out.get(&[b, d]) - acc).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn contraction_errors() {
        let a = random(vec![2, 3], vec!["i", "k"], 1);
        let b = random(vec![2, 4], vec!["k", "j"], 2);
        assert!(matches!(a.contract(&b, &[("k", "k")]), Err(Error::DimensionMismatch(_))));
        assert!(matches!(a.contract(&b, &[("zz", "k")]), Err(Error::UnknownLabel(_))));
        let c2 = random(vec![3, 2], vec!["k", "i"], 3);
        assert!(matches!(a.contract(&c2, &[("k", "k")]), Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn group_flattens_row_major_and_ungroups() {
        let m = Tensor::from_fn(vec![2, 3], vec!["r", "c"], |i| real((i[0] * 3 + i[1]) as f64)).unwrap();
        let g = m.group_indices(&[vec!["r", "c"]]).unwrap();
        assert_eq!(g.tensor.dims(), [6]);
        assert_eq!(g.tensor.labels(), ["r*c"]);
        assert!(g.tensor.data().iter().enumerate().all(|(k, z)| *z == real(k as f64)));
        let t = random(vec![2, 3, 2, 5], vec!["a", "b", "c", "d"], 9);
        let g = t.group_indices(&[vec!["c", "a"], vec!["d", "b"]]).unwrap();
        let back = g.ungroup().permute(&["a", "b", "c", "d"]).unwrap();
        assert_eq!(back, t);
        assert!(t.group_indices(&[vec!["a", "b"], vec!["c"]]).is_err());
    }

    #[test]
    fn factorize_bell_and_product() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = Tensor::new(vec![2, 2], vec!["x", "y"], vec![ZERO, real(h), real(h), ZERO]).unwrap();
        let f = bell.factorize(&["x"], None, None).unwrap();
        assert_eq!(f.singular_values.len(), 2);
        assert!(f.singular_values.iter().all(|s| (s - h).abs() < 1e-12));
        let prod = Tensor::new(vec![2, 2], vec!["x", "y"], vec![real(0.6), real(0.0), real(0.8), real(0.0)]).unwrap();
        let f = prod.factorize(&["x"], None, None).unwrap();
        assert_eq!(f.singular_values.len(), 1);
        assert!((f.singular_values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factorize_reconstructs_random_matrix() {
        let t = random(vec![4, 4], vec!["x", "y"], 11);
        let f = t.factorize(&["x"], None, None).unwrap();
        let back = f.recombine("bond").unwrap();
        let diff: f64 = back.data().iter().zip(t.data()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff < 1e-12);
        assert!(matches!(t.factorize(&[], None, None), Err(Error::EmptySide)));
        assert!(matches!(t.factorize(&["x", "y"], None, None), Err(Error::EmptySide)));
    }

    #[test]
    fn truncation_error_is_discarded_weight() {
        let t = random(vec![4, 5], vec!["x", "y"], 12);
        let full = t.factorize(&["x"], None, None).unwrap();
        let cut = t.factorize(&["x"], Some(2), None).unwrap();
        let expect = full.singular_values[2..].iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((cut.truncation_error - expect).abs() < 1e-12);
        let back = cut.recombine("bond").unwrap();
        let diff: f64 = back.data().iter().zip(t.data()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff <= cut.truncation_error + 1e-10);
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(Tensor::new(vec![2], vec!["a"], vec![ONE]).is_err());
        assert!(Tensor::new(vec![1, 1], vec!["a", "a"], vec![ONE]).is_err());
        assert!(Tensor::new(vec![1], vec!["a"], vec![c(f64::NAN, 0.0)]).is_err());
    }
}
