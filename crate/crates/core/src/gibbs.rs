//! Gibbs-locality fit of boundary states: `H_b = −log ρ` expanded in a
//! product operator basis, with the two-body norms fitted to `J e^{−α d}`.

use serde::{Serialize, Serializer};

use crate::error::{size_check, Error, Result};
use crate::linalg::{self, real, Mat, ZERO};
use crate::peps::BoundaryState;
use crate::tensor::Tensor;

/// Generalized Gell-Mann basis of `D × D` Hermitian matrices, identity
/// first, each scaled so that `tr(B²) = D`.
pub fn hermitian_basis(dim: usize) -> Vec<Mat> {
    let mut out = vec![Mat::identity(dim, dim)];
    let s = (dim as f64 / 2.0).sqrt();
    for j in 0..dim {
        for k in j + 1..dim {
            let mut sym = Mat::zeros(dim, dim);
            sym[(j, k)] = real(s);
            sym[(k, j)] = real(s);
            out.push(sym);
            let mut anti = Mat::zeros(dim, dim);
            anti[(j, k)] = linalg::c(0.0, -s);
            anti[(k, j)] = linalg::c(0.0, s);
            out.push(anti);
        }
    }
    for l in 1..dim {
        let w = s * (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = Mat::zeros(dim, dim);
        for j in 0..l {
            diag[(j, j)] = real(w);
        }
        diag[(l, l)] = real(-w * l as f64);
        out.push(diag);
    }
    out
}

fn ser_alpha<S: Serializer>(a: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if a.is_finite() {
        s.serialize_f64(*a)
    } else {
        s.serialize_str("inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsFit {
    #[serde(skip)]
    pub boundary_hamiltonian: Mat,
    /// `(i, j, ‖h_ij‖)` for every pair `i < j`, operator norm.
    pub two_body_norms: Vec<(usize, usize, f64)>,
    pub single_site_norms: Vec<f64>,
    #[serde(rename = "J")]
    pub j: f64,
    /// `+∞` when no two-body term beyond a single distance survives.
    #[serde(serialize_with = "ser_alpha")]
    pub alpha: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub points_fitted: usize,
    pub support_rank: usize,
    pub full_rank: bool,
}

/// Graph distance along a closed loop of `m` sites.
pub fn loop_distance(i: usize, j: usize, m: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(m - d)
}

/// `−log ρ` on the support of `ρ`, zero on its kernel, plus the support rank.
pub fn pseudo_log(rho: &Mat) -> (Mat, usize) {
    let (vals, vecs) = linalg::eigh(rho);
    let top = vals.iter().cloned().fold(0.0f64, f64::max);
    let cut = top * rho.nrows() as f64 * 1e-12;
    let mut h = Mat::zeros(rho.nrows(), rho.ncols());
    let mut rank = 0;
    for (k, &v) in vals.iter().enumerate() {
        if v > cut {
            rank += 1;
            let col = vecs.column(k);
            h += col * col.adjoint() * real(-v.ln());
        }
    }
    (h, rank)
}

/// Coefficients `c_μ = tr(B_μ H) / D^m` of `H` in the product basis, as a
/// real tensor over `(μ_0, …, μ_{m−1})` flattened row-major.
pub fn product_coefficients(h: &Mat, site_dim: usize, sites: usize) -> Result<Vec<f64>> {
    let n = site_dim.pow(sites as u32);
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch(format!("operator is {}x{}, expected {n}x{n}", h.nrows(), h.ncols())));
    }
    let rows: Vec<String> = (0..sites).map(|k| format!("r{k}")).collect();
    let cols: Vec<String> = (0..sites).map(|k| format!("c{k}")).collect();
    let labels: Vec<String> = rows.iter().chain(&cols).cloned().collect();
    let mut t = Tensor::new(vec![site_dim; 2 * sites], labels, linalg::to_row_major(h))?;
    let basis = hermitian_basis(site_dim);
    let nb = basis.len();
    let scale = 1.0 / site_dim as f64;
    for k in 0..sites {
        let tr = Tensor::from_fn(vec![nb, site_dim, site_dim], vec![format!("mu{k}"), rows[k].clone(), cols[k].clone()], |i| {
            basis[i[0]][(i[2], i[1])] * scale
        })?;
        t = t.contract_shared(&tr)?;
    }
    let mus: Vec<String> = (0..sites).map(|k| format!("mu{k}")).collect();
    let mus: Vec<&str> = mus.iter().map(String::as_str).collect();
    Ok(t.permute(&mus)?.into_data().into_iter().map(|z| z.re).collect())
}

/// Sums `c_μ B_μ` over the basis products supported exactly on `support`.
fn restricted_operator(coeffs: &[f64], basis: &[Mat], sites: usize, support: &[usize]) -> Mat {
    let nb = basis.len();
    let dim = basis[0].nrows();
    let mut out = Mat::zeros(dim.pow(support.len() as u32), dim.pow(support.len() as u32));
    let combos = (nb - 1).pow(support.len() as u32);
    for combo in 0..combos {
        let mut mus = vec![0usize; support.len()];
        let mut rem = combo;
        for m in mus.iter_mut().rev() {
            *m = 1 + rem % (nb - 1);
            rem /= nb - 1;
        }
        let mut flat = 0;
        for site in 0..sites {
            let mu = support.iter().position(|&s| s == site).map_or(0, |p| mus[p]);
            flat = flat * nb + mu;
        }
        let c = coeffs[flat];
        if c != 0.0 {
            let op = mus.iter().skip(1).fold(basis[mus[0]].clone(), |acc, &m| linalg::kron(&acc, &basis[m]));
            out += op * real(c);
        }
    }
    out
}

/// Least-squares fit of `log ‖h_ij‖ = log J − α·dist(i, j)`.
///
/// Norms below `1e-10` of the largest are treated as absent. Fewer than two
/// surviving distances give the sentinel `α = +∞`.
pub fn fit_decay(norms: &[(usize, f64)]) -> (f64, f64, f64, usize) {
    let top = norms.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let pts: Vec<(f64, f64)> =
        norms.iter().filter(|p| top > 0.0 && p.1 >= 1e-10 * top).map(|&(d, v)| (d as f64, v.ln())).collect();
    let mut distinct: Vec<f64> = pts.iter().map(|p| p.0).collect();
    distinct.dedup();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return (top, f64::INFINITY, 0.0, pts.len());
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    (intercept.exp(), -slope, (rss / n).sqrt(), pts.len())
}

/// `H_b = −log ρ` split into single-site and two-body parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsTerms {
    #[serde(skip)]
    pub boundary_hamiltonian: Mat,
    pub two_body_norms: Vec<(usize, usize, f64)>,
    pub single_site_norms: Vec<f64>,
    pub support_rank: usize,
    pub full_rank: bool,
}

pub fn gibbs_terms(rho: &Mat, site_dim: usize, sites: usize) -> Result<GibbsTerms> {
    size_check("boundary operator", (site_dim as u128).saturating_pow(2 * sites as u32), crate::limits::limits().max_tensor)?;
    let (h, support_rank) = pseudo_log(rho);
    let coeffs = product_coefficients(&h, site_dim, sites)?;
    let basis = hermitian_basis(site_dim);
    let single_site_norms =
        (0..sites).map(|i| linalg::op_norm(&restricted_operator(&coeffs, &basis, sites, &[i]))).collect();
    let mut two_body_norms = Vec::new();
    for i in 0..sites {
        for j in i + 1..sites {
            two_body_norms.push((i, j, linalg::op_norm(&restricted_operator(&coeffs, &basis, sites, &[i, j]))));
        }
    }
    Ok(GibbsTerms {
        boundary_hamiltonian: h,
        two_body_norms,
        single_site_norms,
        support_rank,
        full_rank: support_rank == rho.nrows(),
    })
}

/// Fits a `D^m × D^m` density matrix on a loop of `m` sites.
pub fn gibbs_fit_matrix(rho: &Mat, site_dim: usize, sites: usize) -> Result<GibbsFit> {
    if sites < 6 {
        return Err(Error::Precondition(format!(
            "{sites} boundary sites give fewer than 3 distinct loop distances; the fit is underdetermined"
        )));
    }
    let t = gibbs_terms(rho, site_dim, sites)?;
    let by_dist: Vec<(usize, f64)> = t.two_body_norms.iter().map(|&(i, j, v)| (loop_distance(i, j, sites), v)).collect();
    let (j, alpha, residual, points_fitted) = fit_decay(&by_dist);
    Ok(GibbsFit {
        boundary_hamiltonian: t.boundary_hamiltonian,
        two_body_norms: t.two_body_norms,
        single_site_norms: t.single_site_norms,
        j,
        alpha,
        residual,
        points_fitted,
        support_rank: t.support_rank,
        full_rank: t.full_rank,
    })
}

pub fn gibbs_fit(state: &BoundaryState) -> Result<GibbsFit> {
    gibbs_fit_matrix(&state.rho, state.site_dim, state.sites)
}

/// `exp(−H) / tr exp(−H)`.
pub fn gibbs_state(h: &Mat) -> Mat {
    let rho = linalg::hermitian_fn(&linalg::hermitize(h), |x| (-x).exp());
    let tr = rho.trace().re;
    rho / real(tr)
}

/// Embeds a two-site operator acting on sites `(i, j)` of an `m`-site loop.
pub fn embed_two_site(op: &Mat, site_dim: usize, sites: usize, i: usize, j: usize) -> Mat {
    let n = site_dim.pow(sites as u32);
    let digit = |x: usize, k: usize| (x / site_dim.pow((sites - 1 - k) as u32)) % site_dim;
    Mat::from_fn(n, n, |r, c| {
        let same = (0..sites).filter(|&k| k != i && k != j).all(|k| digit(r, k) == digit(c, k));
        if !same {
            return ZERO;
        }
        op[(digit(r, i) * site_dim + digit(r, j), digit(c, i) * site_dim + digit(c, j))]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::models::pauli_z;

    #[test]
    fn basis_is_orthonormal() {
        for dim in 2..5 {
            let b = hermitian_basis(dim);
            assert_eq!(b.len(), dim * dim);
            for (x, bx) in b.iter().enumerate() {
                assert!(linalg::hermiticity_defect(bx) < 1e-15);
                for (y, by) in b.iter().enumerate() {
                    let ip = (bx.adjoint() * by).trace() / real(dim as f64);
                    let expect = if x == y { ONE } else { ZERO };
                    assert!((ip - expect).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn maximally_mixed() {
        let n = 64;
        let rho = Mat::identity(n, n) / real(n as f64);
        let fit = gibbs_fit_matrix(&rho, 2, 6).unwrap();
        assert!(fit.two_body_norms.iter().all(|p| p.2 < 1e-12));
        assert!(fit.alpha.is_infinite());
        let expect = Mat::identity(n, n) * real((n as f64).ln());
        assert!(linalg::fro(&(fit.boundary_hamiltonian - expect)) < 1e-10);
    }

    #[test]
    fn planted_ising_ring() {
        let z = pauli_z();
        let zz = linalg::kron(&z, &z);
        let m = 6;
        let h = (0..m).fold(Mat::zeros(64, 64), |acc, i| acc + embed_two_site(&zz, 2, m, i, (i + 1) % m));
        let fit = gibbs_fit_matrix(&gibbs_state(&h), 2, m).unwrap();
        for &(i, j, v) in &fit.two_body_norms {
            if loop_distance(i, j, m) == 1 {
                assert!((v - 1.0).abs() < 1e-8, "({i},{j}) {v}");
            } else {
                assert!(v < 1e-8);
            }
        }
        assert!(fit.single_site_norms.iter().all(|&v| v < 1e-8));
        assert!(fit.alpha.is_infinite());
    }

    #[test]
    fn planted_decay_is_recovered() {
        let z = pauli_z();
        let zz = linalg::kron(&z, &z);
        let (m, j0, a0) = (6, 0.7, 1.3);
        let mut h = Mat::zeros(64, 64);
        for i in 0..m {
            for j in i + 1..m {
                h += embed_two_site(&zz, 2, m, i, j) * real(j0 * (-a0 * loop_distance(i, j, m) as f64).exp());
            }
        }
        let fit = gibbs_fit_matrix(&gibbs_state(&h), 2, m).unwrap();
        assert!((fit.j - j0).abs() / j0 < 1e-6 && (fit.alpha - a0).abs() / a0 < 1e-6);
        assert!(fit.residual < 1e-8);
    }

    #[test]
    fn too_few_sites() {
        let rho = Mat::identity(16, 16) / real(16.0);
        assert!(matches!(gibbs_fit_matrix(&rho, 2, 4), Err(Error::Precondition(_))));
    }
}
