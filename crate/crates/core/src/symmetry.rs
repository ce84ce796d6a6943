//! Global on-site symmetries of uniform MPS, the virtual projective
//! representation they induce, and its class for finite abelian groups.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::channels::{injectivity_index_mps, transfer_channel};
use crate::error::{size_check, Error, Result};
use crate::limits::limits;
use crate::linalg::{self, real, Mat, ONE};
use crate::mps::{fundamental_gauge, GaugeResult, Mps, MpsTensor};

/// Finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    elements: Vec<String>,
    table: Vec<Vec<usize>>,
    generators: Vec<usize>,
    identity: usize,
}

impl GroupSpec {
    /// Validates closure, associativity, identity and inverses exhaustively,
    /// and that the generators generate.
    pub fn new(elements: Vec<String>, table: Vec<Vec<usize>>, generators: Vec<usize>) -> Result<Self> {
        let n = elements.len();
        if n == 0 || table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::Invalid("multiplication table must be n x n over the elements".into()));
        }
        if generators.iter().any(|&g| g >= n) {
            return Err(Error::Invalid("generator out of range".into()));
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::Invalid(format!("not associative at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or_else(|| Error::Invalid("no identity element".into()))?;
        for g in 0..n {
            if !(0..n).any(|h| table[g][h] == identity && table[h][g] == identity) {
                return Err(Error::Invalid(format!("element {} has no inverse", elements[g])));
            }
        }
        let spec = GroupSpec { elements, table, generators, identity };
        if spec.words().iter().any(Option::is_none) {
            return Err(Error::Invalid("generators do not generate the group".into()));
        }
        Ok(spec)
    }

    /// `Z_n` with generator `1`.
    pub fn cyclic(n: usize) -> Result<Self> {
        let elements = (0..n).map(|k| k.to_string()).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        GroupSpec::new(elements, table, if n > 1 { vec![1] } else { vec![] })
    }

    /// Direct product; element `(a, b)` has index `a·|H| + b`.
    pub fn product(g: &GroupSpec, h: &GroupSpec) -> Result<Self> {
        let (ng, nh) = (g.order(), h.order());
        let elements = (0..ng * nh).map(|k| format!("({},{})", g.elements[k / nh], h.elements[k % nh])).collect();
        let table = (0..ng * nh)
            .map(|x| (0..ng * nh).map(|y| g.table[x / nh][y / nh] * nh + h.table[x % nh][y % nh]).collect())
            .collect();
        let mut generators: Vec<usize> = g.generators.iter().map(|&a| a * nh + h.identity).collect();
        generators.extend(h.generators.iter().map(|&b| g.identity * nh + b));
        GroupSpec::new(elements, table, generators)
    }

    pub fn z2z2() -> Self {
        let z2 = GroupSpec::cyclic(2).expect("valid");
        GroupSpec::product(&z2, &z2).expect("valid")
    }

    /// Parses `z2z2`, `zN`, or products such as `z2xz3`.
    pub fn named(name: &str) -> Result<Self> {
        if name == "z2z2" {
            return Ok(GroupSpec::z2z2());
        }
        let mut out: Option<GroupSpec> = None;
        for part in name.split('x') {
            let n: usize = part
                .strip_prefix('z')
                .and_then(|s| s.parse().ok())
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::Parse(format!("unknown group `{name}`")))?;
            let c = GroupSpec::cyclic(n)?;
            out = Some(match out {
                None => c,
                Some(g) => GroupSpec::product(&g, &c)?,
            });
        }
        out.ok_or_else(|| Error::Parse(format!("unknown group `{name}`")))
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// A shortest generator word for every element (breadth-first).
    fn words(&self) -> Vec<Option<Vec<usize>>> {
        let mut words = vec![None; self.order()];
        words[self.identity] = Some(vec![]);
        let mut frontier = vec![self.identity];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &g in &frontier {
                for (k, &s) in self.generators.iter().enumerate() {
                    let h = self.table[g][s];
                    if words[h].is_none() {
                        let mut w = words[g].clone().expect("visited");
                        w.push(k);
                        words[h] = Some(w);
                        next.push(h);
                    }
                }
            }
            frontier = next;
        }
        words
    }

    /// Extends generator matrices to every element by multiplying along
    /// generator words.
    pub fn represent(&self, gens: &[Mat]) -> Result<Vec<Mat>> {
        if gens.len() != self.generators.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} generator matrices for {} generators",
                gens.len(),
                self.generators.len()
            )));
        }
        let d = gens.first().map_or(1, |m| m.nrows());
        Ok(self
            .words()
            .into_iter()
            .map(|w| w.expect("generated").iter().fold(Mat::identity(d, d), |acc, &k| acc * &gens[k]))
            .collect())
    }
}

fn apply_on_site(psi: &[C64], u: &Mat, d: usize, n: usize, site: usize) -> Vec<C64> {
    let inner = d.pow((n - 1 - site) as u32);
    let mut out = vec![C64::new(0.0, 0.0); psi.len()];
    for (k, o) in out.iter_mut().enumerate() {
        let i = (k / inner) % d;
        let base = k - i * inner;
        *o = (0..d).map(|j| u[(i, j)] * psi[base + j * inner]).sum();
    }
    out
}

/// `‖U^{⊗L}|ψ⟩ − e^{iθ}|ψ⟩‖ / ‖ψ‖` minimized over the global phase.
pub fn symmetry_defect(a: &MpsTensor, u: &Mat, l: usize) -> Result<f64> {
    let d = a.phys_dim();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch(format!("symmetry must be {d}x{d}")));
    }
    size_check("state", (d as u128).saturating_pow(l as u32), limits().max_state)?;
    let psi = Mps::uniform(a, l).to_state()?;
    let norm = linalg::vec_norm(&psi);
    if !(norm > 0.0) {
        return Err(Error::NotNormalizable(format!("state vanishes at L = {l}")));
    }
    let mut phi = psi.clone();
    for site in 0..l {
        phi = apply_on_site(&phi, u, d, l, site);
    }
    let ov = linalg::inner(&psi, &phi);
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
    let diff: f64 = phi.iter().zip(&psi).map(|(x, y)| (x - phase * y).norm_sqr()).sum();
    Ok(diff.sqrt() / norm)
}

/// Whether `U^{⊗L}` leaves the state invariant up to a phase, per `L`.
pub fn check_symmetry(a: &MpsTensor, u: &Mat, ls: &[usize]) -> Result<Vec<bool>> {
    ls.iter().map(|&l| Ok(symmetry_defect(a, u, l)? < 1e-8)).collect()
}

/// Virtual action of one physical symmetry: `U·B = e^{iθ} V⁻¹ B V` where `B`
/// is the trace-preserving form of `A` blocked `block` times.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualSymmetry {
    pub v: Mat,
    pub phase: C64,
    pub block: usize,
    pub residual: f64,
}

/// Trace-preserving form of `A` blocked to its injectivity index.
pub fn injective_form(a: &MpsTensor) -> Result<(MpsTensor, usize)> {
    let b = transfer_channel(a)?.tensor();
    let report = injectivity_index_mps(&b, None);
    let k = report.index.ok_or_else(|| Error::NotInjective(report.certificate.clone()))?;
    Ok((b.block(k), k))
}

/// Leading eigenvalue of `Σ_i B'^i ⊗ conj(B^i)`.
fn mixed_phase(b: &MpsTensor, ub: &MpsTensor) -> C64 {
    let m = b
        .matrices()
        .iter()
        .zip(ub.matrices())
        .fold(Mat::zeros(b.bond_dim().pow(2), b.bond_dim().pow(2)), |acc, (x, y)| acc + linalg::kron(y, &x.conjugate()));
    let eig = linalg::eigenvalues(&m);
    let top = eig.into_iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap_or(ONE);
    if top.norm() > 0.0 {
        top / top.norm()
    } else {
        ONE
    }
}

pub fn extract_vg(a: &MpsTensor, u: &Mat) -> Result<VirtualSymmetry> {
    let (b, k) = injective_form(a)?;
    let uk = (1..k).fold(u.clone(), |acc, _| linalg::kron(&acc, u));
    let ub = b.apply_physical(&uk)?;
    let phase = mixed_phase(&b, &ub);
    let target = ub.scaled(phase.conj());
    let y = match fundamental_gauge(&b, &target)? {
        GaugeResult::Gauge { y, .. } => y,
        GaugeResult::NoGauge { residual } => {
            return Err(Error::NoSolution(format!("no gauge relates U·A to A (residual {residual:e})")))
        }
    };
    let v = linalg::mat_phase_fixed(&linalg::polar_unitary(&y));
    let residual = vg_residual(&b, &ub, &v, phase);
    if residual > 1e-8 {
        return Err(Error::NoSolution(format!("unitarized gauge leaves residual {residual:e}")));
    }
    Ok(VirtualSymmetry { v, phase, block: k, residual })
}

/// `max_i ‖U·B^i − e^{iθ} V† B^i V‖ / max_i ‖B^i‖`.
pub fn vg_residual(b: &MpsTensor, ub: &MpsTensor, v: &Mat, phase: C64) -> f64 {
    let scale = b.matrices().iter().map(linalg::fro).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    b.matrices()
        .iter()
        .zip(ub.matrices())
        .map(|(x, y)| linalg::fro(&(y - v.adjoint() * x * v * phase)))
        .fold(0.0, f64::max)
        / scale
}

/// `V_g` for every group element together with its cocycle.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveRep {
    pub reps: Vec<Mat>,
    pub omega: Vec<Vec<C64>>,
    pub max_relation_residual: f64,
}

/// `ω(g, h) = tr(V_{gh}† V_g V_h) / D`.
pub fn cocycle(reps: &[Mat], g: &GroupSpec) -> Result<ProjectiveRep> {
    let n = g.order();
    if reps.len() != n {
        return Err(Error::DimensionMismatch(format!("{} matrices for a group of order {n}", reps.len())));
    }
    let dim = reps[0].nrows();
    for (k, v) in reps.iter().enumerate() {
        let defect = linalg::fro(&(v.adjoint() * v - Mat::identity(dim, dim)));
        if v.nrows() != dim || defect > 1e-9 {
            return Err(Error::Invalid(format!("V for {} is not a {dim}x{dim} unitary", g.elements[k])));
        }
    }
    let mut omega = vec![vec![ONE; n]; n];
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let ab = g.mul(a, b);
            let prod = &reps[a] * &reps[b];
            let w = (reps[ab].adjoint() * &prod).trace() / real(dim as f64);
            let res = linalg::fro(&(prod - &reps[ab] * w)) / (dim as f64).sqrt();
            if (w.norm() - 1.0).abs() > 1e-8 || res > 1e-8 {
                return Err(Error::Invalid(format!(
                    "not a projective representation at ({}, {}): |ω| = {}, residual {res:e}",
                    g.elements[a],
                    g.elements[b],
                    w.norm()
                )));
            }
            worst = worst.max(res);
            omega[a][b] = w;
        }
    }
    Ok(ProjectiveRep { reps: reps.to_vec(), omega, max_relation_residual: worst })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohomologyClass {
    /// `(g, h, β(g, h))` for generator pairs `g < h`.
    pub beta: Vec<(usize, usize, C64)>,
    pub trivial: bool,
    pub label: String,
}

/// Classifies a cocycle of a finite abelian group by the commutator phases
/// `β(g, h) = ω(g, h) / ω(h, g)` on generator pairs.
pub fn cohomology_class(omega: &[Vec<C64>], g: &GroupSpec) -> Result<CohomologyClass> {
    if !g.is_abelian() {
        return Err(Error::Unsupported("classification of non-abelian groups".into()));
    }
    if g.order() > 16 {
        return Err(Error::Unsupported(format!("group of order {} (at most 16)", g.order())));
    }
    let gens = g.generators();
    let mut beta = Vec::new();
    for (x, &a) in gens.iter().enumerate() {
        for &b in &gens[x + 1..] {
            beta.push((a, b, omega[a][b] / omega[b][a]));
        }
    }
    let trivial = beta.iter().all(|p| (p.2 - ONE).norm() < 1e-6);
    let label = if trivial {
        "trivial".to_string()
    } else {
        let parts: Vec<String> = beta
            .iter()
            .filter(|p| (p.2 - ONE).norm() >= 1e-6)
            .map(|p| {
                let turns = p.2.arg() / std::f64::consts::TAU;
                format!("beta({},{})=exp(2πi·{:.6})", g.elements[p.0], g.elements[p.1], turns)
            })
            .collect();
        format!("nontrivial: {}", parts.join(", "))
    };
    Ok(CohomologyClass { beta, trivial, label })
}

/// End-to-end classification from generator matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SptReport {
    pub virtual_symmetries: Vec<VirtualSymmetry>,
    pub rep: ProjectiveRep,
    pub class: CohomologyClass,
}

pub fn classify(a: &MpsTensor, g: &GroupSpec, generators: &[Mat]) -> Result<SptReport> {
    let us = g.represent(generators)?;
    let virt: Vec<VirtualSymmetry> = us.par_iter().map(|u| extract_vg(a, u)).collect::<Result<_>>()?;
    let reps: Vec<Mat> = virt.iter().map(|v| v.v.clone()).collect();
    let rep = cocycle(&reps, g)?;
    let class = cohomology_class(&rep.omega, g)?;
    Ok(SptReport { virtual_symmetries: virt, rep, class })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{self, pauli_x, pauli_z, rotation, spin1};
    use crate::rng::{instance_rng, random_unitary};

    #[test]
    fn group_axioms() {
        let g = GroupSpec::z2z2();
        assert_eq!(g.order(), 4);
        assert!(g.is_abelian());
        assert_eq!(GroupSpec::named("z2xz3").unwrap().order(), 6);
        let bad = GroupSpec::new(vec!["a".into(), "b".into()], vec![vec![0, 0], vec![0, 0]], vec![]);
        assert!(bad.is_err());
        // S3 as permutations is accepted and flagged non-abelian
        let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let idx = |p: [usize; 3]| perms.iter().position(|&q| q == p).unwrap();
        let table = (0..6)
            .map(|a| (0..6).map(|b| idx([0, 1, 2].map(|i| perms[a][perms[b][i]]))).collect())
            .collect();
        let s3 = GroupSpec::new((0..6).map(|k| k.to_string()).collect(), table, vec![1, 4]).unwrap();
        assert!(!s3.is_abelian());
        let omega = vec![vec![ONE; 6]; 6];
        assert!(matches!(cohomology_class(&omega, &s3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn aklt_rotations() {
        let a = models::aklt();
        let [sx, _, sz] = spin1();
        let rx = rotation(&sx, std::f64::consts::PI);
        let rz = rotation(&sz, std::f64::consts::PI);
        assert_eq!(check_symmetry(&a, &rx, &[4, 6]).unwrap(), vec![true, true]);
        let vx = extract_vg(&a, &rx).unwrap();
        let vz = extract_vg(&a, &rz).unwrap();
        let anti = &vx.v * &vz.v + &vz.v * &vx.v;
        assert!(linalg::fro(&anti) < 1e-8);
        let g = GroupSpec::z2z2();
        let r = classify(&a, &g, &[rx, rz]).unwrap();
        assert!(!r.class.trivial);
        assert!((r.class.beta[0].2 + ONE).norm() < 1e-8);
    }

    #[test]
    fn identity_and_random_unitaries() {
        let mut rng = instance_rng(61, 0);
        let a = models::random_mps_tensor(&mut rng, 2, 2);
        let id = Mat::identity(2, 2);
        assert_eq!(check_symmetry(&a, &id, &[3, 4]).unwrap(), vec![true, true]);
        let v = extract_vg(&a, &id).unwrap();
        assert!(linalg::fro(&(v.v - Mat::identity(2, 2))) < 1e-8);
        let u = random_unitary(&mut rng, 2);
        assert_eq!(check_symmetry(&a, &u, &[4]).unwrap(), vec![false]);
        assert!(matches!(extract_vg(&a, &u), Err(Error::NoSolution(_))));
    }

    #[test]
    fn pauli_cocycle() {
        let (x, z) = (pauli_x(), pauli_z());
        let g = GroupSpec::z2z2();
        let reps = g.represent(&[x, z]).unwrap();
        let rep = cocycle(&reps, &g).unwrap();
        let class = cohomology_class(&rep.omega, &g).unwrap();
        assert!(!class.trivial && (class.beta[0].2 + ONE).norm() < 1e-12);
        let trivial = cocycle(&vec![Mat::identity(2, 2); 4], &g).unwrap();
        assert!(cohomology_class(&trivial.omega, &g).unwrap().trivial);
    }

    #[test]
    fn cluster_and_product_under_z2z2() {
        let (x, id) = (pauli_x(), Mat::identity(2, 2));
        let gens = [linalg::kron(&x, &id), linalg::kron(&id, &x)];
        let g = GroupSpec::z2z2();
        let cluster = models::cluster().block(2);
        let r = classify(&cluster, &g, &gens).unwrap();
        assert!(!r.class.trivial);
        assert!(r.virtual_symmetries.iter().all(|v| v.residual < 1e-8));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [real(h), real(h)];
        let pp: Vec<C64> = (0..4).map(|k| plus[k / 2] * plus[k % 2]).collect();
        let r = classify(&models::product(&pp), &g, &gens).unwrap();
        assert!(r.class.trivial);
    }
}
