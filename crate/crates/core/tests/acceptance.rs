//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::Rng as _;
use rayon::prelude::*;

use tnlab::channels::{
    classical_primitivity_index, embed_stochastic, improved_primitivity_bound, injectivity_cap,
    injectivity_index_mps, primitivity_index, quadratic_primitivity_bound, transfer_channel, wielandt_bound,
    wielandt_matrix, wielandt_scan, StochasticMatrix,
};
use tnlab::detectability::{dl_as_mpo, dl_bound_check, mpo_agreement, DlOperator};
use tnlab::error::Status;
use tnlab::gibbs::{embed_two_site, gibbs_fit, gibbs_fit_matrix, gibbs_state, hermitian_basis, loop_distance};
use tnlab::linalg::{self, real, Mat};
use tnlab::models;
use tnlab::mps::{fundamental_gauge, mps_from_state, GaugeResult};
use tnlab::parent::{gamma_map, gap_series, parent_term};
use tnlab::peps::{boundary_state, peps_injectivity_index, PepsTensor};
use tnlab::rng::{complex_normal_matrix, instance_rng, random_state};
use tnlab::symmetry::{classify, GroupSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, ok: String) -> Outcome {
    if failures.is_empty() {
        Outcome { pass: true, detail: ok }
    } else {
        let n = failures.len();
        let shown: Vec<String> = failures.into_iter().take(5).collect();
        Outcome { pass: false, detail: format!("{n} failure(s): {}", shown.join("; ")) }
    }
}

fn wielandt() -> Outcome {
    let mut fails = Vec::new();
    let mut maxima = Vec::new();
    for dim in 2..=4 {
        let bound = wielandt_bound(dim);
        let scan = wielandt_scan(dim).expect("scan");
        let max = scan.iter().filter_map(|p| p.1).max().unwrap_or(0);
        for (mask, idx) in &scan {
            if let Some(i) = idx {
                if *i > bound {
                    fails.push(format!("D={dim} mask {mask:#x}: index {i} > {bound}"));
                }
            }
        }
        let w = classical_primitivity_index(&wielandt_matrix(dim).expect("matrix"), None);
        if w.index != Some(bound) {
            fails.push(format!("D={dim}: Wielandt matrix index {:?} != {bound}", w.index));
        }
        maxima.push(format!("D={dim}: {} patterns, max index {max} (bound {bound})", scan.len()));
    }
    outcome(fails, maxima.join(", "))
}

fn quantum_bounds() -> Outcome {
    let cases: Vec<(usize, usize, u64)> =
        [(2, 2), (2, 3), (3, 2), (3, 3)].iter().flat_map(|&(d, b)| (0..200).map(move |k| (d, b, k))).collect();
    let rows: Vec<Result<(usize, usize), String>> = cases
        .par_iter()
        .map(|&(d, b, k)| {
            let mut rng = instance_rng(2, (d * 10 + b) as u64 * 1000 + k);
            let a = models::random_mps_tensor(&mut rng, d, b);
            let inj = injectivity_index_mps(&a, None);
            let t = transfer_channel(&a).map_err(|e| format!("(d={d},D={b},#{k}) {e}"))?;
            let p = primitivity_index(&t.channel, None);
            let (Some(i), Some(p)) = (inj.index, p.index) else {
                return Err(format!("(d={d},D={b},#{k}) index missing: {} / {}", inj.certificate, p.certificate));
            };
            let quad = quadratic_primitivity_bound(b, d);
            if i > quad || i > injectivity_cap(b) {
                return Err(format!("(d={d},D={b},#{k}) i(A) = {i} above bound"));
            }
            if p > improved_primitivity_bound(b) {
                return Err(format!("(d={d},D={b},#{k}) p = {p} > 2(D-1)^2"));
            }
            if i < p {
                return Err(format!("(d={d},D={b},#{k}) i(A) = {i} < p = {p}"));
            }
            Ok((i, p))
        })
        .collect();
    let fails: Vec<String> = rows.iter().filter_map(|r| r.clone().err()).collect();
    let (imax, pmax) = rows.iter().flatten().fold((0, 0), |acc, &(i, p)| (acc.0.max(i), acc.1.max(p)));
    outcome(fails, format!("{} tensors, max i(A) = {imax}, max p = {pmax}, zero violations", cases.len()))
}

fn embedding() -> Outcome {
    let mut fails = Vec::new();
    let mut checked = 0;
    for dim in 2..=3 {
        for mask in 0..(1u64 << (dim * dim)) {
            let Ok(m) = StochasticMatrix::from_mask(dim, mask) else { continue };
            checked += 1;
            let c = classical_primitivity_index(&m, None);
            let q = primitivity_index(&embed_stochastic(&m), None);
            if c.index != q.index {
                fails.push(format!("D={dim} mask {mask:#x}: classical {:?} vs quantum {:?}", c.index, q.index));
            }
        }
    }
    outcome(fails, format!("{checked} patterns agree"))
}

fn schmidt() -> Outcome {
    let mut fails = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 0..100u64 {
        let n = 2 + (k as usize % 9);
        let mut rng = instance_rng(4, k);
        let psi = random_state(&mut rng, 1 << n);
        let mps = match mps_from_state(&psi, 2, n, 0.0) {
            Ok(m) => m,
            Err(e) => {
                fails.push(format!("#{k}: {e}"));
                continue;
            }
        };
        let back = mps.to_state().expect("state");
        let err = back.iter().zip(&psi).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(err);
        if err >= 1e-9 {
            fails.push(format!("#{k}: reconstruction error {err:e}"));
        }
        let bonds = mps.bond_dims();
        for cut in 1..n {
            let s = mps.entanglement_entropy(cut).expect("entropy");
            if s > (bonds[cut] as f64).ln() + 1e-10 {
                fails.push(format!("#{k} cut {cut}: S = {s} > log {}", bonds[cut]));
            }
        }
    }
    outcome(fails, format!("100 states, worst reconstruction error {worst:.2e}"))
}

fn parent() -> Outcome {
    let mut tensors = vec![("AKLT".to_string(), models::aklt())];
    for k in 0..20u64 {
        let mut rng = instance_rng(5, k);
        tensors.push((format!("random #{k}"), models::random_mps_tensor(&mut rng, 2, 2)));
    }
    let sizes: Vec<usize> = (4..=10).collect();
    let results: Vec<Vec<String>> = tensors
        .par_iter()
        .map(|(name, a)| {
            let rows = match gap_series(a, None, &sizes) {
                Ok(r) => r,
                Err(e) => return vec![format!("{name}: {e}")],
            };
            let mut fails = Vec::new();
            for row in rows {
                let l = row.l;
                let Some(r) = row.report.filter(|_| row.status == Status::Ok) else {
                    fails.push(format!("{name} L={l}: {:?} {}", row.status, row.message));
                    continue;
                };
                let fr = row.frustration.unwrap_or(f64::INFINITY);
                if r.e0.abs() > 1e-9 || r.ground_degeneracy != 1 || fr >= 1e-9 || !(r.gap > 0.0) {
                    fails.push(format!(
                        "{name} L={l}: E0 = {:e}, degeneracy {}, frustration {fr:e}, gap {}",
                        r.e0, r.ground_degeneracy, r.gap
                    ));
                }
            }
            fails
        })
        .collect();
    let fails: Vec<String> = results.into_iter().flatten().collect();
    outcome(fails, "AKLT + 20 random tensors, L = 4..10: unique zero-energy ground state, positive gap".into())
}

fn detectability() -> Outcome {
    let aklt_p = parent_term(&gamma_map(&models::aklt(), 2).expect("gamma")).term;
    let models = [("Ising", models::ising_projector(), 2usize), ("AKLT", aklt_p, 3)];
    let mut jobs = Vec::new();
    for (name, p, d) in &models {
        for l in [4, 6, 8] {
            for ell in 1..=6 {
                jobs.push((*name, p.clone(), *d, l, ell));
            }
        }
    }
    let results: Vec<(Option<String>, f64, f64)> = jobs
        .par_iter()
        .map(|(name, p, d, l, ell)| {
            let tag = format!("{name} L={l} ell={ell}");
            let run = || -> tnlab::Result<(Option<String>, f64, f64)> {
                let dl = DlOperator::new(p.clone(), *d, *l)?;
                let c = dl_bound_check(&dl, *ell)?;
                let mpo = dl_as_mpo(&dl, *ell)?;
                let bond = mpo.max_bond();
                let agree = mpo_agreement(&dl, *ell, &mpo, 4, 6)?;
                let mut why = Vec::new();
                if c.lhs > c.rhs + 1e-8 {
                    why.push(format!("lhs {} > rhs {}", c.lhs, c.rhs));
                }
                if bond > d.pow(2 * *ell as u32) {
                    why.push(format!("bond {bond} > d^(2l)"));
                }
                if agree.max_deviation >= 1e-9 {
                    why.push(format!("MPO deviation {:e}", agree.max_deviation));
                }
                let fail = (!why.is_empty()).then(|| format!("{tag}: {}", why.join(", ")));
                Ok((fail, c.rhs - c.lhs, agree.max_deviation))
            };
            run().unwrap_or_else(|e| (Some(format!("{tag}: {e}")), f64::NAN, f64::NAN))
        })
        .collect();
    let min_margin = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let max_dev = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let fails: Vec<String> = results.into_iter().filter_map(|r| r.0).collect();
    outcome(fails, format!("36 cases, min margin {min_margin:.3e}, max MPO deviation {max_dev:.2e}"))
}

fn gibbs() -> Outcome {
    let mut fails = Vec::new();
    let (m, dim) = (6, 2);
    let basis = hermitian_basis(dim);
    let mut rng = instance_rng(7, 0);
    let mut h = Mat::zeros(64, 64);
    let mut planted = Vec::new();
    for i in 0..m {
        let mut term = Mat::zeros(4, 4);
        for mu in 1..4 {
            for nu in 1..4 {
                term += linalg::kron(&basis[mu], &basis[nu]) * real(rng.random_range(-0.5..0.5));
            }
        }
        let j = (i + 1) % m;
        let (a, b) = (i.min(j), i.max(j));
        // the two-site operator is stored in (a, b) order
        let op = if a == i { term.clone() } else { swap(&term) };
        planted.push((a, b, linalg::op_norm(&term)));
        h += embed_two_site(&op, dim, m, a, b);
    }
    match gibbs_fit_matrix(&gibbs_state(&h), dim, m) {
        Ok(fit) => {
            for &(i, j, v) in &fit.two_body_norms {
                if loop_distance(i, j, m) == 1 {
                    let want = planted.iter().find(|p| p.0 == i && p.1 == j).expect("planted").2;
                    if (v - want).abs() > 1e-6 * want {
                        fails.push(format!("({i},{j}): {v} vs planted {want}"));
                    }
                } else if v >= 1e-8 {
                    fails.push(format!("({i},{j}) at distance {}: {v:e}", loop_distance(i, j, m)));
                }
            }
        }
        Err(e) => fails.push(format!("planted fit: {e}")),
    }
    let mut rng = instance_rng(7, 1);
    let a = PepsTensor::random(&mut rng, 16, 2);
    let inj = peps_injectivity_index(&a, 1);
    if inj.index != Some(1) {
        fails.push(format!("PEPS tensor not injective: {}", inj.certificate));
    }
    let mut detail = String::new();
    match boundary_state(&a, 2, 3) {
        Ok(b) => {
            let tr = b.rho.trace();
            if linalg::hermiticity_defect(&b.rho) > 1e-10 || b.min_eigenvalue < -1e-10 || (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
                fails.push(format!("boundary state: trace {tr}, min eigenvalue {:e}", b.min_eigenvalue));
            }
            match gibbs_fit(&b) {
                Ok(fit) if fit.j.is_finite() && fit.alpha.is_finite() && fit.residual.is_finite() => {
                    detail = format!(
                        "planted recovery ok; 3x3 torus, 2x2 region: J = {:.4}, alpha = {:.4}, residual = {:.4}",
                        fit.j, fit.alpha, fit.residual
                    );
                }
                Ok(fit) => fails.push(format!("non-finite fit: J {} alpha {} residual {}", fit.j, fit.alpha, fit.residual)),
                Err(e) => fails.push(format!("boundary fit: {e}")),
            }
        }
        Err(e) => fails.push(format!("boundary state: {e}")),
    }
    outcome(fails, detail)
}

/// `SWAP · op · SWAP` on two qubits.
fn swap(op: &Mat) -> Mat {
    let p = |k: usize| (k % 2) * 2 + k / 2;
    Mat::from_fn(4, 4, |r, c| op[(p(r), p(c))])
}

fn spt() -> Outcome {
    let mut fails = Vec::new();
    let (x, id) = (models::pauli_x(), Mat::identity(2, 2));
    let gens = [linalg::kron(&x, &id), linalg::kron(&id, &x)];
    let g = GroupSpec::z2z2();
    let mut detail = Vec::new();
    match classify(&models::cluster().block(2), &g, &gens) {
        Ok(r) => {
            let beta = r.class.beta[0].2;
            if (beta + C64::new(1.0, 0.0)).norm() > 1e-8 {
                fails.push(format!("cluster beta = {beta}"));
            }
            let res = r.virtual_symmetries.iter().map(|v| v.residual).fold(0.0, f64::max);
            if res >= 1e-8 {
                fails.push(format!("cluster residual {res:e}"));
            }
            detail.push(format!("cluster beta = {:.3}, {}", beta.re, r.class.label));
        }
        Err(e) => fails.push(format!("cluster: {e}")),
    }
    // |+⟩ ⊗ |+⟩ on the blocked site
    let plus: Vec<C64> = vec![real(0.5); 4];
    match classify(&models::product(&plus), &g, &gens) {
        Ok(r) => {
            if !r.class.trivial {
                fails.push(format!("product state class {}", r.class.label));
            }
            let res = r.virtual_symmetries.iter().map(|v| v.residual).fold(0.0, f64::max);
            if res >= 1e-8 {
                fails.push(format!("product residual {res:e}"));
            }
            detail.push(format!("product {}", r.class.label));
        }
        Err(e) => fails.push(format!("product: {e}")),
    }
    outcome(fails, detail.join("; "))
}

fn gauge() -> Outcome {
    let mut fails = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 0..50u64 {
        let mut rng = instance_rng(9, k);
        let (d, b) = (2 + (k as usize % 2), 2 + (k as usize / 2 % 2));
        let a = models::random_mps_tensor(&mut rng, d, b);
        let y = complex_normal_matrix(&mut rng, b, b);
        let target = a.conjugate_by(&y).expect("invertible");
        match fundamental_gauge(&a, &target) {
            Ok(GaugeResult::Gauge { y: got, .. }) => {
                let want = linalg::mat_phase_fixed(&y) * real(1.0 / linalg::fro(&y));
                let got = linalg::mat_phase_fixed(&got) * real(1.0 / linalg::fro(&got));
                let err = linalg::fro(&(got - want));
                worst = worst.max(err);
                if err >= 1e-7 {
                    fails.push(format!("#{k}: relative error {err:e}"));
                }
            }
            Ok(GaugeResult::NoGauge { residual }) => fails.push(format!("#{k}: no gauge found (residual {residual:e})")),
            Err(e) => fails.push(format!("#{k}: {e}")),
        }
        let other = models::random_mps_tensor(&mut rng, d, b);
        match fundamental_gauge(&a, &other) {
            Ok(GaugeResult::NoGauge { .. }) => {}
            Ok(GaugeResult::Gauge { residual, .. }) => fails.push(format!("#{k}: unrelated pair gauged ({residual:e})")),
            Err(e) => fails.push(format!("#{k} unrelated: {e}")),
        }
    }
    outcome(fails, format!("50 gauges recovered, worst relative error {worst:.2e}; unrelated pairs give no gauge"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("classical Wielandt bound", wielandt),
        ("quantum index bounds", quantum_bounds),
        ("stochastic embedding", embedding),
        ("Schmidt/MPS round trip", schmidt),
        ("parent Hamiltonian", parent),
        ("detectability lemma", detectability),
        ("Gibbs-fit oracle", gibbs),
        ("SPT classification", spt),
        ("fundamental theorem", gauge),
    ];
    let mut all = true;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        all &= o.pass;
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} {name} ({:.1}s) {}", k + 1, start.elapsed().as_secs_f64(), o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
