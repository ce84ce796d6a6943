use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde_json::{json, Value};

use tnlab::channels::{
    improved_primitivity_bound, injectivity_cap, injectivity_index_mps, primitivity_index,
    quadratic_primitivity_bound, transfer_channel, wielandt_bound, wielandt_scan, IndexReport, IndexStatus,
    QuantumChannel, StochasticMatrix,
};
use tnlab::detectability::{dl_as_mpo, dl_bound_check, mpo_agreement, DlOperator};
use tnlab::error::Status;
use tnlab::gibbs::{gibbs_fit, gibbs_terms};
use tnlab::io::{mps_to_string, tensor_to_string};
use tnlab::linalg::{self, real, Mat};
use tnlab::models;
use tnlab::mps::{mps_from_state, Boundary, MpsTensor};
use tnlab::parent::{gamma_map, gap_series, parent_term};
use tnlab::peps::{boundary_state, peps_injectivity_index, PepsTensor};
use tnlab::rng::{instance_rng, random_state};
use tnlab::symmetry::{check_symmetry, classify, GroupSpec};
use tnlab::{Error, Tensor};

use crate::args::*;
use crate::error::CliError;
use crate::input;
use crate::report::{float, Cell, Report};

fn config<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("plain arguments")
}

fn list(s: &str, flag: &str) -> Result<Vec<usize>, CliError> {
    parse_list(s).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

fn search(s: IndexStatus) -> &'static str {
    match s {
        IndexStatus::Found => "found",
        IndexStatus::NotFound => "not-found",
        IndexStatus::Indeterminate => "indeterminate",
        IndexStatus::SizeLimited => "size-limited",
    }
}

fn index_status(r: &IndexReport) -> Status {
    match r.status {
        IndexStatus::Found | IndexStatus::NotFound => Status::Ok,
        IndexStatus::Indeterminate => Status::Indeterminate,
        IndexStatus::SizeLimited => Status::SizeLimited,
    }
}

fn complex(z: C64) -> Value {
    json!({ "re": float(z.re), "im": float(z.im) })
}

fn matrix_json(m: &Mat) -> Value {
    let part = |f: fn(&C64) -> f64| -> Value {
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| float(f(&m[(r, c)]))).collect::<Vec<_>>()).collect()
    };
    json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}

pub fn mps(action: &MpsAction, seed: u64) -> Result<Report, CliError> {
    match action {
        MpsAction::FromState { state, threshold, save } => {
            let t = input::tensor(state)?;
            let n = t.rank();
            let d = t.dims()[0];
            if t.dims().iter().any(|&x| x != d) {
                return Err(CliError::Input {
                    path: state.display().to_string(),
                    source: Error::DimensionMismatch(format!("legs have unequal dimensions {:?}", t.dims())),
                });
            }
            let m = mps_from_state(t.data(), d, n, *threshold)?;
            if let Some(p) = save {
                crate::report::emit(&mps_to_string(&m), Some(p))?;
            }
            let bonds = m.bond_dims();
            let mut rep = Report::table("mps from-state", config(action), seed, vec!["cut", "bond", "entropy", "bound", "status"]);
            for cut in 1..n {
                let row = |e: Result<f64, Error>| match e {
                    Ok(s) => (vec![Cell::from(cut), bonds[cut].into(), s.into(), (bonds[cut] as f64).ln().into(), Status::Ok.into()], Status::Ok),
                    Err(e) => {
                        let st = Status::of_error(&e);
                        (vec![cut.into(), bonds[cut].into(), Cell::Empty, Cell::Empty, st.into()], st)
                    }
                };
                let (r, st) = row(m.entanglement_entropy(cut));
                rep.push(r, st);
            }
            Ok(rep)
        }
        MpsAction::Entropy { mps, n } => {
            let m = input::mps_chain(mps, *n)?;
            let bonds = m.bond_dims();
            let ring = m.boundary() == Boundary::Periodic;
            let mut rep = Report::table("mps entropy", config(action), seed, vec!["cut", "bond", "entropy", "bound", "status"]);
            let rows: Vec<_> = (1..m.len()).into_par_iter().map(|cut| (cut, m.entanglement_entropy(cut))).collect();
            for (cut, e) in rows {
                let bound = if ring { 2.0 * (bonds[cut] as f64).ln() } else { (bonds[cut] as f64).ln() };
                let (row, st) = match e {
                    Ok(s) => (vec![Cell::from(cut), bonds[cut].into(), s.into(), bound.into(), Status::Ok.into()], Status::Ok),
                    Err(e) => {
                        let st = Status::of_error(&e);
                        (vec![cut.into(), bonds[cut].into(), Cell::Empty, bound.into(), st.into()], st)
                    }
                };
                rep.push(row, st);
            }
            Ok(rep)
        }
        MpsAction::Expval { mps, op, n } => {
            let m = input::mps_chain(mps, *n)?;
            let op = input::matrix(op)?;
            let mut rep = Report::table("mps expval", config(action), seed, vec!["site", "re", "im", "status"]);
            for site in 0..m.len() {
                match m.expectation_value(&op, site) {
                    Ok(z) => rep.push(vec![site.into(), z.re.into(), z.im.into(), Status::Ok.into()], Status::Ok),
                    Err(e) => {
                        let st = Status::of_error(&e);
                        rep.push(vec![site.into(), Cell::Empty, Cell::Empty, st.into()], st);
                    }
                }
            }
            Ok(rep)
        }
    }
}

pub fn wielandt(args: &WielandtArgs, seed: u64) -> Result<Report, CliError> {
    let dim = args.dim as usize;
    let scan = wielandt_scan(dim)?;
    let mut rep = Report::table(
        "wielandt-scan",
        config(args),
        seed,
        vec!["instance", "D", "pattern", "primitive", "index", "bound", "status"],
    );
    for (mask, index) in scan {
        let pattern = StochasticMatrix::from_mask(dim, mask).map(|m| {
            m.pattern()
                .iter()
                .map(|r| r.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>())
                .collect::<Vec<_>>()
                .join("/")
        });
        let (pattern, status) = match pattern {
            Ok(p) => (Cell::from(p), Status::Ok),
            Err(_) => (Cell::Empty, Status::Error),
        };
        rep.push(
            vec![mask.into(), dim.into(), pattern, index.is_some().into(), index.into(), wielandt_bound(dim).into(), status.into()],
            status,
        );
    }
    Ok(rep)
}

/// Channels to examine: the file, or transfer channels of random MPS tensors.
fn channels(channel: Option<&std::path::Path>, ens: &Ensemble, seed: u64) -> Result<Vec<Result<QuantumChannel, Error>>, CliError> {
    if let Some(p) = channel {
        let t = input::tensor(p)?;
        let ch = QuantumChannel::from_tensor(&t).map_err(|e| CliError::Input { path: p.display().to_string(), source: e })?;
        return Ok(vec![Ok(ch)]);
    }
    let count = ens.random.unwrap_or(0);
    Ok((0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = instance_rng(seed, k as u64);
            let a = models::random_mps_tensor(&mut rng, ens.d, ens.bond);
            transfer_channel(&a).map(|t| t.channel)
        })
        .collect())
}

pub fn primitivity(args: &PrimitivityArgs, seed: u64) -> Result<Report, CliError> {
    let chans = channels(args.channel.as_deref(), &args.ensemble, seed)?;
    let mut rep = Report::table(
        "primitivity",
        config(args),
        seed,
        vec!["instance", "D", "d", "index", "bound", "quadratic_bound", "status", "search", "certificate"],
    );
    let rows: Vec<_> = chans
        .into_par_iter()
        .enumerate()
        .map(|(k, ch)| match ch {
            Ok(ch) => {
                let (dim, kc) = (ch.dim(), ch.kraus_count());
                let r = primitivity_index(&ch, args.n_max);
                let st = index_status(&r);
                (
                    vec![
                        k.into(),
                        dim.into(),
                        kc.into(),
                        r.index.into(),
                        improved_primitivity_bound(dim).into(),
                        quadratic_primitivity_bound(dim, kc).into(),
                        st.into(),
                        search(r.status).into(),
                        r.certificate.into(),
                    ],
                    st,
                )
            }
            Err(e) => {
                let st = Status::of_error(&e);
                let mut row = vec![Cell::from(k), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty];
                row.extend([st.into(), Cell::Empty, e.to_string().into()]);
                (row, st)
            }
        })
        .collect();
    for (row, st) in rows {
        rep.push(row, st);
    }
    Ok(rep)
}

fn mps_injectivity_row(k: usize, a: &MpsTensor, n_max: Option<usize>) -> (Vec<Cell>, Status) {
    let r = injectivity_index_mps(a, n_max);
    let p = transfer_channel(a).ok().and_then(|t| primitivity_index(&t.channel, None).index);
    let st = index_status(&r);
    (
        vec![
            k.into(),
            a.bond_dim().into(),
            a.phys_dim().into(),
            r.index.into(),
            injectivity_cap(a.bond_dim()).into(),
            p.into(),
            st.into(),
            search(r.status).into(),
            r.certificate.into(),
        ],
        st,
    )
}

pub fn injectivity(args: &InjectivityArgs, seed: u64) -> Result<Report, CliError> {
    let mut rep = Report::table(
        "injectivity",
        config(args),
        seed,
        vec!["instance", "D", "d", "index", "bound", "primitivity_index", "status", "search", "certificate"],
    );
    if let Some(p) = &args.peps {
        let a = input::peps_tensor(p)?;
        let n_max = args.n_max.unwrap_or(2);
        let r = peps_injectivity_index(&a, n_max);
        let st = index_status(&r);
        rep.push(
            vec![
                0usize.into(),
                a.bond_dim().into(),
                a.phys_dim().into(),
                r.index.into(),
                n_max.into(),
                Cell::Empty,
                st.into(),
                search(r.status).into(),
                r.certificate.into(),
            ],
            st,
        );
        return Ok(rep);
    }
    let rows: Vec<_> = if let Some(p) = &args.mps {
        vec![mps_injectivity_row(0, &input::mps_tensor(p)?, args.n_max)]
    } else {
        let ens = &args.ensemble;
        (0..ens.random.unwrap_or(0))
            .into_par_iter()
            .map(|k| {
                let mut rng = instance_rng(seed, k as u64);
                mps_injectivity_row(k, &models::random_mps_tensor(&mut rng, ens.d, ens.bond), args.n_max)
            })
            .collect()
    };
    for (row, st) in rows {
        rep.push(row, st);
    }
    Ok(rep)
}

fn named_mps(m: MpsModel) -> MpsTensor {
    match m {
        MpsModel::Aklt => models::aklt(),
        MpsModel::Ghz => models::ghz(),
        MpsModel::Cluster => models::cluster(),
    }
}

pub fn parent_gap(args: &ParentArgs, seed: u64) -> Result<Report, CliError> {
    let a = match (&args.mps, args.model) {
        (Some(p), _) => input::mps_tensor(p)?,
        (None, Some(m)) => named_mps(m),
        (None, None) => unreachable!("clap requires a source"),
    };
    let region = match args.region.as_str() {
        "auto" => None,
        s => Some(s.parse::<usize>().map_err(|_| CliError::Usage(format!("--region: expected `auto` or a number, found `{s}`")))?),
    };
    let sizes = list(&args.sizes, "sizes")?;
    let mut rep = Report::table(
        "parent-gap",
        config(args),
        seed,
        vec!["L", "region", "E0", "E1", "degeneracy", "gap", "solver_residual", "frustration", "status", "message"],
    );
    let series = match region {
        Some(n) => Ok(n),
        None => tnlab::parent::default_region(&a),
    }
    .and_then(|n| Ok((n, gap_series(&a, Some(n), &sizes)?)));
    let (n, rows) = match series {
        Ok(x) => x,
        Err(e) => {
            // the parent term itself failed; every size still gets a row
            let st = Status::of_error(&e);
            for &l in &sizes {
                let mut row = vec![Cell::from(l), region.into()];
                row.extend(std::iter::repeat_n(Cell::Empty, 6));
                row.extend([st.into(), e.to_string().into()]);
                rep.push(row, st);
            }
            return Ok(rep);
        }
    };
    for r in rows {
        let s = r.report.as_ref();
        rep.push(
            vec![
                r.l.into(),
                n.into(),
                s.map(|s| s.e0).into(),
                s.map(|s| s.e1).into(),
                s.map(|s| s.ground_degeneracy).into(),
                s.map(|s| s.gap).into(),
                s.map(|s| s.solver_residual).into(),
                r.frustration.into(),
                r.status.into(),
                r.message.into(),
            ],
            r.status,
        );
    }
    Ok(rep)
}

/// Two-site projector and physical dimension for `--model`.
fn dl_projector(model: &str) -> Result<(Mat, usize), CliError> {
    match model {
        "ising" => Ok((models::ising_projector(), 2)),
        "aklt" => Ok((parent_term(&gamma_map(&models::aklt(), 2)?).term, 3)),
        path => {
            let p = std::path::Path::new(path);
            if !p.exists() {
                return Err(CliError::Usage(format!("--model: `{path}` is neither `ising`, `aklt` nor a file")));
            }
            let m = input::matrix(p)?;
            let d = (1..=m.nrows()).find(|d| d * d == m.nrows()).ok_or_else(|| CliError::Input {
                path: path.into(),
                source: Error::DimensionMismatch(format!("{} is not a square d^2", m.nrows())),
            })?;
            Ok((m, d))
        }
    }
}

pub fn dl_check(args: &DlArgs, seed: u64) -> Result<Report, CliError> {
    let (p, d) = dl_projector(&args.model)?;
    let ls = list(&args.l, "L")?;
    let ells = list(&args.ell, "ell")?;
    let jobs: Vec<(usize, usize)> = ls.iter().flat_map(|&l| ells.iter().map(move |&e| (l, e))).collect();
    let rows: Vec<(Vec<Cell>, Status)> = jobs
        .par_iter()
        .map(|&(l, ell)| {
            let mpo_bound = (d as u128)
                .checked_pow(2 * ell as u32)
                .and_then(|b| i128::try_from(b).ok())
                .map_or(Cell::Float(f64::INFINITY), Cell::Int);
            let run = || -> Result<Vec<Cell>, Error> {
                let dl = DlOperator::new(p.clone(), d, l)?;
                let c = dl_bound_check(&dl, ell)?;
                let (bond, dev, how) = if args.no_mpo {
                    (Cell::Empty, Cell::Empty, Cell::Empty)
                } else {
                    let mpo = dl_as_mpo(&dl, ell)?;
                    let agree = mpo_agreement(&dl, ell, &mpo, args.samples, seed)?;
                    (mpo.max_bond().into(), agree.max_deviation.into(), if agree.dense { "dense" } else { "sampled" }.into())
                };
                let mut msg = Vec::new();
                if !c.holds {
                    msg.push("bound violated".to_string());
                }
                if c.projector_substituted {
                    msg.push(format!("degenerate ground band ({}); its projector is used", c.ground_degeneracy));
                }
                Ok(vec![
                    l.into(),
                    ell.into(),
                    c.lhs.into(),
                    c.rhs.into(),
                    c.margin.into(),
                    c.gap.into(),
                    c.ground_degeneracy.into(),
                    bond,
                    mpo_bound.clone(),
                    dev,
                    how,
                    Status::Ok.into(),
                    msg.join("; ").into(),
                ])
            };
            match run() {
                Ok(row) => (row, Status::Ok),
                Err(e) => {
                    let st = Status::of_error(&e);
                    let mut row = vec![Cell::from(l), ell.into()];
                    row.extend(std::iter::repeat_n(Cell::Empty, 6));
                    row.extend([mpo_bound, Cell::Empty, Cell::Empty, st.into(), e.to_string().into()]);
                    (row, st)
                }
            }
        })
        .collect();
    let mut rep = Report::table(
        "dl-check",
        config(args),
        seed,
        vec![
            "L",
            "ell",
            "lhs",
            "rhs",
            "margin",
            "gap",
            "ground_degeneracy",
            "mpo_bond",
            "mpo_bound",
            "mpo_deviation",
            "mpo_check",
            "status",
            "message",
        ],
    );
    for (row, st) in rows {
        rep.push(row, st);
    }
    Ok(rep)
}

pub fn boundary_fit(args: &BoundaryArgs, seed: u64) -> Result<Report, CliError> {
    let a = input::peps_tensor(&args.peps)?;
    let b = match boundary_state(&a, args.region, args.l) {
        Ok(b) => b,
        Err(e) => {
            let st = Status::of_error(&e);
            let body = json!({ "status": st.as_str(), "message": e.to_string() });
            return Ok(Report::document("boundary-fit", config(args), seed, body, st == Status::Error));
        }
    };
    let mut body = json!({
        "boundary": serde_json::to_value(&b).expect("plain data"),
    });
    let status = match gibbs_fit(&b) {
        Ok(fit) => {
            let v = serde_json::to_value(&fit).expect("plain data");
            body.as_object_mut().expect("object").extend(v.as_object().expect("object").clone());
            body["message"] = json!("");
            Status::Ok
        }
        Err(Error::Precondition(why)) => {
            // too few boundary sites for a distance fit; report the terms alone
            let terms = gibbs_terms(&b.rho, b.site_dim, b.sites)?;
            let v = serde_json::to_value(&terms).expect("plain data");
            body.as_object_mut().expect("object").extend(v.as_object().expect("object").clone());
            body["J"] = Value::Null;
            body["alpha"] = Value::Null;
            body["residual"] = Value::Null;
            body["message"] = json!(format!("fit not determined: {why}"));
            Status::Indeterminate
        }
        Err(e) => {
            body["message"] = json!(e.to_string());
            Status::of_error(&e)
        }
    };
    body["status"] = json!(status.as_str());
    Ok(Report::document("boundary-fit", config(args), seed, body, status == Status::Error))
}

pub fn spt_classify(args: &SptArgs, seed: u64) -> Result<Report, CliError> {
    let a = input::mps_tensor(&args.mps)?;
    let g = GroupSpec::named(&args.group).map_err(|e| CliError::Usage(format!("--group: {e}")))?;
    let gens = input::generators(&args.reps)?;
    let ls = list(&args.check, "check")?;
    let mut checks = Vec::new();
    let mut symmetric = true;
    for (k, u) in gens.iter().enumerate() {
        match check_symmetry(&a, u, &ls) {
            Ok(holds) => {
                symmetric &= holds.iter().all(|&h| h);
                checks.extend(ls.iter().zip(holds).map(|(&l, h)| json!({ "generator": k, "L": l, "holds": h })));
            }
            Err(e) => {
                symmetric = false;
                checks.push(json!({ "generator": k, "holds": null, "message": e.to_string() }));
            }
        }
    }
    let mut body = json!({
        "group": args.group,
        "elements": g.elements(),
        "symmetry_checks": checks,
    });
    let status = match classify(&a, &g, &gens) {
        Ok(r) => {
            body["virtual_symmetries"] = r
                .virtual_symmetries
                .iter()
                .zip(g.elements())
                .map(|(v, name)| {
                    json!({
                        "element": name,
                        "V": matrix_json(&v.v),
                        "phase": complex(v.phase),
                        "block": v.block,
                        "residual": float(v.residual),
                    })
                })
                .collect();
            body["cocycle"] = r.rep.omega.iter().map(|row| row.iter().map(|&z| complex(z)).collect::<Vec<_>>()).collect();
            body["max_relation_residual"] = float(r.rep.max_relation_residual);
            body["beta"] = r
                .class
                .beta
                .iter()
                .map(|&(x, y, z)| {
                    json!({
                        "g": g.elements()[x],
                        "h": g.elements()[y],
                        "value": complex(z),
                        "angle_over_2pi": float(z.arg() / std::f64::consts::TAU),
                    })
                })
                .collect();
            body["trivial"] = json!(r.class.trivial);
            body["label"] = json!(r.class.label);
            body["message"] = json!(if symmetric { "" } else { "the state is not invariant under every generator" });
            if symmetric { Status::Ok } else { Status::Indeterminate }
        }
        Err(e) => {
            body["message"] = json!(e.to_string());
            Status::of_error(&e)
        }
    };
    body["status"] = json!(status.as_str());
    Ok(Report::document("spt-classify", config(args), seed, body, status == Status::Error))
}

fn generators_doc(gens: &[Mat]) -> String {
    let list: Vec<Value> = gens
        .iter()
        .map(|m| {
            let t = Tensor::from_matrix(m, "out", "in").expect("matrix");
            serde_json::from_str(&tensor_to_string(&t)).expect("valid document")
        })
        .collect();
    serde_json::to_string(&json!({ "generators": list })).expect("plain data") + "\n"
}

/// TNT text of a built-in model.
pub fn model(args: &ModelArgs, seed: u64) -> Result<String, CliError> {
    let mut rng = instance_rng(seed, 0);
    let mps = |a: MpsTensor| tensor_to_string(&a.to_tensor()) + "\n";
    let mat = |m: Mat| tensor_to_string(&Tensor::from_matrix(&m, "out", "in").expect("matrix")) + "\n";
    if args.d == 0 || args.bond == 0 || args.n == 0 {
        return Err(CliError::Usage("--d, --bond and --n must be positive".into()));
    }
    Ok(match args.name {
        ModelName::Aklt => mps(models::aklt()),
        ModelName::Ghz => mps(models::ghz()),
        ModelName::Cluster => mps(models::cluster()),
        ModelName::ClusterBlocked => mps(models::cluster().block(2)),
        ModelName::ProductPlus => mps(models::product(&[real(0.5); 4])),
        ModelName::RandomMps => mps(models::random_mps_tensor(&mut rng, args.d, args.bond)),
        ModelName::RandomChannel => {
            let a = models::random_mps_tensor(&mut rng, args.d, args.bond);
            tensor_to_string(&transfer_channel(&a)?.channel.to_tensor()) + "\n"
        }
        ModelName::RandomState => {
            let len = (args.d as u128).checked_pow(args.n as u32).unwrap_or(u128::MAX);
            let cap = tnlab::limits::limits().max_state;
            if len > cap {
                return Err(Error::SizeCap { what: "random state".into(), needed: len, cap }.into());
            }
            let psi = random_state(&mut rng, len as usize);
            let labels: Vec<String> = (0..args.n).map(|k| format!("s{k}")).collect();
            tensor_to_string(&Tensor::new(vec![args.d; args.n], labels, psi)?) + "\n"
        }
        ModelName::IsingProjector => mat(models::ising_projector()),
        ModelName::AkltProjector => mat(parent_term(&gamma_map(&models::aklt(), 2)?).term),
        ModelName::RandomPeps => tensor_to_string(PepsTensor::random(&mut rng, args.d, args.bond).tensor()) + "\n",
        ModelName::GhzPeps => tensor_to_string(PepsTensor::ghz_copy(2).tensor()) + "\n",
        ModelName::ClusterReps => {
            let (x, id) = (models::pauli_x(), Mat::identity(2, 2));
            generators_doc(&[linalg::kron(&x, &id), linalg::kron(&id, &x)])
        }
        ModelName::AkltReps => {
            let s = models::spin1();
            let pi = std::f64::consts::PI;
            generators_doc(&[models::rotation(&s[0], pi), models::rotation(&s[2], pi)])
        }
    })
}
