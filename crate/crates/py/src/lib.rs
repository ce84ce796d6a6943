//! Python module `tnlab_py`. Tensors cross the boundary as TNT v1 text.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tnlab::channels::{injectivity_index_mps, primitivity_index as channel_index, transfer_channel, wielandt_scan as scan};
use tnlab::detectability::{dl_bound_check, DlOperator};
use tnlab::io::{tensor_from_str, tensor_to_string};
use tnlab::linalg::Mat;
use tnlab::models;
use tnlab::mps::{Mps, MpsTensor};
use tnlab::parent::{gamma_map, gap_series, parent_term};
use tnlab::symmetry::{classify, GroupSpec};

fn value_err(e: tnlab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn site(tnt: &str) -> tnlab::Result<MpsTensor> {
    MpsTensor::from_tensor(&tensor_from_str(tnt)?)
}

fn square(tnt: &str) -> tnlab::Result<Mat> {
    let t = tensor_from_str(tnt)?;
    if t.rank() != 2 {
        return Err(tnlab::Error::DimensionMismatch(format!("expected rank 2, found {}", t.rank())));
    }
    let (r, c) = (t.labels()[0].clone(), t.labels()[1].clone());
    t.to_matrix(&[r.as_str()], &[c.as_str()])
}

/// Site tensor of a named model (`aklt`, `ghz`, `cluster`) as TNT text.
#[pyfunction]
fn model(name: &str) -> PyResult<String> {
    let a = match name {
        "aklt" => models::aklt(),
        "ghz" => models::ghz(),
        "cluster" => models::cluster(),
        other => return Err(PyValueError::new_err(format!("unknown model `{other}`"))),
    };
    Ok(tensor_to_string(&a.to_tensor()))
}

/// `(mask, index)` for every D x D pattern; `index` is None if not primitive.
#[pyfunction]
fn wielandt_scan(dim: usize) -> PyResult<Vec<(u64, Option<usize>)>> {
    scan(dim).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (tnt, n_max=None))]
fn injectivity_index(tnt: &str, n_max: Option<usize>) -> PyResult<Option<usize>> {
    Ok(injectivity_index_mps(&site(tnt).map_err(value_err)?, n_max).index)
}

/// Primitivity index of the transfer channel of an MPS site tensor.
#[pyfunction]
fn primitivity_index(tnt: &str) -> PyResult<Option<usize>> {
    let t = transfer_channel(&site(tnt).map_err(value_err)?).map_err(value_err)?;
    Ok(channel_index(&t.channel, None).index)
}

/// Entropy of the first `cut` sites of the ring of `n` copies.
#[pyfunction]
fn entanglement_entropy(tnt: &str, n: usize, cut: usize) -> PyResult<f64> {
    Mps::uniform(&site(tnt).map_err(value_err)?, n).entanglement_entropy(cut).map_err(value_err)
}

/// Parent-Hamiltonian spectra, one dict per ring length.
#[pyfunction]
#[pyo3(signature = (tnt, sizes, region=None))]
fn parent_gap<'py>(py: Python<'py>, tnt: &str, sizes: Vec<usize>, region: Option<usize>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rows = gap_series(&site(tnt).map_err(value_err)?, region, &sizes).map_err(value_err)?;
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("L", r.l)?;
            d.set_item("status", r.status.as_str())?;
            if let Some(s) = &r.report {
                d.set_item("E0", s.e0)?;
                d.set_item("gap", s.gap)?;
                d.set_item("degeneracy", s.ground_degeneracy)?;
            }
            d.set_item("message", r.message)?;
            Ok(d)
        })
        .collect()
}

/// `(lhs, rhs, gap)` of the detectability bound for `ising` or `aklt`.
#[pyfunction]
fn dl_check(name: &str, l: usize, ell: usize) -> PyResult<(f64, f64, f64)> {
    let (p, d) = match name {
        "ising" => (models::ising_projector(), 2),
        "aklt" => (parent_term(&gamma_map(&models::aklt(), 2).map_err(value_err)?).term, 3),
        other => return Err(PyValueError::new_err(format!("unknown model `{other}`"))),
    };
    let c = DlOperator::new(p, d, l).and_then(|dl| dl_bound_check(&dl, ell)).map_err(value_err)?;
    Ok((c.lhs, c.rhs, c.gap))
}

/// Cohomology label and triviality for an on-site symmetry given by
/// generator matrices (TNT text, rank 2).
#[pyfunction]
#[pyo3(signature = (tnt, generators, group="z2z2"))]
fn spt_class(tnt: &str, generators: Vec<String>, group: &str) -> PyResult<(String, bool)> {
    let g = GroupSpec::named(group).map_err(value_err)?;
    let gens = generators.iter().map(|s| square(s)).collect::<tnlab::Result<Vec<_>>>().map_err(value_err)?;
    let r = classify(&site(tnt).map_err(value_err)?, &g, &gens).map_err(value_err)?;
    Ok((r.class.label, r.class.trivial))
}

#[pymodule]
fn tnlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(model, m)?)?;
    m.add_function(wrap_pyfunction!(wielandt_scan, m)?)?;
    m.add_function(wrap_pyfunction!(injectivity_index, m)?)?;
    m.add_function(wrap_pyfunction!(primitivity_index, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(parent_gap, m)?)?;
    m.add_function(wrap_pyfunction!(dl_check, m)?)?;
    m.add_function(wrap_pyfunction!(spt_class, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_reads_rank_two() {
        let id = tnlab::Tensor::from_matrix(&Mat::identity(3, 3), "out", "in").unwrap();
        assert_eq!(square(&tensor_to_string(&id)).unwrap(), Mat::identity(3, 3));
        assert!(square(&model("ghz").unwrap()).is_err());
    }
}
