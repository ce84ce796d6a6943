//! File loading. Every failure names the file it came from.

use std::path::Path;

use serde_json::Value;
use tnlab::io::{document_from_str, tensor_from_value, Document};
use tnlab::linalg::Mat;
use tnlab::mps::{Boundary, Mps, MpsTensor};
use tnlab::peps::PepsTensor;
use tnlab::{Error, Tensor};

use crate::error::CliError;

fn input_err(path: &Path, source: Error) -> CliError {
    CliError::Input { path: path.display().to_string(), source }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input_err(path, Error::Invalid(e.to_string())))
}

pub fn document(path: &Path) -> Result<Document, CliError> {
    document_from_str(&read(path)?).map_err(|e| input_err(path, e))
}

pub fn tensor(path: &Path) -> Result<Tensor, CliError> {
    match document(path)? {
        Document::Tensor(t) => Ok(t),
        _ => Err(input_err(path, Error::Parse("expected a single TNT tensor, found a chain document".into()))),
    }
}

/// A site tensor, or the common site tensor of a uniform chain.
pub fn mps_tensor(path: &Path) -> Result<MpsTensor, CliError> {
    match document(path)? {
        Document::Tensor(t) => MpsTensor::from_tensor(&t).map_err(|e| input_err(path, e)),
        Document::Mps(m) => {
            let first = m.sites()[0].matrices().to_vec();
            if m.sites().iter().any(|s| s.matrices() != first.as_slice()) {
                return Err(input_err(path, Error::Invalid("chain is not uniform; give a single site tensor".into())));
            }
            MpsTensor::new(first).map_err(|e| input_err(path, e))
        }
        Document::Mpo(_) => Err(input_err(path, Error::Parse("field `kind`: expected \"mps\", found \"mpo\"".into()))),
    }
}

/// A chain document as is, or a site tensor repeated on a ring of `n` sites.
pub fn mps_chain(path: &Path, n: Option<usize>) -> Result<Mps, CliError> {
    match document(path)? {
        Document::Mps(m) => Ok(m),
        Document::Tensor(t) => {
            let a = MpsTensor::from_tensor(&t).map_err(|e| input_err(path, e))?;
            let n = n.ok_or_else(|| CliError::Usage("a single site tensor needs --n".into()))?;
            let m = Mps::uniform(&a, n);
            debug_assert_eq!(m.boundary(), Boundary::Periodic);
            Ok(m)
        }
        Document::Mpo(_) => Err(input_err(path, Error::Parse("field `kind`: expected \"mps\", found \"mpo\"".into()))),
    }
}

pub fn peps_tensor(path: &Path) -> Result<PepsTensor, CliError> {
    PepsTensor::new(tensor(path)?).map_err(|e| input_err(path, e))
}

/// Square matrix from a rank-2 tensor; the first leg is the row.
pub fn matrix_of(t: &Tensor) -> Result<Mat, Error> {
    if t.rank() != 2 {
        return Err(Error::DimensionMismatch(format!("expected a rank-2 tensor, found rank {}", t.rank())));
    }
    let (r, c) = (t.labels()[0].clone(), t.labels()[1].clone());
    let m = t.to_matrix(&[r.as_str()], &[c.as_str()])?;
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!("expected a square matrix, found {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m)
}

pub fn matrix(path: &Path) -> Result<Mat, CliError> {
    matrix_of(&tensor(path)?).map_err(|e| input_err(path, e))
}

/// `{"generators": [TNT, ...]}`.
pub fn generators(path: &Path) -> Result<Vec<Mat>, CliError> {
    let v: Value = serde_json::from_str(&read(path)?)
        .map_err(|e| input_err(path, Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))))?;
    let list = v
        .get("generators")
        .and_then(Value::as_array)
        .ok_or_else(|| input_err(path, Error::Parse("missing field `generators`".into())))?;
    list.iter()
        .enumerate()
        .map(|(k, g)| {
            tensor_from_value(g.clone())
                .and_then(|t| matrix_of(&t))
                .map_err(|e| input_err(path, Error::Parse(format!("generators[{k}]: {e}"))))
        })
        .collect()
}
