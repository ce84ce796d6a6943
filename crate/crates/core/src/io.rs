//! Text formats. A tensor is stored as a "TNT v1" JSON document:
//!
//! ```json
//! {"format":"TNT","version":1,"dims":[2,2],"labels":["row","col"],
//!  "re":[1.0,0.0,0.0,1.0],"im":[0.0,0.0,0.0,0.0]}
//! ```
//!
//! Doubles are written in shortest round-trip form, so a write/read cycle is
//! bit exact. Chains of tensors use the "TNT-MPS" wrapper with a header
//! (`kind`, `boundary`, `d`, `n`) and a `tensors` list of TNT documents.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::mps::{Boundary, Mpo, Mps};
use crate::tensor::Tensor;

pub const TNT_FORMAT: &str = "TNT";
pub const CHAIN_FORMAT: &str = "TNT-MPS";
pub const VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct TntDoc {
    format: String,
    version: u64,
    dims: Vec<usize>,
    labels: Vec<String>,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainKind {
    Mps,
    Mpo,
}

#[derive(Debug, Serialize, Deserialize)]
struct ChainDoc {
    format: String,
    version: u64,
    kind: ChainKind,
    boundary: Boundary,
    d: usize,
    n: usize,
    tensors: Vec<Value>,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
}

/// Deserializes with the offending field path in the message.
fn from_value_at<T: serde::de::DeserializeOwned>(v: Value) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        Error::Parse(format!("field `{path}`: {}", e.into_inner()))
    })
}

fn check_header(v: &Value, format: &str) -> Result<()> {
    let found = v.get("format").and_then(Value::as_str).ok_or_else(|| Error::Parse("missing field `format`".into()))?;
    if found != format {
        return Err(Error::Parse(format!("field `format`: expected \"{format}\", found \"{found}\"")));
    }
    let version = v.get("version").ok_or_else(|| Error::Parse("missing field `version`".into()))?;
    if version.as_u64() != Some(VERSION) {
        return Err(Error::Version { expected: VERSION.to_string(), found: version.to_string() });
    }
    Ok(())
}

fn tensor_to_doc(t: &Tensor) -> TntDoc {
    TntDoc {
        format: TNT_FORMAT.into(),
        version: VERSION,
        dims: t.dims().to_vec(),
        labels: t.labels().to_vec(),
        re: t.data().iter().map(|z| z.re).collect(),
        im: t.data().iter().map(|z| z.im).collect(),
    }
}

/// Reads a TNT document already parsed as JSON (e.g. embedded in another file).
pub fn tensor_from_value(v: Value) -> Result<Tensor> {
    check_header(&v, TNT_FORMAT)?;
    let doc: TntDoc = from_value_at(v)?;
    let expected: usize = doc.dims.iter().product();
    if doc.labels.len() != doc.dims.len() {
        return Err(Error::Parse(format!("field `labels`: {} labels for {} dims", doc.labels.len(), doc.dims.len())));
    }
    for (field, len) in [("re", doc.re.len()), ("im", doc.im.len())] {
        if len != expected {
            return Err(Error::Parse(format!("field `{field}`: {len} entries, product of `dims` is {expected}")));
        }
    }
    let data = doc.re.iter().zip(&doc.im).map(|(&r, &i)| C64::new(r, i)).collect();
    Tensor::new(doc.dims, doc.labels, data).map_err(|e| Error::Parse(format!("tensor: {e}")))
}

pub fn tensor_to_value(t: &Tensor) -> Value {
    serde_json::to_value(tensor_to_doc(t)).expect("plain data")
}

pub fn tensor_to_string(t: &Tensor) -> String {
    serde_json::to_string(&tensor_to_doc(t)).expect("serializable")
}

pub fn tensor_from_str(s: &str) -> Result<Tensor> {
    tensor_from_value(serde_json::from_str(s).map_err(parse_err)?)
}

fn chain_to_string(kind: ChainKind, boundary: Boundary, d: usize, tensors: &[Tensor]) -> String {
    let doc = ChainDoc {
        format: CHAIN_FORMAT.into(),
        version: VERSION,
        kind,
        boundary,
        d,
        n: tensors.len(),
        tensors: tensors.iter().map(|t| serde_json::to_value(tensor_to_doc(t)).expect("serializable")).collect(),
    };
    serde_json::to_string(&doc).expect("serializable")
}

fn chain_from_value(v: Value, kind: ChainKind) -> Result<(Boundary, Vec<Tensor>)> {
    check_header(&v, CHAIN_FORMAT)?;
    let doc: ChainDoc = from_value_at(v)?;
    if doc.kind != kind {
        return Err(Error::Parse(format!("field `kind`: expected {kind:?}, found {:?}", doc.kind)));
    }
    if doc.tensors.len() != doc.n {
        return Err(Error::Parse(format!("field `n`: {} but {} tensors", doc.n, doc.tensors.len())));
    }
    let tensors = doc
        .tensors
        .into_iter()
        .enumerate()
        .map(|(k, t)| tensor_from_value(t).map_err(|e| Error::Parse(format!("tensors[{k}]: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let phys = match kind {
        ChainKind::Mps => crate::mps::PHYS,
        ChainKind::Mpo => crate::mps::OUT,
    };
    for (k, t) in tensors.iter().enumerate() {
        let d = t.dim_of(phys).map_err(|e| Error::Parse(format!("tensors[{k}]: {e}")))?;
        if d != doc.d {
            return Err(Error::Parse(format!("field `d`: {} but tensors[{k}] has {d}", doc.d)));
        }
    }
    Ok((doc.boundary, tensors))
}

pub fn mps_to_string(m: &Mps) -> String {
    chain_to_string(ChainKind::Mps, m.boundary(), m.phys_dim(), &m.to_tensors())
}

pub fn mps_from_str(s: &str) -> Result<Mps> {
    let (boundary, tensors) = chain_from_value(serde_json::from_str(s).map_err(parse_err)?, ChainKind::Mps)?;
    Mps::from_tensors(&tensors, boundary)
}

pub fn mpo_to_string(m: &Mpo) -> String {
    chain_to_string(ChainKind::Mpo, m.boundary(), m.phys_dim(), m.sites())
}

pub fn mpo_from_str(s: &str) -> Result<Mpo> {
    let (boundary, tensors) = chain_from_value(serde_json::from_str(s).map_err(parse_err)?, ChainKind::Mpo)?;
    Mpo::new(tensors, boundary)
}

/// Either a single tensor or a chain document.
#[derive(Debug, Clone)]
pub enum Document {
    Tensor(Tensor),
    Mps(Mps),
    Mpo(Mpo),
}

pub fn document_from_str(s: &str) -> Result<Document> {
    let v: Value = serde_json::from_str(s).map_err(parse_err)?;
    match v.get("format").and_then(Value::as_str) {
        Some(TNT_FORMAT) => Ok(Document::Tensor(tensor_from_value(v)?)),
        Some(CHAIN_FORMAT) => match v.get("kind").and_then(Value::as_str) {
            Some("mpo") => {
                let (b, t) = chain_from_value(v, ChainKind::Mpo)?;
                Ok(Document::Mpo(Mpo::new(t, b)?))
            }
            _ => {
                let (b, t) = chain_from_value(v, ChainKind::Mps)?;
                Ok(Document::Mps(Mps::from_tensors(&t, b)?))
            }
        },
        Some(other) => Err(Error::Parse(format!("field `format`: unknown format \"{other}\""))),
        None => Err(Error::Parse("missing field `format`".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::rng::{complex_normal, instance_rng};

    #[test]
    fn tensor_round_trip_is_bit_exact() {
        let mut rng = instance_rng(11, 0);
        let t = Tensor::from_fn(vec![2, 3, 2], vec!["a", "b", "c"], |_| complex_normal(&mut rng) * 1e-3).unwrap();
        let s = tensor_to_string(&t);
        let back = tensor_from_str(&s).unwrap();
        assert!(t.data().iter().zip(back.data()).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
        assert_eq!(tensor_to_string(&back), s);
    }

    #[test]
    fn mismatched_length_names_field() {
        let s = r#"{"format":"TNT","version":1,"dims":[2,2],"labels":["a","b"],"re":[1,2,3],"im":[0,0,0,0]}"#;
        match tensor_from_str(s) {
            Err(Error::Parse(msg)) => assert!(msg.contains("`re`"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_type_names_field() {
        let s = r#"{"format":"TNT","version":1,"dims":[2],"labels":["a"],"re":[1,"x"],"im":[0,0]}"#;
        match tensor_from_str(s) {
            Err(Error::Parse(m)) => assert!(m.contains("field `re[1]`"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn version_is_checked() {
        let s = r#"{"format":"TNT","version":2,"dims":[1],"labels":["a"],"re":[1],"im":[0]}"#;
        assert!(matches!(tensor_from_str(s), Err(Error::Version { .. })));
        assert!(matches!(tensor_from_str("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn mps_round_trip() {
        let m = Mps::uniform(&models::aklt(), 4);
        let back = mps_from_str(&mps_to_string(&m)).unwrap();
        assert_eq!(back.to_state().unwrap(), m.to_state().unwrap());
        assert!(matches!(document_from_str(&mps_to_string(&m)).unwrap(), Document::Mps(_)));
    }
}
