//! Dense tensor-network laboratory: named-index tensors, matrix product
//! states and operators, transfer channels, parent Hamiltonians, the
//! detectability-lemma operator, small PEPS and symmetry classification.

pub mod channels;
pub mod detectability;
pub mod eigensolver;
pub mod gibbs;
pub mod error;
pub mod io;
pub mod limits;
pub mod linalg;
pub mod models;
pub mod parent;
pub mod peps;
pub mod mps;
pub mod rng;
pub mod symmetry;
pub mod tensor;
pub mod tol;

pub use error::{Error, Result};
pub use tensor::Tensor;
