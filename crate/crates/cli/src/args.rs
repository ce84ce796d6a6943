use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "tnlab", version, about = "Tensor-network laboratory: MPS/PEPS, channels, parent Hamiltonians, SPT")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Global {
    /// Seed for every random choice; instances draw from independent streams.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Cap on dense state vectors (also TNLAB_MAX_STATE).
    #[arg(long, global = true)]
    pub max_state: Option<u128>,
    /// Cap on region maps d^|R|·D^|∂R| (also TNLAB_MAX_REGION).
    #[arg(long, global = true)]
    pub max_region: Option<u128>,
    /// Cap on Hilbert spaces for diagonalization (also TNLAB_MAX_HILBERT).
    #[arg(long, global = true)]
    pub max_hilbert: Option<u128>,
    /// Cap on intermediate tensors of network contractions (also TNLAB_MAX_TENSOR).
    #[arg(long, global = true)]
    pub max_tensor: Option<u128>,
    /// Cap on fused MPO site tensors (also TNLAB_MAX_MPO_SITE).
    #[arg(long, global = true)]
    pub max_mpo_site: Option<u128>,
}

pub const MPS_HELP: &str = "\
CSV columns (from-state, entropy):
  cut       number of sites left of the cut
  bond      bond dimension at the cut
  entropy   von Neumann entropy of the left block (natural log)
  bound     log(bond), doubled on rings (two cuts)
  status    ok | indeterminate | size-limited | error
CSV columns (expval):
  site      site index
  re, im    real and imaginary part of <psi|O_site|psi>/<psi|psi>
  status    ok | indeterminate | size-limited | error";

pub const WIELANDT_HELP: &str = "\
CSV columns:
  instance   bit mask of the pattern (bit i*D+j is entry (i,j))
  D          matrix dimension
  pattern    rows of the 0/1 pattern separated by '/'
  primitive  whether some power is entrywise positive
  index      primitivity index (empty if not primitive)
  bound      D^2-2D+2
  status     ok | indeterminate | size-limited | error";

pub const PRIMITIVITY_HELP: &str = "\
CSV columns:
  instance        instance id (0 for a file input)
  D               channel dimension
  d               number of Kraus operators
  index           primitivity index (empty if not found)
  bound           2(D-1)^2
  quadratic_bound (D^2-d+1)D^2
  status          ok | indeterminate | size-limited | error
  search          found | not-found | indeterminate | size-limited
  certificate     how the index was certified";

pub const INJECTIVITY_HELP: &str = "\
CSV columns:
  instance            instance id (0 for a file input)
  D                   bond dimension
  d                   physical dimension
  index               injectivity index (empty if not found)
  bound               2D^2(6+log2 D) for MPS; --n-max for PEPS
  primitivity_index   index of the transfer channel (MPS only)
  status              ok | indeterminate | size-limited | error
  search              found | not-found | indeterminate | size-limited
  certificate         how the index was certified (PEPS not-found is not a certificate)";

pub const PARENT_HELP: &str = "\
CSV columns:
  L                ring length
  region           number of sites of each parent term
  E0               lowest eigenvalue
  E1               first eigenvalue above the ground band
  degeneracy       dimension of the ground band
  gap              E1 - E0
  solver_residual  largest eigenpair residual
  frustration      <psi_A|H|psi_A>/<psi_A|psi_A> for the tensor's own ring state
  status           ok | indeterminate | size-limited | error
  message          diagnostic text";

pub const DL_HELP: &str = "\
CSV columns:
  L                  ring length
  ell                power of the detectability operator
  lhs                ||P_GS - DL^ell||
  rhs                (gap/4 + 1)^(-ell/2)
  margin             rhs - lhs
  gap                exact finite-size gap of the parent chain
  ground_degeneracy  dimension of the ground band
  mpo_bond           largest fused bond of the MPO form of DL^ell
  mpo_bound          d^(2 ell)
  mpo_deviation      largest deviation between MPO and DL^ell
  mpo_check          dense | sampled (how the MPO was compared)
  status             ok | indeterminate | size-limited | error
  message            diagnostic text";

#[derive(Debug, Subcommand)]
pub enum Command {
    /// MPS utilities: decomposition of a dense state, entropies, expectation values.
    #[command(after_help = MPS_HELP)]
    Mps {
        #[command(subcommand)]
        action: MpsAction,
    },
    /// Exhaustive scan of D x D 0/1 patterns with their primitivity indices.
    #[command(after_help = WIELANDT_HELP)]
    WielandtScan(WielandtArgs),
    /// Primitivity index of a quantum channel.
    #[command(after_help = PRIMITIVITY_HELP)]
    Primitivity(PrimitivityArgs),
    /// Injectivity index of an MPS or PEPS tensor.
    #[command(after_help = INJECTIVITY_HELP)]
    Injectivity(InjectivityArgs),
    /// Spectral gap of the parent Hamiltonian on rings.
    #[command(after_help = PARENT_HELP)]
    ParentGap(ParentArgs),
    /// Detectability-lemma bound and MPO form of DL^ell.
    #[command(after_help = DL_HELP)]
    DlCheck(DlArgs),
    /// Boundary state of a PEPS region and its Gibbs-locality fit (JSON only).
    BoundaryFit(BoundaryArgs),
    /// Projective representation and cohomology class of an on-site symmetry (JSON only).
    SptClassify(SptArgs),
    /// Writes a built-in model as a TNT document.
    Model(ModelArgs),
}

#[derive(Debug, Subcommand, Serialize)]
pub enum MpsAction {
    /// Decomposes a dense state (a TNT tensor with one leg per site).
    FromState {
        #[arg(long)]
        state: PathBuf,
        /// Absolute singular-value threshold (0 keeps every value above the rank cutoff).
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        /// Also write the open-boundary MPS document here.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Entanglement entropy at every cut.
    Entropy {
        #[arg(long)]
        mps: PathBuf,
        /// Ring length when the file holds a single site tensor.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Expectation value of a one-site operator at every site.
    Expval {
        #[arg(long)]
        mps: PathBuf,
        /// d x d operator as a rank-2 TNT tensor (first leg is the row).
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct WielandtArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=5))]
    pub dim: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct Ensemble {
    /// Number of random instances (transfer channels of random MPS tensors).
    #[arg(long)]
    pub random: Option<usize>,
    /// Physical dimension of random instances.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Bond dimension of random instances.
    #[arg(long, default_value_t = 2)]
    pub bond: usize,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["channel", "random"]))]
pub struct PrimitivityArgs {
    /// Kraus operators as a TNT tensor with legs (kraus, out, in).
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[command(flatten)]
    pub ensemble: Ensemble,
    /// Search limit (default: 2(D-1)^2, continuing to (D^2-d+1)D^2).
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["mps", "peps", "random"]))]
pub struct InjectivityArgs {
    /// MPS site tensor (legs left, phys, right) or uniform chain document.
    #[arg(long)]
    pub mps: Option<PathBuf>,
    /// PEPS site tensor (legs phys, up, right, down, left).
    #[arg(long)]
    pub peps: Option<PathBuf>,
    #[command(flatten)]
    pub ensemble: Ensemble,
    /// Search limit (PEPS: required meaning, default 2).
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MpsModel {
    Aklt,
    Ghz,
    Cluster,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["mps", "model"]))]
pub struct ParentArgs {
    #[arg(long)]
    pub mps: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<MpsModel>,
    /// Sites per parent term: `auto` (i(A)+1) or a number.
    #[arg(long, default_value = "auto")]
    pub region: String,
    /// Ring lengths, e.g. `4..10` or `4,6,8`.
    #[arg(long, default_value = "4..8")]
    pub sizes: String,
}

#[derive(Debug, Args, Serialize)]
pub struct DlArgs {
    /// `ising`, `aklt`, or a two-site projector as a rank-2 TNT tensor (d^2 x d^2).
    #[arg(long)]
    pub model: String,
    /// Ring lengths, e.g. `6` or `4,6,8`.
    #[arg(long = "L", default_value = "6")]
    pub l: String,
    /// Powers, e.g. `1..8`.
    #[arg(long, default_value = "1..6")]
    pub ell: String,
    /// Random vectors for the MPO comparison when the dense one is too large.
    #[arg(long, default_value_t = 4)]
    pub samples: usize,
    /// Skip the MPO construction and comparison.
    #[arg(long)]
    pub no_mpo: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundaryArgs {
    #[arg(long)]
    pub peps: PathBuf,
    /// Torus side.
    #[arg(long = "L", default_value_t = 3)]
    pub l: usize,
    /// Side of the square region.
    #[arg(long, default_value_t = 1)]
    pub region: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SptArgs {
    #[arg(long)]
    pub mps: PathBuf,
    /// `z2z2`, `zN`, or products such as `z2xz4`.
    #[arg(long, default_value = "z2z2")]
    pub group: String,
    /// JSON `{"generators": [TNT, ...]}` with one d x d unitary per generator.
    #[arg(long)]
    pub reps: PathBuf,
    /// Ring lengths on which the global symmetry is checked densely.
    #[arg(long, default_value = "4,6")]
    pub check: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    /// AKLT site tensor (d=3, D=2).
    Aklt,
    /// GHZ site tensor (d=D=2).
    Ghz,
    /// Cluster-state site tensor (d=D=2).
    Cluster,
    /// Cluster-state tensor blocked over two sites (d=4, D=2).
    ClusterBlocked,
    /// |+>|+> on a blocked d=4 site (D=1).
    ProductPlus,
    /// Random MPS site tensor (--d, --bond).
    RandomMps,
    /// Transfer channel of a random MPS tensor in trace-preserving form.
    RandomChannel,
    /// Random dense state (--n sites of dimension --d).
    RandomState,
    /// Ising projector (|01><01| + |10><10|).
    IsingProjector,
    /// Two-site AKLT parent projector.
    AkltProjector,
    /// Random PEPS tensor (--d, --bond).
    RandomPeps,
    /// Two-dimensional GHZ copy tensor (d=D=2).
    GhzPeps,
    /// Z2xZ2 generators X(1) and X(2) on a blocked cluster site.
    ClusterReps,
    /// Z2xZ2 generators exp(i pi Sx), exp(i pi Sz) for spin 1.
    AkltReps,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[arg(value_enum)]
    pub name: ModelName,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub bond: usize,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
}

/// Parses `a..b` (inclusive), `a,b,c`, or a single number.
pub fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("expected `a..b`, `a,b,c` or a number, found `{s}`");
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list("4..7").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(parse_list("4,6").unwrap(), vec![4, 6]);
        assert_eq!(parse_list("5").unwrap(), vec![5]);
        assert!(parse_list("7..4").is_err());
        assert!(parse_list("x").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
