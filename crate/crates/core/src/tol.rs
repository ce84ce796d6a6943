//! Numerical tolerances shared by every module.
//!
//! All rank decisions go through [`rank_cutoff`]; everything else is a fixed
//! absolute or relative tolerance listed here so tests and library agree.

/// Relative factor in the numerical-rank rule `σ_k > max(dims)·σ_max·RANK_EPS`.
pub const RANK_EPS: f64 = 1e-12;

/// Dense reconstruction (Schmidt / MPS round trips, unit trace checks).
pub const RECONSTRUCTION: f64 = 1e-10;

/// Residual for gauge solutions `B = Y⁻¹AY`.
pub const GAUGE_RESIDUAL: f64 = 1e-8;

/// Trace-preservation `Σ A†A = 1`.
pub const TRACE_PRESERVING: f64 = 1e-10;

/// Column sums of stochastic matrices.
pub const STOCHASTIC: f64 = 1e-12;

/// Absolute tolerance on eigenvalue moduli in the peripheral spectrum.
pub const PERIPHERAL: f64 = 1e-8;

/// Moduli in `[1 - PERIPHERAL_BORDERLINE, 1 - PERIPHERAL)` cannot be told apart
/// from peripheral eigenvalues and make the primitivity test indeterminate.
pub const PERIPHERAL_BORDERLINE: f64 = 1e-6;

/// A pair `(u, v)` whose objective `Σ_w |u† w v|²` drops below this is a
/// witness of a zero pair.
pub const ZERO_PAIR_WITNESS: f64 = 1e-9;

/// Minimum objective certifying that no zero pair exists.
pub const ZERO_FREE_CERTIFICATE: f64 = 1e-6;

/// Restarts of the alternating zero-pair search.
pub const ZERO_PAIR_RESTARTS: usize = 64;

/// Ground-state degeneracy window on eigenvalues.
pub const DEGENERACY: f64 = 1e-8;

/// Residual norm at which the Krylov eigensolver stops.
pub const EIGEN_RESIDUAL: f64 = 1e-10;

/// Projector and hermiticity checks.
pub const PROJECTOR: f64 = 1e-10;

/// Symmetry checks on dense states.
pub const SYMMETRY: f64 = 1e-8;

/// Unitarity of virtual symmetry operators.
pub const UNITARITY: f64 = 1e-9;

/// Numerical rank cutoff for a matrix with the given shape and largest
/// singular value.
pub fn rank_cutoff(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * sigma_max * RANK_EPS
}

/// Number of singular values above the shared cutoff. `singular_values`
/// must be sorted non-increasing.
pub fn numerical_rank(rows: usize, cols: usize, singular_values: &[f64]) -> usize {
    let Some(&smax) = singular_values.first() else {
        return 0;
    };
    if smax <= 0.0 {
        return 0;
    }
    let cut = rank_cutoff(rows, cols, smax);
    singular_values.iter().take_while(|&&s| s > cut).count()
}
