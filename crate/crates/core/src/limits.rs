//! Size caps. Each cap can be overridden through an environment variable,
//! read once per process.

use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest dense state vector (`TNLAB_MAX_STATE`).
    pub max_state: u128,
    /// Largest region map `d^|R| · D^|∂R|` (`TNLAB_MAX_REGION`).
    pub max_region: u128,
    /// Largest many-body Hilbert space for exact diagonalization (`TNLAB_MAX_HILBERT`).
    pub max_hilbert: u128,
    /// Largest dense tensor built during a network contraction (`TNLAB_MAX_TENSOR`).
    pub max_tensor: u128,
    /// Largest dense site tensor of a detectability-lemma MPO (`TNLAB_MAX_MPO_SITE`).
    pub max_mpo_site: u128,
    /// Largest Hilbert space where eigenproblems are solved densely (`TNLAB_DENSE_EIG`).
    pub dense_eig: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_state: 1 << 22,
            max_region: 1 << 26,
            max_hilbert: 1 << 26,
            max_tensor: 1 << 26,
            max_mpo_site: 1 << 24,
            dense_eig: 512,
        }
    }
}

fn env_u128(key: &str, default: u128) -> u128 {
    std::env::var(key).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(default)
}

impl Limits {
    pub fn from_env() -> Self {
        let d = Limits::default();
        Limits {
            max_state: env_u128("TNLAB_MAX_STATE", d.max_state),
            max_region: env_u128("TNLAB_MAX_REGION", d.max_region),
            max_hilbert: env_u128("TNLAB_MAX_HILBERT", d.max_hilbert),
            max_tensor: env_u128("TNLAB_MAX_TENSOR", d.max_tensor),
            max_mpo_site: env_u128("TNLAB_MAX_MPO_SITE", d.max_mpo_site),
            dense_eig: env_u128("TNLAB_DENSE_EIG", d.dense_eig as u128) as usize,
        }
    }
}

static LIMITS: OnceLock<Limits> = OnceLock::new();

/// Installs limits before first use; returns `false` if they were already
/// fixed.
pub fn set_limits(l: Limits) -> bool {
    LIMITS.set(l).is_ok()
}

/// Process-wide limits (defaults plus environment overrides).
pub fn limits() -> &'static Limits {
    LIMITS.get_or_init(Limits::from_env)
}
