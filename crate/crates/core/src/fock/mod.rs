//! Truncated Fock-space oracle.
//!
//! Everything here is built from ladder operators and matrix exponentials of
//! their quadratic generators, with no Gaussian formulas, so it can check
//! [`crate::gaussian`] and [`crate::bell`] independently.
//!
//! Conventions match the closed forms: `x = a + a†`, `p = i(a† − a)`, so the
//! vacuum has unit quadrature variance and a coherent state `|α⟩` has
//! `⟨x⟩ = 2 Re α`.
//!
//! Two-mode states are stored as weighted ensembles of pure vectors, each
//! supported on one photon-difference band `|o_a + l, o_b + l⟩`. Both
//! `S₂(r)` and thermal product states preserve `n_a − n_b`, so this is exact
//! and keeps cutoffs of 100+ per mode cheap. [`TwoModeState::to_dense`]
//! produces the full `N²×N²` density matrix when needed.

mod operator;
mod oracle;
mod single;
mod state;

pub use operator::{annihilation, FockOperator};
pub use oracle::{equivalence_suite, CaseKind, Converged, Oracle, OracleCase, OracleReport, SuiteOptions};
pub use single::{
    displacement_operator, lossy_weights, pi_operator, quadrature_operators, squeeze_operator,
    thermal_fock, PiOperator,
};
pub use state::{tmsts_fock, tmsv_fock, TwoModeState};

/// Per-mode cutoff for single-mode checks.
pub const DEFAULT_SINGLE_CUTOFF: usize = 40;
/// Per-mode cutoff for two-mode checks (a 900-dimensional space).
pub const DEFAULT_TWO_MODE_CUTOFF: usize = 30;
/// Largest per-mode cutoff the oracle will try before giving up.
pub const MAX_CUTOFF: usize = 240;
/// Trace deficit above which a state is flagged as under-resolved.
pub const TRACE_BUDGET: f64 = 1e-8;
/// Two cutoffs agree when expectations differ by less than this.
pub const CONVERGENCE_TOL: f64 = 1e-8;
/// Thermal parameter limit of the mixed-state oracle.
pub const MAX_NU: f64 = 1.5;
/// Two-mode squeezing limit of the oracle.
pub const MAX_R: f64 = 1.2;
/// Fraction of the working basis treated as a guard band.
pub const GUARD_FRACTION: f64 = 0.15;

/// Working dimension used to build single-mode operators that are then
/// truncated to `n`.
pub fn working_dim(n: usize) -> usize {
    2 * n + 40
}
