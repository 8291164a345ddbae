//! Squeezing-extended quasi-probability distributions (SEQPD) of two-mode
//! Gaussian states and the CHSH tests built on them.
//!
//! - [`gaussian`]: covariance matrices, closed-form SEQPDs, purity.
//! - [`bell`]: the CHSH functional, including lossy detection.
//! - [`optimize`]: multi-start simplex maximization and parameter sweeps.
//! - [`fock`]: truncated Fock-space oracle for the closed forms.

pub mod bell;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod optimize;

pub use bell::{
    chsh_squeeze_only, chsh_value, efficiency_map, BellResult, Branch, DetectorModel,
    MeasurementSetting, SettingsQuad,
};
pub use error::{Error, Result};
pub use gaussian::{
    make_tmsts, purity, seqpd_origin, seqpd_single_mode, seqpd_two_mode, symplectic_rotation,
    symplectic_squeeze, CovarianceMatrix4, LocalSqueeze, OrderParameter, Party, PhasePoint,
    TmstsSpec,
};
pub use optimize::{maximize_chsh, sweep_eta, sweep_r, OptResult, OptimizerConfig, Scheme, SchemeTag};
