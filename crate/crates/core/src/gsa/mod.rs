//! Global sensitivity analysis of the system EROI with polynomial chaos.
//!
//! The workflow has two stages: an order-1 surrogate over every uncertain
//! parameter screens out the negligible ones ([`screen_first_order`]), then
//! an order-2 surrogate over the shortlist yields total-order Sobol indices,
//! moments and a Monte Carlo pdf ([`analyze_second_order`], [`pdf_estimate`]).

mod analysis;
mod params;
mod pce;
mod sampling;

use thiserror::Error;

pub use analysis::{
    analyze_second_order, coefficient_of_variation, evaluate_batch, pdf_estimate, screen_first_order, DesignMatrix,
    EvalFailure, PdfEstimate, ScreeningReport, SobolReport, Study, MAX_FAILED_FRACTION,
};
pub use params::{Entity, ParamKind, ParamPath, UncertainParameter};
pub use pce::{
    basis_size, fit_pce, legendre_orthonormal, moments, sobol_total, total_degree_basis, Moments, MultiIndex,
    PceSurrogate,
};
pub use sampling::{default_sample_count, latin_hypercube};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GsaError {
    #[error("malformed parameter path `{0}`")]
    BadPath(String),
    #[error("unknown parameter kind `{0}`")]
    BadKind(String),
    #[error("invalid range [{lo}, {hi}] for `{path}`")]
    BadRange { path: String, lo: f64, hi: f64 },
    #[error("`{0}` does not match any model entity")]
    UnknownTarget(String),
    #[error("`{0}` has no finite nominal value to perturb")]
    NoNominal(String),
    #[error("input {0} has an empty range")]
    DegenerateInput(usize),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("design matrix is rank deficient (singular value ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },
    #[error("surrogate variance is zero")]
    ZeroVariance,
    #[error("{failed} of {total} design rows failed, above the 5% tolerance")]
    TooManyFailures { failed: usize, total: usize },
    #[error("no uncertain parameters")]
    NoParameters,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}
