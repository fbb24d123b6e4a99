//! Heavy-tailed p-value combination tests under multivariate regularly
//! varying (MRV) copula dependence.
//!
//! The crate is organised bottom-up:
//!
//! - [`distributions`]: special functions (normal and Student t quantiles,
//!   regularized incomplete beta) and random samplers.
//! - [`transforms`]: regularly varying transformation distributions and the
//!   combination statistic `p -> X -> mean(X) -> combined p-value`, together
//!   with the weighted Bonferroni baseline.
//! - [`copulas`]: samplers for dependent null p-value vectors and Kendall tau
//!   parameterizations.
//! - [`theory`]: stable tail dependence functions, spectral measures and the
//!   closed-form limits of the scaled type-I error and Bonferroni ratios.
//! - [`simlab`]: the deterministic, chunked Monte Carlo engine for type-I
//!   error and power sweeps.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod copulas;
pub mod distributions;
mod error;
pub mod simlab;
pub mod theory;
pub mod transforms;

pub use copulas::{CopulaFamily, CopulaModel, CorrelationMatrix};
pub use distributions::{StudentT, UnivariateDist};
pub use error::{Error, Result};
pub use simlab::{
    AlternativeSpec, CellOutcome, CellResult, CopulaCell, ExperimentConfig, RunOptions, SimRng,
};
pub use theory::{ConvexOrder, EllSpec, SpectralDiagnostics, SpectralKind, SpectralMeasure};
pub use transforms::{TailTransform, TransformSpec, WeightVector};
