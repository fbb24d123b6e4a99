use crate::copulas::{dependence_from_tau, CopulaFamily, CopulaModel};
use crate::error::{Error, Result};
use crate::transforms::{TransformSpec, WeightVector};

use super::alternatives::AlternativeSpec;

/// Default number of replications per chunk.
pub const DEFAULT_CHUNK: u64 = 1 << 16;

/// One point of the copula grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaCell {
    /// Family label written to output (`clayton`, `t`, `gaussian`, ...).
    pub family: String,
    /// Clayton `theta` or elliptical `rho`; `None` when the model has no
    /// scalar parameter.
    pub param: Option<f64>,
    pub tau: Option<f64>,
    pub model: CopulaModel,
}

impl CopulaCell {
    /// Cell with pairwise Kendall tau `tau`. The endpoints 0 and 1 map to the
    /// independence and comonotone models but keep the family label.
    pub fn from_tau(family: CopulaFamily, n: usize, tau: f64) -> Result<Self> {
        let model = CopulaModel::from_tau(family, n, tau)?;
        let param = if tau > 0.0 && tau < 1.0 {
            Some(dependence_from_tau(family, tau)?)
        } else {
            None
        };
        Ok(Self {
            family: family.name().to_string(),
            param,
            tau: Some(tau),
            model,
        })
    }

    pub fn from_model(model: CopulaModel) -> Self {
        let param = match &model {
            CopulaModel::SurvClayton(c) => Some(c.theta()),
            _ => None,
        };
        let tau = match &model {
            CopulaModel::Independence(_) => Some(0.0),
            CopulaModel::Comonotone(_) => Some(1.0),
            CopulaModel::SurvClayton(c) => Some(c.theta() / (c.theta() + 2.0)),
            _ => None,
        };
        Self {
            family: model.name().to_string(),
            param,
            tau,
            model,
        }
    }
}

/// A sweep: copula grid x transform grid x alpha grid under one alternative.
///
/// Within a copula cell every transform, every alpha and the Bonferroni
/// baseline are evaluated on the same simulated p-vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: usize,
    pub copulas: Vec<CopulaCell>,
    pub transforms: Vec<TransformSpec>,
    pub weights: WeightVector,
    pub alphas: Vec<f64>,
    /// Replications per copula cell.
    pub reps: u64,
    pub seed: u64,
    pub chunk: u64,
    pub alternative: AlternativeSpec,
    pub bonferroni: bool,
}

impl ExperimentConfig {
    /// Null sweep with uniform weights and default chunking.
    pub fn null(
        n: usize,
        copulas: Vec<CopulaCell>,
        transforms: Vec<TransformSpec>,
        alphas: Vec<f64>,
        reps: u64,
        seed: u64,
    ) -> Self {
        Self {
            experiment: "null".into(),
            n,
            copulas,
            transforms,
            weights: WeightVector::uniform(n),
            alphas,
            reps,
            seed,
            chunk: DEFAULT_CHUNK,
            alternative: AlternativeSpec::Null,
            bonferroni: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::Validation(msg));
        if self.n == 0 {
            return invalid("n must be at least 1".into());
        }
        if self.copulas.is_empty() {
            return invalid("copula grid is empty".into());
        }
        if let Some(c) = self.copulas.iter().find(|c| c.model.dim() != self.n) {
            return invalid(format!(
                "copula {} has dimension {}, expected n = {}",
                c.family,
                c.model.dim(),
                self.n
            ));
        }
        if self.transforms.is_empty() {
            return invalid("transform list is empty".into());
        }
        if self.weights.len() != self.n {
            return invalid(format!("{} weights for n = {}", self.weights.len(), self.n));
        }
        if self.alphas.is_empty() {
            return invalid("alpha list is empty".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return invalid(format!("alpha {a} must lie in (0, 1)"));
        }
        if self.reps == 0 {
            return invalid("reps must be at least 1".into());
        }
        if self.chunk == 0 {
            return invalid("chunk must be at least 1".into());
        }
        self.alternative.validate(self.n)
    }
}
