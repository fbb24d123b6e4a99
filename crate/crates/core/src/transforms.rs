//! Transformation distributions with regularly varying right tails and the
//! heavy-tailed combination statistic built on them.
//!
//! A p-value `p` with weight `w` is mapped to `X = Q_F((1 - p/w)^+)`, the
//! transformed values are averaged, and the average is turned back into a
//! combined p-value by `min(1, n^(1-gamma) * Fbar(mean))`. All maps are
//! evaluated through the survival function and its inverse so that very small
//! p-values keep their relative precision.

use std::fmt;
use std::str::FromStr;

use crate::distributions::{cauchy_cdf, cauchy_isf, cauchy_sf, StudentT, TIsfTable};
use crate::error::{domain, Error, Result};

/// Lower truncation probability used when none is given.
pub const DEFAULT_TRUNCATION: f64 = 0.001;

/// Parameterization of a transformation distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformSpec {
    /// Pareto on `[1, inf)` with survival `x^(-gamma)`.
    Pareto { gamma: f64 },
    /// Standard Cauchy; left-unbounded, kept as the classical reference.
    Cauchy,
    /// Standard Cauchy truncated below its `q0` quantile.
    TruncatedCauchy { q0: f64 },
    /// Student t with `nu` degrees of freedom truncated below its `q0`
    /// quantile. Its tail index is `nu`.
    TruncatedT { nu: f64, q0: f64 },
}

impl TransformSpec {
    pub fn tail_index(&self) -> f64 {
        match *self {
            TransformSpec::Pareto { gamma } => gamma,
            TransformSpec::Cauchy | TransformSpec::TruncatedCauchy { .. } => 1.0,
            TransformSpec::TruncatedT { nu, .. } => nu,
        }
    }

    /// Short family name used in CSV output and on the command line.
    pub fn family(&self) -> &'static str {
        match self {
            TransformSpec::Pareto { .. } => "pareto",
            TransformSpec::Cauchy => "cauchy",
            TransformSpec::TruncatedCauchy { .. } => "trunc_cauchy",
            TransformSpec::TruncatedT { .. } => "trunc_t",
        }
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TransformSpec::Pareto { gamma } => write!(f, "pareto:{gamma}"),
            TransformSpec::Cauchy => write!(f, "cauchy"),
            TransformSpec::TruncatedCauchy { q0 } => write!(f, "trunc_cauchy:{q0}"),
            TransformSpec::TruncatedT { nu, q0 } => write!(f, "trunc_t:{nu}:{q0}"),
        }
    }
}

/// Parses `FAMILY[:PARAMS]`, e.g. `pareto:1`, `cauchy`, `trunc_cauchy:0.001`,
/// `trunc_t:0.6` or `trunc_t:0.6:0.001`.
impl FromStr for TransformSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let family = parts.next().unwrap_or_default().to_ascii_lowercase();
        let params: Vec<f64> = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Usage(format!("bad transform parameter {p:?} in {s:?}")))
            })
            .collect::<Result<_>>()?;
        let arity = |lo: usize, hi: usize| {
            if params.len() < lo || params.len() > hi {
                Err(Error::Usage(format!(
                    "transform {family:?} takes {lo}..={hi} parameters, got {}",
                    params.len()
                )))
            } else {
                Ok(())
            }
        };
        let spec = match family.as_str() {
            "pareto" => {
                arity(1, 1)?;
                TransformSpec::Pareto { gamma: params[0] }
            }
            "cauchy" => {
                arity(0, 0)?;
                TransformSpec::Cauchy
            }
            "trunc_cauchy" | "truncated_cauchy" => {
                arity(0, 1)?;
                TransformSpec::TruncatedCauchy {
                    q0: params.first().copied().unwrap_or(DEFAULT_TRUNCATION),
                }
            }
            "trunc_t" | "truncated_t" => {
                arity(1, 2)?;
                TransformSpec::TruncatedT {
                    nu: params[0],
                    q0: params.get(1).copied().unwrap_or(DEFAULT_TRUNCATION),
                }
            }
            other => return Err(Error::Usage(format!("unknown transform family {other:?}"))),
        };
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Pareto { gamma: f64 },
    Cauchy,
    TruncCauchy { keep: f64 },
    TruncT { dist: StudentT, keep: f64 },
}

/// A transformation distribution `F` in the left-bounded regularly varying
/// class, with tail index `gamma` and support `[c, inf)`.
///
/// The untruncated Cauchy is the one exception to the left bound; its
/// `left_bound` is reported as `-f64::MAX`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailTransform {
    spec: TransformSpec,
    kind: Kind,
    tail_index: f64,
    left_bound: f64,
}

fn check_truncation(q0: f64) -> Result<()> {
    if q0 > 0.0 && q0 < 1.0 {
        Ok(())
    } else {
        Err(Error::Construction(format!(
            "truncation probability must lie in (0, 1), got {q0}"
        )))
    }
}

impl TailTransform {
    pub fn new(spec: TransformSpec) -> Result<Self> {
        let (kind, left_bound) = match spec {
            TransformSpec::Pareto { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::Construction(format!(
                        "pareto tail index must be positive, got {gamma}"
                    )));
                }
                (Kind::Pareto { gamma }, 1.0)
            }
            TransformSpec::Cauchy => (Kind::Cauchy, -f64::MAX),
            TransformSpec::TruncatedCauchy { q0 } => {
                check_truncation(q0)?;
                let keep = 1.0 - q0;
                (Kind::TruncCauchy { keep }, cauchy_isf(keep))
            }
            TransformSpec::TruncatedT { nu, q0 } => {
                check_truncation(q0)?;
                let dist = StudentT::new(nu).map_err(|e| Error::Construction(e.to_string()))?;
                let keep = 1.0 - q0;
                (Kind::TruncT { dist, keep }, dist.isf(keep))
            }
        };
        Ok(Self {
            spec,
            kind,
            tail_index: spec.tail_index(),
            left_bound,
        })
    }

    pub fn spec(&self) -> TransformSpec {
        self.spec
    }

    pub fn tail_index(&self) -> f64 {
        self.tail_index
    }

    pub fn left_bound(&self) -> f64 {
        self.left_bound
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.left_bound {
            return 0.0;
        }
        match self.kind {
            Kind::Pareto { gamma } => -(-gamma * x.ln()).exp_m1(),
            Kind::Cauchy => cauchy_cdf(x),
            Kind::TruncCauchy { keep } => ((cauchy_cdf(x) - (1.0 - keep)) / keep).clamp(0.0, 1.0),
            Kind::TruncT { dist, keep } => ((dist.cdf(x) - (1.0 - keep)) / keep).clamp(0.0, 1.0),
        }
    }

    /// Survival function `Fbar(x) = 1 - F(x)`.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.left_bound {
            return 1.0;
        }
        match self.kind {
            Kind::Pareto { gamma } => (-gamma * x.ln()).exp(),
            Kind::Cauchy => cauchy_sf(x),
            Kind::TruncCauchy { keep } => (cauchy_sf(x) / keep).min(1.0),
            Kind::TruncT { dist, keep } => (dist.sf(x) / keep).min(1.0),
        }
    }

    /// Inverse survival function, `Q_F(1 - s)`, for `s` in `[0, 1]`.
    ///
    /// `s = 0` saturates at `f64::MAX`; `s >= 1` returns the left bound.
    pub fn inverse_survival(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return f64::MAX;
        }
        if s >= 1.0 {
            return self.left_bound;
        }
        let x = match self.kind {
            Kind::Pareto { gamma } => (-s.ln() / gamma).exp(),
            Kind::Cauchy => cauchy_isf(s),
            Kind::TruncCauchy { keep } => cauchy_isf(keep * s),
            Kind::TruncT { dist, keep } => dist.isf(keep * s),
        };
        x.clamp(self.left_bound, f64::MAX)
    }

    /// Quantile function `Q_F(u)` for `u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.inverse_survival(1.0 - u)
    }
}

/// Positive weights normalized to sum to their count.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    /// Builds a weight vector, rescaling it so that the weights sum to `n`.
    /// A warning is logged if the input sum is off by more than `1e-6`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Construction("weight vector is empty".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0 && w.is_finite()))
        {
            return Err(Error::Construction(format!(
                "weight {i} must be positive and finite, got {w}"
            )));
        }
        let n = weights.len() as f64;
        let sum: f64 = weights.iter().sum();
        if (sum - n).abs() > 1e-6 {
            log::warn!("weights sum to {sum}, rescaling to {n}");
        }
        let scale = n / sum;
        Ok(Self(weights.into_iter().map(|w| w * scale).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `X = Q_F((1 - p/w)^+)`. Returns the left bound when `p >= w` and
/// `f64::MAX` when `p = 0`.
pub fn transform_pvalue(transform: &TailTransform, p: f64, weight: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p) && weight > 0.0);
    transform.inverse_survival(p / weight)
}

/// The average `(1/n) * sum_i Q_F((1 - p_i/w_i)^+)`, without input checks.
pub fn mean_statistic(transform: &TailTransform, pvalues: &[f64], weights: &[f64]) -> f64 {
    let n = pvalues.len() as f64;
    pvalues
        .iter()
        .zip(weights)
        .map(|(&p, &w)| transform_pvalue(transform, p, w) / n)
        .sum()
}

fn check_inputs(pvalues: &[f64], weights: &WeightVector) -> Result<()> {
    if pvalues.len() != weights.len() {
        return Err(Error::Usage(format!(
            "{} p-values but {} weights",
            pvalues.len(),
            weights.len()
        )));
    }
    if pvalues.is_empty() {
        return Err(Error::Usage("no p-values".into()));
    }
    if let Some((i, p)) = pvalues
        .iter()
        .enumerate()
        .find(|(_, p)| !(0.0..=1.0).contains(*p))
    {
        return domain(format!("p-value {i} must lie in [0, 1], got {p}"));
    }
    Ok(())
}

/// Combined p-value of the heavy-tailed combination test.
pub fn combined_pvalue(
    transform: &TailTransform,
    pvalues: &[f64],
    weights: &WeightVector,
) -> Result<f64> {
    check_inputs(pvalues, weights)?;
    if pvalues.contains(&0.0) {
        return Ok(0.0);
    }
    let n = pvalues.len() as f64;
    let xbar = mean_statistic(transform, pvalues, weights.as_slice());
    Ok((n.powf(1.0 - transform.tail_index()) * transform.survival(xbar)).min(1.0))
}

/// Rejection threshold `Q_F(1 - alpha / n^(1-gamma))` for the mean statistic.
pub fn decision_threshold(transform: &TailTransform, n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let gamma = transform.tail_index();
    let level = alpha * (n as f64).powf(gamma - 1.0);
    if level >= 1.0 {
        return Err(Error::DegenerateThreshold {
            alpha,
            n,
            gamma,
            level,
        });
    }
    Ok(transform.inverse_survival(level))
}

/// Decision of the combination test at level `alpha`.
pub fn reject(
    transform: &TailTransform,
    pvalues: &[f64],
    weights: &WeightVector,
    alpha: f64,
) -> Result<bool> {
    check_inputs(pvalues, weights)?;
    let threshold = decision_threshold(transform, pvalues.len(), alpha)?;
    Ok(mean_statistic(transform, pvalues, weights.as_slice()) > threshold)
}

/// Weighted Bonferroni p-value `min(1, n * min_i p_i / w_i)`.
pub fn bonferroni_pvalue(pvalues: &[f64], weights: &WeightVector) -> Result<f64> {
    check_inputs(pvalues, weights)?;
    Ok(bonferroni_unchecked(pvalues, weights.as_slice()))
}

pub(crate) fn bonferroni_unchecked(pvalues: &[f64], weights: &[f64]) -> f64 {
    let n = pvalues.len() as f64;
    let m = pvalues
        .iter()
        .zip(weights)
        .map(|(p, w)| p / w)
        .fold(f64::INFINITY, f64::min);
    (n * m).min(1.0)
}

/// [`mean_statistic`] for simulation loops. Truncated-t transforms go
/// through a tabulated inverse; every decision is certified against the
/// table's error bound and recomputed exactly when it is too close to call,
/// so rejection counts match the exact statistic.
#[derive(Debug, Clone)]
pub(crate) struct FastStatistic {
    transform: TailTransform,
    table: Option<(TIsfTable, f64)>,
}

impl FastStatistic {
    pub(crate) fn new(transform: TailTransform) -> Self {
        let table = match transform.kind {
            Kind::TruncT { dist, keep } => Some((TIsfTable::new(dist), keep)),
            _ => None,
        };
        Self { transform, table }
    }

    /// Returns `xbar > threshold` for the exact statistic, evaluating the
    /// exact statistic only when needed. `xbar` is cached across thresholds
    /// through `state`.
    pub(crate) fn exceeds(
        &self,
        state: &mut FastState,
        pvalues: &[f64],
        weights: &[f64],
        threshold: f64,
    ) -> bool {
        if let FastState::Unset = state {
            *state = self.approximate(pvalues, weights);
        }
        if let FastState::Approx { xbar, bound } = *state {
            if (xbar - threshold).abs() > 2.0 * bound && xbar.is_finite() {
                return xbar > threshold;
            }
            *state = FastState::Exact(mean_statistic(&self.transform, pvalues, weights));
        }
        match *state {
            FastState::Exact(x) => x > threshold,
            _ => unreachable!("state resolved above"),
        }
    }

    fn approximate(&self, pvalues: &[f64], weights: &[f64]) -> FastState {
        let Some((table, keep)) = &self.table else {
            return FastState::Exact(mean_statistic(&self.transform, pvalues, weights));
        };
        let n = pvalues.len() as f64;
        let lo = self.transform.left_bound;
        let (mut sum, mut scale) = (0.0, 0.0);
        for (&p, &w) in pvalues.iter().zip(weights) {
            let s = p / w;
            let x = if s <= 0.0 {
                f64::MAX
            } else if s >= 1.0 {
                lo
            } else {
                table.isf(keep * s).clamp(lo, f64::MAX)
            };
            sum += x / n;
            scale += x.abs().max(1.0) / n;
        }
        // Rounding of the sum itself is far below the table bound.
        FastState::Approx {
            xbar: sum,
            bound: TIsfTable::ERROR_BOUND * scale,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum FastState {
    Unset,
    Approx { xbar: f64, bound: f64 },
    Exact(f64),
}

/// A combination test with its threshold precomputed, for repeated use.
#[derive(Debug, Clone)]
pub struct CombinationTest {
    transform: TailTransform,
    weights: WeightVector,
    alpha: f64,
    threshold: f64,
}

impl CombinationTest {
    pub fn new(transform: TailTransform, weights: WeightVector, alpha: f64) -> Result<Self> {
        let threshold = decision_threshold(&transform, weights.len(), alpha)?;
        Ok(Self {
            transform,
            weights,
            alpha,
            threshold,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Decision for a p-vector of the right length. Inputs are not checked.
    pub fn rejects(&self, pvalues: &[f64]) -> bool {
        mean_statistic(&self.transform, pvalues, self.weights.as_slice()) > self.threshold
    }
}
