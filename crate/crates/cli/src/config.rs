//! JSON sweep configuration.
//!
//! ```json
//! {
//!   "experiment": "fig1_desk",
//!   "n": 5,
//!   "copula": { "family": "clayton", "tau_grid": [0.05, 0.2, 0.35] },
//!   "transforms": [{ "family": "trunc_t", "nu": 0.6, "trunc_q": 0.001 }],
//!   "weights": [1, 1, 1, 1, 1],
//!   "alphas": [0.005],
//!   "reps": 1000000,
//!   "seed": 20240601,
//!   "chunk": 65536,
//!   "alternative": { "type": "type_a", "mu": 1.2, "layout": "dense" },
//!   "outputs": { "csv": "fig1_desk.csv", "svg": "fig1_desk.svg" }
//! }
//! ```

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use tailfuse_core::copulas::CopulaFamily;
use tailfuse_core::simlab::{
    calibrate_signal, CalibrationSpec, SignalKind, SignalLayout, DEFAULT_CHUNK,
};
use tailfuse_core::transforms::DEFAULT_TRUNCATION;
use tailfuse_core::{
    AlternativeSpec, CopulaCell, CopulaModel, CorrelationMatrix, Error, ExperimentConfig,
    RunOptions, TransformSpec, WeightVector,
};

const DEFAULT_T_NU: f64 = 5.0;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub experiment: Option<String>,
    pub n: usize,
    pub copula: CopulaSection,
    pub transforms: Vec<TransformEntry>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub reps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub chunk: Option<u64>,
    #[serde(default)]
    pub alternative: Option<AlternativeSection>,
    #[serde(default = "default_true")]
    pub bonferroni: bool,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaSection {
    pub family: String,
    #[serde(default)]
    pub tau_grid: Option<Vec<f64>>,
    /// Clayton `theta` or elliptical `rho` values, instead of a tau grid.
    #[serde(default)]
    pub params: Option<Vec<f64>>,
    /// Degrees of freedom of the t copula.
    #[serde(default)]
    pub nu: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformEntry {
    pub family: String,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub trunc_q: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Signal {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternativeSection {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub mu: Option<Signal>,
    #[serde(default)]
    pub beta: Option<Signal>,
    #[serde(default)]
    pub layout: Option<String>,
    /// Replace the signal strength by one calibrated to a target power.
    #[serde(default)]
    pub calibrate: Option<CalibrateSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSection {
    pub target_power: f64,
    pub tau: f64,
    pub transform: String,
    pub alpha: f64,
    #[serde(default = "default_pilot")]
    pub pilot_reps: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_pilot() -> u64 {
    100_000
}

fn default_tolerance() -> f64 {
    0.01
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub svg: Option<String>,
}

pub fn load(path: &Path) -> Result<ConfigFile> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text).with_context(|| format!("invalid config {}", path.display()))
}

pub fn parse(text: &str) -> Result<ConfigFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    Ok(serde_path_to_error::deserialize(de)?)
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Validation(msg.into()).into())
}

impl TransformEntry {
    fn spec(&self, i: usize) -> Result<TransformSpec> {
        let q0 = self.trunc_q.unwrap_or(DEFAULT_TRUNCATION);
        let field = |name: &str, v: Option<f64>| -> Result<f64> {
            match v {
                Some(v) => Ok(v),
                None => invalid(format!(
                    "transforms[{i}].{name} is required for family {}",
                    self.family
                )),
            }
        };
        let spec = match self.family.as_str() {
            "pareto" => TransformSpec::Pareto {
                gamma: field("gamma", self.gamma)?,
            },
            "cauchy" => TransformSpec::Cauchy,
            "trunc_cauchy" => TransformSpec::TruncatedCauchy { q0 },
            "trunc_t" => {
                let nu = match (self.nu, self.gamma) {
                    (Some(nu), Some(g)) if nu != g => {
                        return invalid(format!(
                            "transforms[{i}]: nu = {nu} and gamma = {g} disagree (the tail index of t is nu)"
                        ))
                    }
                    (Some(nu), _) | (None, Some(nu)) => nu,
                    (None, None) => return invalid(format!("transforms[{i}].nu is required for family trunc_t")),
                };
                TransformSpec::TruncatedT { nu, q0 }
            }
            other => {
                return invalid(format!(
                    "transforms[{i}].family: unknown family {other:?} (expected pareto, cauchy, trunc_cauchy or trunc_t)"
                ))
            }
        };
        tailfuse_core::TailTransform::new(spec)
            .map_err(|e| Error::Validation(format!("transforms[{i}]: {e}")))?;
        Ok(spec)
    }
}

fn family(section: &CopulaSection) -> Result<Option<CopulaFamily>> {
    Ok(match section.family.as_str() {
        "clayton" => Some(CopulaFamily::Clayton),
        "t" => Some(CopulaFamily::StudentT {
            nu: section.nu.unwrap_or(DEFAULT_T_NU),
        }),
        "gaussian" => Some(CopulaFamily::Gaussian),
        "independence" | "comonotone" => None,
        other => {
            return invalid(format!(
                "copula.family: unknown family {other:?} (expected clayton, t, gaussian, independence or comonotone)"
            ))
        }
    })
}

fn copula_cells(section: &CopulaSection, n: usize) -> Result<Vec<CopulaCell>> {
    let fam = family(section)?;
    if section.nu.is_some() && section.family != "t" {
        return invalid("copula.nu only applies to the t family");
    }
    let Some(fam) = fam else {
        if section.tau_grid.is_some() || section.params.is_some() {
            return invalid(format!(
                "copula.{}: takes no tau_grid or params",
                section.family
            ));
        }
        let model = if section.family == "independence" {
            CopulaModel::independence(n)?
        } else {
            CopulaModel::comonotone(n)?
        };
        return Ok(vec![CopulaCell::from_model(model)]);
    };
    match (&section.tau_grid, &section.params) {
        (Some(_), Some(_)) => invalid("copula: give either tau_grid or params, not both"),
        (None, None) => invalid("copula: one of tau_grid or params is required"),
        (Some(taus), None) => {
            if taus.is_empty() {
                return invalid("copula.tau_grid is empty");
            }
            taus.iter()
                .enumerate()
                .map(|(i, &tau)| {
                    if !(0.0..=1.0).contains(&tau) {
                        return invalid(format!("copula.tau_grid[{i}] = {tau} outside [0, 1]"));
                    }
                    CopulaCell::from_tau(fam, n, tau)
                        .map_err(|e| Error::Validation(format!("copula.tau_grid[{i}]: {e}")).into())
                })
                .collect()
        }
        (None, Some(params)) => {
            if params.is_empty() {
                return invalid("copula.params is empty");
            }
            params
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    param_cell(fam, n, p)
                        .map_err(|e| Error::Validation(format!("copula.params[{i}]: {e}")).into())
                })
                .collect()
        }
    }
}

fn param_cell(fam: CopulaFamily, n: usize, p: f64) -> tailfuse_core::Result<CopulaCell> {
    let (model, tau) = match fam {
        CopulaFamily::Clayton => (CopulaModel::clayton(p, n)?, p / (p + 2.0)),
        CopulaFamily::StudentT { nu } => (
            CopulaModel::student_t(nu, CorrelationMatrix::equicorrelated(n, p)?)?,
            2.0 * p.asin() / std::f64::consts::PI,
        ),
        CopulaFamily::Gaussian => (
            CopulaModel::gaussian(CorrelationMatrix::equicorrelated(n, p)?),
            2.0 * p.asin() / std::f64::consts::PI,
        ),
    };
    Ok(CopulaCell {
        family: fam.name().to_string(),
        param: Some(p),
        tau: Some(tau),
        model,
    })
}

fn signal(
    sig: &Option<Signal>,
    name: &str,
    n: usize,
    layout: SignalLayout,
    kind: SignalKind,
) -> Result<AlternativeSpec> {
    match sig {
        None => invalid(format!("alternative.{name} is required")),
        Some(Signal::Scalar(s)) => Ok(match kind {
            SignalKind::TypeA => AlternativeSpec::type_a(layout, n, *s),
            SignalKind::TypeB => AlternativeSpec::type_b(layout, n, *s),
        }),
        Some(Signal::Vector(v)) => Ok(match kind {
            SignalKind::TypeA => AlternativeSpec::TypeA { mu: v.clone() },
            SignalKind::TypeB => AlternativeSpec::TypeB { beta: v.clone() },
        }),
    }
}

/// The alternative of a config, before any calibration.
fn alternative(
    section: &Option<AlternativeSection>,
    n: usize,
) -> Result<(AlternativeSpec, Option<(SignalKind, SignalLayout)>)> {
    let Some(alt) = section else {
        return Ok((AlternativeSpec::Null, None));
    };
    let layout: SignalLayout = match alt.layout.as_deref() {
        None => SignalLayout::Dense,
        Some(s) => s
            .parse()
            .map_err(|e: Error| Error::Validation(format!("alternative.layout: {e}")))?,
    };
    let kind = match alt.kind.as_str() {
        "null" => {
            if alt.mu.is_some() || alt.beta.is_some() || alt.calibrate.is_some() {
                return invalid("alternative: the null alternative takes no signal");
            }
            return Ok((AlternativeSpec::Null, None));
        }
        "type_a" => SignalKind::TypeA,
        "type_b" => SignalKind::TypeB,
        other => {
            return invalid(format!(
                "alternative.type: unknown type {other:?} (expected null, type_a or type_b)"
            ))
        }
    };
    let spec = if alt.calibrate.is_some() {
        // Placeholder strength; replaced after calibration.
        match kind {
            SignalKind::TypeA => AlternativeSpec::type_a(layout, n, 0.0),
            SignalKind::TypeB => AlternativeSpec::type_b(layout, n, 1.0),
        }
    } else {
        let (field, other) = match kind {
            SignalKind::TypeA => (&alt.mu, &alt.beta),
            SignalKind::TypeB => (&alt.beta, &alt.mu),
        };
        if other.is_some() {
            return invalid(format!(
                "alternative: {} takes only {}",
                alt.kind,
                if kind == SignalKind::TypeA {
                    "mu"
                } else {
                    "beta"
                }
            ));
        }
        signal(
            field,
            if kind == SignalKind::TypeA {
                "mu"
            } else {
                "beta"
            },
            n,
            layout,
            kind,
        )?
    };
    spec.validate(n)
        .map_err(|e| Error::Validation(format!("alternative: {e}")))?;
    Ok((spec, Some((kind, layout))))
}

/// A validated sweep, plus the calibration step if one was requested.
#[derive(Debug)]
pub struct Sweep {
    pub config: ExperimentConfig,
    pub outputs: Outputs,
    calibration: Option<(
        CalibrateSection,
        SignalKind,
        SignalLayout,
        Option<CopulaFamily>,
    )>,
}

impl ConfigFile {
    pub fn into_sweep(self, seed_override: Option<u64>) -> Result<Sweep> {
        if self.n == 0 {
            return invalid("n must be at least 1");
        }
        let copulas = copula_cells(&self.copula, self.n)?;
        if self.transforms.is_empty() {
            return invalid("transforms is empty");
        }
        let transforms = self
            .transforms
            .iter()
            .enumerate()
            .map(|(i, t)| t.spec(i))
            .collect::<Result<Vec<_>>>()?;
        let weights = match self.weights {
            None => WeightVector::uniform(self.n),
            Some(w) => {
                if w.len() != self.n {
                    return invalid(format!(
                        "weights has {} entries, expected n = {}",
                        w.len(),
                        self.n
                    ));
                }
                WeightVector::new(w).map_err(|e| Error::Validation(format!("weights: {e}")))?
            }
        };
        if self.alphas.is_empty() {
            return invalid("alphas is empty");
        }
        if let Some((i, a)) = self
            .alphas
            .iter()
            .enumerate()
            .find(|(_, a)| !(**a > 0.0 && **a < 1.0))
        {
            return invalid(format!("alphas[{i}] = {a} outside (0, 1)"));
        }
        if self.reps == 0 {
            return invalid("reps must be at least 1");
        }
        if self.chunk == Some(0) {
            return invalid("chunk must be at least 1");
        }
        let (alt, signal) = alternative(&self.alternative, self.n)?;
        let calibration = match (self.alternative.and_then(|a| a.calibrate), signal) {
            (Some(c), Some((kind, layout))) => {
                if !(c.target_power > 0.0 && c.target_power < 1.0) {
                    return invalid("alternative.calibrate.target_power must lie in (0, 1)");
                }
                if !(c.alpha > 0.0 && c.alpha < 1.0) {
                    return invalid("alternative.calibrate.alpha must lie in (0, 1)");
                }
                if !(c.tau >= 0.0 && c.tau <= 1.0) {
                    return invalid("alternative.calibrate.tau must lie in [0, 1]");
                }
                c.transform.parse::<TransformSpec>().map_err(|e| {
                    Error::Validation(format!("alternative.calibrate.transform: {e}"))
                })?;
                Some((c, kind, layout, family(&self.copula)?))
            }
            _ => None,
        };
        let experiment = self.experiment.unwrap_or_else(|| alt.name().to_string());
        let config = ExperimentConfig {
            experiment,
            n: self.n,
            copulas,
            transforms,
            weights,
            alphas: self.alphas,
            reps: self.reps,
            seed: seed_override.unwrap_or(self.seed),
            chunk: self.chunk.unwrap_or(DEFAULT_CHUNK),
            alternative: alt,
            bonferroni: self.bonferroni,
        };
        config.validate()?;
        Ok(Sweep {
            config,
            outputs: self.outputs,
            calibration,
        })
    }
}

impl Sweep {
    /// Runs the requested calibration, if any, and fixes the signal strength.
    pub fn calibrate(&mut self, opts: &RunOptions) -> Result<Option<f64>> {
        let Some((c, kind, layout, fam)) = &self.calibration else {
            return Ok(None);
        };
        let n = self.config.n;
        let copula = match fam {
            Some(f) => CopulaModel::from_tau(*f, n, c.tau)?,
            None => self.config.copulas[0].model.clone(),
        };
        let spec = CalibrationSpec {
            copula,
            transform: c.transform.parse()?,
            weights: self.config.weights.clone(),
            alpha: c.alpha,
            kind: *kind,
            layout: *layout,
            target_power: c.target_power,
            tolerance: c.tolerance,
            pilot_reps: c.pilot_reps,
            seed: self.config.seed,
        };
        let cal = calibrate_signal(&spec, opts)?;
        log::info!(
            "calibrated signal strength {} (pilot power {} after {} evaluations)",
            cal.strength,
            cal.power,
            cal.evaluations
        );
        self.config.alternative = spec.alternative(cal.strength);
        Ok(Some(cal.strength))
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("not a number: {x:?}")).into())
        })
        .collect()
}

pub fn require_mode_matches(config: &ExperimentConfig, power: bool) -> Result<()> {
    match (power, config.alternative.is_null()) {
        (true, true) => bail!(Error::Validation(
            "mode power needs a type_a or type_b alternative in the config".into()
        )),
        (false, false) => bail!(Error::Validation(format!(
            "mode null needs the null alternative, config has {}",
            config.alternative.name()
        ))),
        _ => Ok(()),
    }
}
