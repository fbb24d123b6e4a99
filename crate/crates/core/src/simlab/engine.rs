use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::copulas::CopulaModel;
use crate::error::{Error, Result};
use crate::transforms::{
    bonferroni_unchecked, decision_threshold, FastState, FastStatistic, TailTransform,
    TransformSpec, WeightVector,
};

use super::alternatives::{Alternative, AlternativeSpec, SignalLayout};
use super::config::{CopulaCell, ExperimentConfig};
use super::rng::{cell_seed, seed_stream};
use super::wilson::wilson_ci;

/// Confidence level of the reported intervals.
pub const CI_LEVEL: f64 = 0.95;

/// Execution knobs that do not affect results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker count; `None` uses the machine's parallelism.
    pub threads: Option<usize>,
    /// When set, remaining chunks are abandoned and the sweep returns the
    /// cells completed so far.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl RunOptions {
    pub fn with_threads(threads: usize) -> Self {
        Self {
            threads: Some(threads),
            cancel: None,
        }
    }

    fn cancelled(&self) -> bool {
        self.cancel
            .as_ref()
            .is_some_and(|c| c.load(Ordering::Relaxed))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellOutcome {
    Done {
        rejections: u64,
        /// Rejections of the weighted Bonferroni test on the same draws.
        bonf_rejections: Option<u64>,
    },
    Skipped {
        reason: String,
    },
}

/// Result for one (copula, transform, alpha) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub experiment: String,
    pub copula: String,
    pub param: Option<f64>,
    pub tau: Option<f64>,
    pub n: usize,
    pub transform: TransformSpec,
    pub gamma: f64,
    pub alpha: f64,
    pub reps: u64,
    pub seed: u64,
    /// Whether the sweep ran under the null; estimates are then scaled by
    /// `1/alpha`.
    pub null: bool,
    pub outcome: CellOutcome,
}

impl CellResult {
    pub fn rejections(&self) -> Option<u64> {
        match self.outcome {
            CellOutcome::Done { rejections, .. } => Some(rejections),
            CellOutcome::Skipped { .. } => None,
        }
    }

    pub fn bonf_rejections(&self) -> Option<u64> {
        match self.outcome {
            CellOutcome::Done {
                bonf_rejections, ..
            } => bonf_rejections,
            CellOutcome::Skipped { .. } => None,
        }
    }

    pub fn rate(&self) -> Option<f64> {
        self.rejections().map(|k| k as f64 / self.reps as f64)
    }

    pub fn bonf_rate(&self) -> Option<f64> {
        self.bonf_rejections().map(|k| k as f64 / self.reps as f64)
    }

    fn scale(&self) -> f64 {
        if self.null {
            1.0 / self.alpha
        } else {
            1.0
        }
    }

    /// Scaled type-I error under the null, power otherwise.
    pub fn estimate(&self) -> Option<f64> {
        self.rate().map(|r| r * self.scale())
    }

    /// Wilson interval for [`estimate`](Self::estimate).
    pub fn ci(&self) -> Option<(f64, f64)> {
        let k = self.rejections()?;
        let (lo, hi) = wilson_ci(k, self.reps, CI_LEVEL);
        Some((lo * self.scale(), hi * self.scale()))
    }

    /// Binomial standard error of [`estimate`](Self::estimate).
    pub fn std_error(&self) -> Option<f64> {
        let r = self.rate()?;
        Some((r * (1.0 - r) / self.reps as f64).sqrt() * self.scale())
    }

    /// Combination over Bonferroni rejection ratio.
    pub fn ratio(&self) -> Option<f64> {
        let b = self.bonf_rejections()?;
        (b > 0).then(|| self.rejections().unwrap_or(0) as f64 / b as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LedgerEntry {
    pub cell: usize,
    pub chunk: u64,
    pub reps: u64,
}

/// Record of every chunk merged into a result, for checking that no
/// replication was dropped or counted twice.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplicationLedger {
    entries: Vec<LedgerEntry>,
}

impl ReplicationLedger {
    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn total(&self, cell: usize) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.cell == cell)
            .map(|e| e.reps)
            .sum()
    }

    /// Checks that each of the first `cells` copula cells was covered by
    /// chunks `0..k` exactly once, summing to `reps`.
    pub fn verify(&self, cells: usize, reps: u64, chunk: u64) -> Result<()> {
        for cell in 0..cells {
            let mut chunks: Vec<&LedgerEntry> =
                self.entries.iter().filter(|e| e.cell == cell).collect();
            chunks.sort_by_key(|e| e.chunk);
            let expected = reps.div_ceil(chunk);
            if chunks.len() as u64 != expected
                || chunks.iter().enumerate().any(|(i, e)| e.chunk != i as u64)
            {
                return Err(Error::Validation(format!(
                    "cell {cell}: expected chunks 0..{expected}, ledger has {:?}",
                    chunks.iter().map(|e| e.chunk).collect::<Vec<_>>()
                )));
            }
            let total: u64 = chunks.iter().map(|e| e.reps).sum();
            if total != reps {
                return Err(Error::Validation(format!(
                    "cell {cell}: ledger counts {total} replications, expected {reps}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    /// Rows ordered by copula cell, then transform, then alpha.
    pub results: Vec<CellResult>,
    pub ledger: ReplicationLedger,
    /// Number of copula cells fully completed.
    pub cells_completed: usize,
    /// Set when the run was cancelled before every cell finished.
    pub truncated: bool,
}

struct Prepared {
    transforms: Vec<TailTransform>,
    fast: Vec<FastStatistic>,
    /// Per transform, per alpha; `None` where the threshold is degenerate.
    thresholds: Vec<Vec<Option<f64>>>,
    skipped: Vec<Vec<Option<String>>>,
    alternative: Alternative,
    weights: Vec<f64>,
    alphas: Vec<f64>,
    bonferroni: bool,
}

impl Prepared {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        let transforms = config
            .transforms
            .iter()
            .map(|s| TailTransform::new(*s))
            .collect::<Result<Vec<_>>>()?;
        let mut thresholds = Vec::with_capacity(transforms.len());
        let mut skipped = Vec::with_capacity(transforms.len());
        for t in &transforms {
            let (th, sk): (Vec<_>, Vec<_>) = config
                .alphas
                .iter()
                .map(|&a| match decision_threshold(t, config.n, a) {
                    Ok(x) => (Some(x), None),
                    Err(e @ Error::DegenerateThreshold { .. }) => (None, Some(e.to_string())),
                    Err(e) => (None, Some(e.to_string())),
                })
                .unzip();
            thresholds.push(th);
            skipped.push(sk);
        }
        Ok(Self {
            fast: transforms.iter().map(|t| FastStatistic::new(*t)).collect(),
            transforms,
            thresholds,
            skipped,
            alternative: Alternative::new(&config.alternative, config.n)?,
            weights: config.weights.as_slice().to_vec(),
            alphas: config.alphas.clone(),
            bonferroni: config.bonferroni,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Counts {
    reps: u64,
    combination: Vec<u64>,
    bonferroni: Vec<u64>,
}

impl Counts {
    fn zero(prep: &Prepared) -> Self {
        Self {
            reps: 0,
            combination: vec![0; prep.transforms.len() * prep.alphas.len()],
            bonferroni: vec![0; prep.alphas.len()],
        }
    }

    fn add(&mut self, other: &Counts) {
        self.reps += other.reps;
        for (a, b) in self.combination.iter_mut().zip(&other.combination) {
            *a += b;
        }
        for (a, b) in self.bonferroni.iter_mut().zip(&other.bonferroni) {
            *a += b;
        }
    }
}

fn run_chunk(model: &CopulaModel, prep: &Prepared, seed: u64, chunk: u64, reps: u64) -> Counts {
    let mut rng = seed_stream(seed, chunk);
    let mut counts = Counts::zero(prep);
    counts.reps = reps;
    let na = prep.alphas.len();
    let mut p = vec![0.0; model.dim()];
    for _ in 0..reps {
        model.sample_into(&mut rng, &mut p);
        prep.alternative.apply(&mut p);
        for (ti, (t, th)) in prep.fast.iter().zip(&prep.thresholds).enumerate() {
            let mut state = FastState::Unset;
            for (ai, th) in th.iter().enumerate() {
                if th.is_some_and(|th| t.exceeds(&mut state, &p, &prep.weights, th)) {
                    counts.combination[ti * na + ai] += 1;
                }
            }
        }
        if prep.bonferroni {
            let b = bonferroni_unchecked(&p, &prep.weights);
            for (ai, &a) in prep.alphas.iter().enumerate() {
                if b <= a {
                    counts.bonferroni[ai] += 1;
                }
            }
        }
    }
    counts
}

fn build_pool(opts: &RunOptions) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = opts.threads {
        builder = builder.num_threads(t.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::Construction(format!("cannot start worker pool: {e}")))
}

/// Runs every cell of `config`, calling `on_cell` with the rows of each
/// copula cell as soon as it completes.
///
/// Results depend only on the config (including seed and chunk size), never
/// on the worker count or schedule: each chunk draws from its own stream
/// and chunk counts are merged in chunk order.
pub fn run_sweep(
    config: &ExperimentConfig,
    opts: &RunOptions,
    mut on_cell: impl FnMut(&[CellResult]),
) -> Result<SweepReport> {
    config.validate()?;
    let prep = Prepared::new(config)?;
    let pool = build_pool(opts)?;
    let n_chunks = config.reps.div_ceil(config.chunk);
    let mut report = SweepReport::default();

    for (ci, cell) in config.copulas.iter().enumerate() {
        let seed = cell_seed(config.seed, ci as u64);
        let chunks: Vec<Option<Counts>> = pool.install(|| {
            (0..n_chunks)
                .into_par_iter()
                .map(|k| {
                    if opts.cancelled() {
                        return None;
                    }
                    let reps = config.chunk.min(config.reps - k * config.chunk);
                    Some(run_chunk(&cell.model, &prep, seed, k, reps))
                })
                .collect()
        });
        if chunks.iter().any(Option::is_none) {
            report.truncated = true;
            log::warn!("sweep cancelled during copula cell {ci}; {ci} cells complete");
            break;
        }
        let mut total = Counts::zero(&prep);
        for (k, c) in chunks.iter().flatten().enumerate() {
            total.add(c);
            report.ledger.entries.push(LedgerEntry {
                cell: ci,
                chunk: k as u64,
                reps: c.reps,
            });
        }
        let rows = cell_rows(config, &prep, cell, &total);
        on_cell(&rows);
        report.results.extend(rows);
        report.cells_completed += 1;
        log::info!("copula cell {}/{} done", ci + 1, config.copulas.len());
    }
    Ok(report)
}

fn cell_rows(
    config: &ExperimentConfig,
    prep: &Prepared,
    cell: &CopulaCell,
    total: &Counts,
) -> Vec<CellResult> {
    let na = prep.alphas.len();
    let mut rows = Vec::with_capacity(prep.transforms.len() * na);
    for (ti, spec) in config.transforms.iter().enumerate() {
        for (ai, &alpha) in prep.alphas.iter().enumerate() {
            let outcome = match &prep.skipped[ti][ai] {
                Some(reason) => CellOutcome::Skipped {
                    reason: reason.clone(),
                },
                None => CellOutcome::Done {
                    rejections: total.combination[ti * na + ai],
                    bonf_rejections: prep.bonferroni.then(|| total.bonferroni[ai]),
                },
            };
            rows.push(CellResult {
                experiment: config.experiment.clone(),
                copula: cell.family.clone(),
                param: cell.param,
                tau: cell.tau,
                n: config.n,
                transform: *spec,
                gamma: spec.tail_index(),
                alpha,
                reps: total.reps,
                seed: config.seed,
                null: config.alternative.is_null(),
                outcome,
            });
        }
    }
    rows
}

/// Type-I error sweep; the config's alternative must be `Null`.
pub fn run_null_sweep(config: &ExperimentConfig, opts: &RunOptions) -> Result<SweepReport> {
    if !config.alternative.is_null() {
        return Err(Error::Validation(format!(
            "null sweep needs the null alternative, got {}",
            config.alternative.name()
        )));
    }
    run_sweep(config, opts, |_| {})
}

/// Power sweep; the config's alternative must carry a signal.
pub fn run_power_sweep(config: &ExperimentConfig, opts: &RunOptions) -> Result<SweepReport> {
    if config.alternative.is_null() {
        return Err(Error::Validation(
            "power sweep needs a type_a or type_b alternative".into(),
        ));
    }
    run_sweep(config, opts, |_| {})
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    /// Location shift `mu`.
    TypeA,
    /// Exponent `beta_s`.
    TypeB,
}

/// Search for the signal strength at which one test reaches a target power.
#[derive(Debug, Clone)]
pub struct CalibrationSpec {
    pub copula: CopulaModel,
    pub transform: TransformSpec,
    pub weights: WeightVector,
    pub alpha: f64,
    pub kind: SignalKind,
    pub layout: SignalLayout,
    pub target_power: f64,
    /// Accepted absolute deviation from the target power.
    pub tolerance: f64,
    pub pilot_reps: u64,
    pub seed: u64,
}

impl CalibrationSpec {
    pub fn alternative(&self, strength: f64) -> AlternativeSpec {
        let n = self.copula.dim();
        match self.kind {
            SignalKind::TypeA => AlternativeSpec::type_a(self.layout, n, strength),
            SignalKind::TypeB => AlternativeSpec::type_b(self.layout, n, strength),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub strength: f64,
    pub power: f64,
    pub evaluations: usize,
}

/// Bisection on the signal strength over a fixed pilot run.
///
/// Every evaluation reuses the same null draws, so the pilot power is
/// monotone in the strength and the bisection is well posed.
pub fn calibrate_signal(spec: &CalibrationSpec, opts: &RunOptions) -> Result<Calibration> {
    if !(spec.target_power > 0.0 && spec.target_power < 1.0) {
        return Err(Error::Validation(format!(
            "target power must lie in (0, 1), got {}",
            spec.target_power
        )));
    }
    if !(spec.tolerance > 0.0) {
        return Err(Error::Validation(
            "calibration tolerance must be positive".into(),
        ));
    }
    let mut evaluations = 0;
    let mut power_at = |strength: f64| -> Result<f64> {
        evaluations += 1;
        let config = ExperimentConfig {
            experiment: "calibration".into(),
            n: spec.copula.dim(),
            copulas: vec![CopulaCell::from_model(spec.copula.clone())],
            transforms: vec![spec.transform],
            weights: spec.weights.clone(),
            alphas: vec![spec.alpha],
            reps: spec.pilot_reps,
            seed: spec.seed,
            chunk: super::config::DEFAULT_CHUNK,
            alternative: spec.alternative(strength),
            bonferroni: false,
        };
        let report = run_sweep(&config, opts, |_| {})?;
        match report.results.first().and_then(CellResult::rate) {
            Some(r) => Ok(r),
            None if report.truncated => Err(Error::Validation("calibration cancelled".into())),
            None => Err(Error::Validation("calibration cell was skipped".into())),
        }
    };

    let (mut lo, mut hi) = match spec.kind {
        SignalKind::TypeA => (0.0, 1.0),
        SignalKind::TypeB => (1.0, 2.0),
    };
    let mut p_hi = power_at(hi)?;
    while p_hi < spec.target_power {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Validation(format!(
                "target power {} not reached for signal strengths up to 1e6",
                spec.target_power
            )));
        }
        p_hi = power_at(hi)?;
    }
    let mut best = (hi, p_hi);
    for _ in 0..60 {
        if (best.1 - spec.target_power).abs() <= spec.tolerance {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let p = power_at(mid)?;
        if (p - spec.target_power).abs() < (best.1 - spec.target_power).abs() {
            best = (mid, p);
        }
        if p < spec.target_power {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Calibration {
        strength: best.0,
        power: best.1,
        evaluations,
    })
}
