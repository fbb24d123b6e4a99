//! Deterministic Monte Carlo engine for type-I error and power sweeps.

mod alternatives;
mod config;
mod engine;
mod rng;
mod wilson;

pub use alternatives::{
    gen_alternative, AlternativeSpec, SignalLayout, SPARSE_BETA_WEAK, TYPE_A_NU,
};
pub use config::{CopulaCell, ExperimentConfig, DEFAULT_CHUNK};
pub use engine::{
    calibrate_signal, run_null_sweep, run_power_sweep, run_sweep, Calibration, CalibrationSpec,
    CellOutcome, CellResult, LedgerEntry, ReplicationLedger, RunOptions, SignalKind, SweepReport,
    CI_LEVEL,
};
pub use rng::{seed_stream, SimRng};
pub use wilson::wilson_ci;
