mod config;
mod output;
mod svg;
mod theory_cmd;

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use tailfuse_core::simlab::run_sweep;
use tailfuse_core::transforms::{bonferroni_pvalue, combined_pvalue, reject};
use tailfuse_core::{CellOutcome, Error, RunOptions, TailTransform, TransformSpec, WeightVector};

use crate::config::parse_list;
use crate::output::{fmt_sig, CsvSink};

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tailfuse",
    version,
    about = "Heavy-tailed p-value combination tests under tail dependence"
)]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Null,
    Power,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Combine p-values read from a file or standard input.
    Combine {
        /// Whitespace- or comma-separated p-values; `-` or absent reads stdin.
        input: Option<PathBuf>,
        /// Transformation distribution, e.g. `pareto:1`, `trunc_cauchy`, `trunc_t:0.6`.
        #[arg(long, default_value = "trunc_cauchy")]
        transform: String,
        /// Comma-separated weights (renormalized to sum to n).
        #[arg(long, value_name = "LIST")]
        weights: Option<String>,
        /// Significance level; prints the decision when given.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Run a type-I error or power sweep described by a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Null)]
        mode: Mode,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write an SVG chart.
        #[arg(long)]
        svg: bool,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Closed-form asymptotic quantities.
    #[command(subcommand)]
    Theory(theory_cmd::TheoryCmd),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Factorization { .. }
                | Error::Domain(_)
                | Error::Construction(_)
                | Error::Usage(_)
                | Error::DegenerateThreshold { .. }
                | Error::Validation(_)
                | Error::UnsupportedAnalyticCdf(_) => EXIT_VALIDATION,
            };
        }
        if cause.is::<serde_path_to_error::Error<serde_json::Error>>() || cause.is::<InputError>() {
            return EXIT_VALIDATION;
        }
    }
    EXIT_RUNTIME
}

/// Malformed p-value input.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Combine {
            input,
            transform,
            weights,
            alpha,
        } => combine(input.as_deref(), &transform, weights.as_deref(), alpha),
        Command::Sweep {
            config,
            mode,
            out,
            svg,
            seed,
        } => sweep(&config, mode, &out, svg, seed),
        Command::Theory(q) => {
            print!("{}", theory_cmd::run(&q)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read_pvalues(reader: impl BufRead) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or_default();
        for tok in line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            let p: f64 = tok
                .parse()
                .map_err(|_| InputError(format!("line {}: not a number: {tok:?}", i + 1)))?;
            if !(0.0..=1.0).contains(&p) {
                bail!(Error::Validation(format!(
                    "line {}: p-value {tok} outside [0, 1]",
                    i + 1
                )));
            }
            out.push(p);
        }
    }
    if out.is_empty() {
        bail!(InputError("no p-values in input".into()));
    }
    Ok(out)
}

fn combine(
    input: Option<&Path>,
    transform: &str,
    weights: Option<&str>,
    alpha: Option<f64>,
) -> Result<ExitCode> {
    let pvalues = match input {
        None => read_pvalues(io::stdin().lock())?,
        Some(p) if p == Path::new("-") => read_pvalues(io::stdin().lock())?,
        Some(p) => {
            let f = File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            read_pvalues(BufReader::new(f))?
        }
    };
    let spec: TransformSpec = transform.parse()?;
    let f = TailTransform::new(spec)?;
    let w = match weights {
        Some(w) => WeightVector::new(parse_list(w)?)?,
        None => WeightVector::uniform(pvalues.len()),
    };
    let pc = combined_pvalue(&f, &pvalues, &w)?;
    let pb = bonferroni_pvalue(&pvalues, &w)?;
    println!("n {}", pvalues.len());
    println!("transform {spec}");
    println!("combined {}", fmt_sig(pc, 6));
    println!("bonferroni {}", fmt_sig(pb, 6));
    if let Some(a) = alpha {
        let r = reject(&f, &pvalues, &w, a)?;
        println!("alpha {}", fmt_sig(a, 6));
        println!("decision {}", if r { "reject" } else { "accept" });
    }
    Ok(ExitCode::SUCCESS)
}

fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("TAILFUSE_THREADS") {
        Err(_) => Ok(None),
        Ok(s) if s.trim().is_empty() => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!(Error::Validation(format!(
                "TAILFUSE_THREADS must be a positive integer, got {s:?}"
            ))),
        },
    }
}

fn sweep(
    path: &Path,
    mode: Mode,
    out: &Path,
    want_svg: bool,
    seed: Option<u64>,
) -> Result<ExitCode> {
    let mut sweep = config::load(path)?.into_sweep(seed)?;
    config::require_mode_matches(&sweep.config, mode == Mode::Power)?;

    let cancel = Arc::new(AtomicBool::new(false));
    {
        let cancel = Arc::clone(&cancel);
        if let Err(e) = ctrlc::set_handler(move || cancel.store(true, Ordering::Relaxed)) {
            log::warn!("cannot install interrupt handler: {e}");
        }
    }
    let opts = RunOptions {
        threads: threads_from_env()?,
        cancel: Some(Arc::clone(&cancel)),
    };
    if let Some(s) = sweep.calibrate(&opts)? {
        eprintln!("calibrated signal strength {}", fmt_sig(s, 9));
    }

    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let name = &sweep.config.experiment;
    let csv_path = out.join(
        sweep
            .outputs
            .csv
            .clone()
            .unwrap_or_else(|| format!("{name}.csv")),
    );
    let file =
        File::create(&csv_path).with_context(|| format!("cannot create {}", csv_path.display()))?;
    let mut sink = CsvSink::new(BufWriter::new(file))?;
    let mut write_err: Option<io::Error> = None;
    let report = run_sweep(&sweep.config, &opts, |rows| {
        for r in rows {
            if let CellOutcome::Skipped { reason } = &r.outcome {
                log::warn!(
                    "skipped {} {} alpha={}: {reason}",
                    r.copula,
                    r.transform,
                    r.alpha
                );
            }
        }
        if write_err.is_none() {
            write_err = sink.rows(rows).err();
        }
    })?;
    if let Some(e) = write_err {
        return Err(e).with_context(|| format!("cannot write {}", csv_path.display()));
    }
    if report.truncated {
        sink.truncated()?;
    }
    eprintln!("wrote {}", csv_path.display());

    if want_svg || sweep.outputs.svg.is_some() {
        let svg_path = out.join(
            sweep
                .outputs
                .svg
                .clone()
                .unwrap_or_else(|| format!("{name}.svg")),
        );
        fs::write(&svg_path, svg::render(&report.results))
            .with_context(|| format!("cannot write {}", svg_path.display()))?;
        eprintln!("wrote {}", svg_path.display());
    }
    if report.truncated {
        eprintln!(
            "interrupted: {} of {} copula cells complete",
            report.cells_completed,
            sweep.config.copulas.len()
        );
        return Ok(ExitCode::from(EXIT_RUNTIME));
    }
    Ok(ExitCode::SUCCESS)
}
