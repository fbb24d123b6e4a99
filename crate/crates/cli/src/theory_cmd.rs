use std::fs;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::Deserialize;
use tailfuse_core::theory::{
    bonferroni_ratio, convex_order_bivariate, cstar_eval, ell_eval, h_tail_ratio, power_ratio,
    q_bound, q_gamma_spectral, validate_spectral,
};
use tailfuse_core::{ConvexOrder, EllSpec, Error, SpectralMeasure, WeightVector};

use crate::config::parse_list;
use crate::output::fmt_sig;

const SIG: usize = 9;

#[derive(Debug, Subcommand)]
pub enum TheoryCmd {
    /// Complete-dependence limit (1/n)(sum w^(1/gamma))^gamma.
    #[command(name = "q_bound")]
    QBound {
        #[arg(long)]
        gamma: f64,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Limiting scaled type-I error q(gamma) for a spectral measure.
    #[command(name = "q_spectral")]
    QSpectral {
        #[arg(long)]
        gamma: f64,
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, value_name = "LIST")]
        weights: Option<String>,
    },
    /// Stable tail dependence function l(v).
    Ell {
        #[command(flatten)]
        ell: EllArgs,
        #[arg(long, value_name = "LIST")]
        v: String,
    },
    /// Extreme value copula C*(u) = exp(-l(-log u)).
    Cstar {
        #[command(flatten)]
        ell: EllArgs,
        #[arg(long, value_name = "LIST")]
        u: String,
    },
    /// Asymptotic type-I error ratio n / l(w) of the gamma = 1 test over Bonferroni.
    #[command(name = "bonf_ratio")]
    BonfRatio {
        #[command(flatten)]
        ell: EllArgs,
        #[arg(long, value_name = "LIST")]
        weights: Option<String>,
    },
    /// Asymptotic power ratio sum(c) / l(c) over Bonferroni.
    #[command(name = "power_ratio")]
    PowerRatio {
        #[command(flatten)]
        ell: EllArgs,
        #[arg(long, value_name = "LIST")]
        c: String,
    },
    /// Tail ratio of the mean of an MRV vector to its average marginal tail.
    #[command(name = "h_ratio")]
    HRatio {
        #[arg(long)]
        gamma: f64,
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, value_name = "LIST")]
        c: Option<String>,
    },
    /// Convex-order comparison of two bivariate spectral measures.
    #[command(name = "convex_order")]
    ConvexOrder {
        /// First measure: a JSON file, or `independence` / `comonotone`.
        first: String,
        /// Second measure, same forms.
        second: String,
    },
    /// Moment diagnostics of a spectral measure.
    Validate {
        #[command(flatten)]
        measure: MeasureArgs,
    },
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Dimension, for uniform weights.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated weights (renormalized to sum to n).
    #[arg(long, value_name = "LIST")]
    weights: Option<String>,
}

impl WeightArgs {
    fn resolve(&self) -> Result<WeightVector> {
        weights(self.weights.as_deref(), self.n)
    }
}

fn weights(list: Option<&str>, n: Option<usize>) -> Result<WeightVector> {
    match (list, n) {
        (Some(w), n) => {
            let w = WeightVector::new(parse_list(w)?)?;
            if let Some(n) = n.filter(|&n| n != w.len()) {
                bail!(Error::Validation(format!(
                    "{} weights but --n {n}",
                    w.len()
                )));
            }
            Ok(w)
        }
        (None, Some(n)) if n > 0 => Ok(WeightVector::uniform(n)),
        _ => bail!(Error::Validation("give --n or --weights".into())),
    }
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// `independence`, `comonotone`, or a JSON file `{"atoms": [[..]], "masses": [..]}`.
    #[arg(long)]
    measure: String,
    /// Dimension for the named measures.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    atoms: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

fn measure(source: &str, n: Option<usize>) -> Result<SpectralMeasure> {
    let named =
        |f: fn(usize) -> tailfuse_core::Result<SpectralMeasure>| -> Result<SpectralMeasure> {
            match n {
                Some(n) => Ok(f(n)?),
                None => bail!(Error::Validation(format!(
                    "--n is required for the {source} measure"
                ))),
            }
        };
    match source {
        "independence" => named(SpectralMeasure::independence),
        "comonotone" => named(SpectralMeasure::comonotone),
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {path}"))?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            let file: MeasureFile = serde_path_to_error::deserialize(de)
                .with_context(|| format!("invalid spectral measure {path}"))?;
            let h = SpectralMeasure::new(file.atoms, file.masses)?;
            if n.is_some_and(|n| n != h.dim()) {
                bail!(Error::Validation(format!(
                    "{path} has dimension {}",
                    h.dim()
                )));
            }
            Ok(h)
        }
    }
}

/// Fails with the moment diagnostics when the constraint is violated.
fn checked(h: SpectralMeasure) -> Result<SpectralMeasure> {
    let d = validate_spectral(&h);
    if !d.passes {
        let moments: Vec<String> = d.moments.iter().map(|m| fmt_sig(*m, SIG)).collect();
        bail!(Error::Validation(format!(
            "spectral measure fails the moment constraint: moments [{}] (each must be 1), total mass {}",
            moments.join(", "),
            fmt_sig(d.total_mass, SIG)
        )));
    }
    Ok(h)
}

impl MeasureArgs {
    fn resolve(&self) -> Result<SpectralMeasure> {
        checked(measure(&self.measure, self.n)?)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EllFamily {
    Independence,
    Comonotone,
    Logistic,
    Gumbel,
    Galambos,
    Spectral,
}

#[derive(Debug, Args)]
pub struct EllArgs {
    #[arg(long, value_enum)]
    family: EllFamily,
    /// Dimension (independence, comonotone, logistic).
    #[arg(long)]
    n: Option<usize>,
    /// Logistic dependence parameter in (0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// Gumbel or Galambos parameter.
    #[arg(long)]
    theta: Option<f64>,
    /// Gumbel/Galambos asymmetry weights.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Spectral measure source for `--family spectral`.
    #[arg(long)]
    measure: Option<String>,
}

impl EllArgs {
    /// Builds the spec; `dim` fills in `--n` when it can be inferred.
    fn resolve(&self, dim: Option<usize>) -> Result<EllSpec> {
        let n = self.n.or(dim);
        let need = |v: Option<f64>, name: &str| -> Result<f64> {
            v.ok_or_else(|| {
                Error::Validation(format!("--{name} is required for this family")).into()
            })
        };
        let need_n = || -> Result<usize> {
            n.ok_or_else(|| Error::Validation("--n is required for this family".into()).into())
        };
        let spec = match self.family {
            EllFamily::Independence => EllSpec::IndependenceEll(need_n()?),
            EllFamily::Comonotone => EllSpec::ComonotoneEll(need_n()?),
            EllFamily::Logistic => EllSpec::Logistic {
                alpha: need(self.alpha, "alpha")?,
                n: need_n()?,
            },
            EllFamily::Gumbel => EllSpec::GumbelBiv {
                theta: need(self.theta, "theta")?,
                a: self.a,
                b: self.b,
            },
            EllFamily::Galambos => EllSpec::GalambosBiv {
                theta: need(self.theta, "theta")?,
                a: self.a,
                b: self.b,
            },
            EllFamily::Spectral => {
                let Some(src) = &self.measure else {
                    bail!(Error::Validation(
                        "--measure is required for --family spectral".into()
                    ));
                };
                EllSpec::FromSpectral(checked(measure(src, n)?)?)
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn order_name(o: ConvexOrder) -> &'static str {
    match o {
        ConvexOrder::FirstDominates => "first_dominates",
        ConvexOrder::SecondDominates => "second_dominates",
        ConvexOrder::Equal => "equal",
        ConvexOrder::Incomparable => "incomparable",
    }
}

/// Evaluates the query and returns the text to print.
pub fn run(cmd: &TheoryCmd) -> Result<String> {
    let value = |x: f64| format!("{}\n", fmt_sig(x, SIG));
    Ok(match cmd {
        TheoryCmd::QBound { gamma, weights } => value(q_bound(*gamma, &weights.resolve()?)?),
        TheoryCmd::QSpectral {
            gamma,
            measure,
            weights: w,
        } => {
            let h = measure.resolve()?;
            let w = weights(w.as_deref(), Some(h.dim()))?;
            value(q_gamma_spectral(*gamma, &h, &w)?)
        }
        TheoryCmd::Ell { ell, v } => {
            let v = parse_list(v)?;
            value(ell_eval(&ell.resolve(Some(v.len()))?, &v)?)
        }
        TheoryCmd::Cstar { ell, u } => {
            let u = parse_list(u)?;
            value(cstar_eval(&ell.resolve(Some(u.len()))?, &u)?)
        }
        TheoryCmd::BonfRatio { ell, weights: w } => {
            let w = weights(w.as_deref(), ell.n)?;
            value(bonferroni_ratio(&ell.resolve(Some(w.len()))?, &w)?)
        }
        TheoryCmd::PowerRatio { ell, c } => {
            let c = parse_list(c)?;
            value(power_ratio(&ell.resolve(Some(c.len()))?, &c)?)
        }
        TheoryCmd::HRatio { gamma, measure, c } => {
            let h = measure.resolve()?;
            let c = match c {
                Some(c) => parse_list(c)?,
                None => vec![1.0; h.dim()],
            };
            value(h_tail_ratio(*gamma, &h, &c)?)
        }
        TheoryCmd::ConvexOrder { first, second } => {
            let h1 = checked(measure(first, Some(2))?)?;
            let h2 = checked(measure(second, Some(2))?)?;
            format!("{}\n", order_name(convex_order_bivariate(&h1, &h2)?))
        }
        TheoryCmd::Validate { measure: m } => {
            let d = validate_spectral(&measure(&m.measure, m.n)?);
            let moments: Vec<String> = d.moments.iter().map(|x| fmt_sig(*x, SIG)).collect();
            let kind = format!("{:?}", d.kind).to_lowercase();
            let text = format!(
                "moments {}\ntotal_mass {}\nkind {kind}\nmoment_constraint {}\n",
                moments.join(","),
                fmt_sig(d.total_mass, SIG),
                if d.passes { "pass" } else { "fail" }
            );
            if !d.passes {
                print!("{text}");
                bail!(Error::Validation(
                    "spectral measure fails the moment constraint".into()
                ));
            }
            text
        }
    })
}
