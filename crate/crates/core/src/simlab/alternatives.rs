use std::fmt;

use crate::distributions::{StudentT, TIsfTable};
use crate::error::{domain, Error, Result};

/// Degrees of freedom of the location-shift model.
pub const TYPE_A_NU: f64 = 5.0;

/// Weak-signal exponent used on the non-signal coordinates of sparse Type-B
/// alternatives.
pub const SPARSE_BETA_WEAK: f64 = 1.5;

/// How the p-value vector departs from the null.
#[derive(Debug, Clone, PartialEq)]
pub enum AlternativeSpec {
    Null,
    /// `P_i = 1 - t_5(t_5^{-1}(1 - P_i~) + mu_i)`.
    TypeA {
        mu: Vec<f64>,
    },
    /// `P_i = P_i~^beta_i`, i.e. `P_i ~ Beta(1/beta_i, 1)`.
    TypeB {
        beta: Vec<f64>,
    },
}

/// Which coordinates carry the signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalLayout {
    /// Every coordinate.
    Dense,
    /// The first two coordinates.
    Sparse,
}

impl SignalLayout {
    pub fn name(&self) -> &'static str {
        match self {
            SignalLayout::Dense => "dense",
            SignalLayout::Sparse => "sparse",
        }
    }

    fn strong(&self, n: usize) -> usize {
        match self {
            SignalLayout::Dense => n,
            SignalLayout::Sparse => n.min(2),
        }
    }
}

impl fmt::Display for SignalLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SignalLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(SignalLayout::Dense),
            "sparse" => Ok(SignalLayout::Sparse),
            _ => Err(Error::Validation(format!(
                "unknown signal layout {s:?} (expected dense or sparse)"
            ))),
        }
    }
}

impl AlternativeSpec {
    /// `(mu, mu, 0, ...)` or `(mu, ..., mu)`.
    pub fn type_a(layout: SignalLayout, n: usize, mu: f64) -> Self {
        let k = layout.strong(n);
        let mu = (0..n).map(|i| if i < k { mu } else { 0.0 }).collect();
        AlternativeSpec::TypeA { mu }
    }

    /// `(beta_s, beta_s, 1.5, ...)` or `(beta_s, ..., beta_s)`.
    pub fn type_b(layout: SignalLayout, n: usize, beta_s: f64) -> Self {
        let k = layout.strong(n);
        let beta = (0..n)
            .map(|i| if i < k { beta_s } else { SPARSE_BETA_WEAK })
            .collect();
        AlternativeSpec::TypeB { beta }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, AlternativeSpec::Null)
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlternativeSpec::Null => "null",
            AlternativeSpec::TypeA { .. } => "type_a",
            AlternativeSpec::TypeB { .. } => "type_b",
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let (values, what) = match self {
            AlternativeSpec::Null => return Ok(()),
            AlternativeSpec::TypeA { mu } => (mu, "mu"),
            AlternativeSpec::TypeB { beta } => (beta, "beta"),
        };
        if values.len() != n {
            return Err(Error::Validation(format!(
                "{what} has {} entries, expected {n}",
                values.len()
            )));
        }
        let bad = match self {
            AlternativeSpec::TypeA { mu } => mu.iter().find(|m| !(**m >= 0.0 && m.is_finite())),
            AlternativeSpec::TypeB { beta } => beta.iter().find(|b| !(**b >= 1.0 && b.is_finite())),
            AlternativeSpec::Null => None,
        };
        match bad {
            Some(v) => Err(Error::Validation(format!(
                "{what} entry {v} out of range ({})",
                if what == "mu" {
                    "need mu >= 0"
                } else {
                    "need beta >= 1"
                }
            ))),
            None => Ok(()),
        }
    }
}

/// An alternative ready to apply to many draws.
#[derive(Debug, Clone)]
pub(crate) enum Alternative {
    Null,
    TypeA { t: TIsfTable, mu: Vec<f64> },
    TypeB { beta: Vec<f64> },
}

impl Alternative {
    pub(crate) fn new(spec: &AlternativeSpec, n: usize) -> Result<Self> {
        spec.validate(n)?;
        Ok(match spec {
            AlternativeSpec::Null => Alternative::Null,
            AlternativeSpec::TypeA { mu } => Alternative::TypeA {
                t: TIsfTable::new(StudentT::new(TYPE_A_NU)?),
                mu: mu.clone(),
            },
            AlternativeSpec::TypeB { beta } => Alternative::TypeB { beta: beta.clone() },
        })
    }

    pub(crate) fn apply(&self, p: &mut [f64]) {
        match self {
            Alternative::Null => {}
            Alternative::TypeA { t, mu } => {
                for (p, &m) in p.iter_mut().zip(mu) {
                    if m != 0.0 {
                        *p = t.dist().sf(t.isf_refined(*p) + m);
                    }
                }
            }
            Alternative::TypeB { beta } => {
                for (p, &b) in p.iter_mut().zip(beta) {
                    if b != 1.0 {
                        *p = p.powf(b);
                    }
                }
            }
        }
    }
}

/// Applies `spec` to a null p-value vector with entries in `(0, 1)`.
pub fn gen_alternative(p_null: &[f64], spec: &AlternativeSpec) -> Result<Vec<f64>> {
    if let Some(p) = p_null.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return domain(format!("null p-values must lie in (0, 1), got {p}"));
    }
    spec.validate(p_null.len())?;
    // Exact inverse here: building the simulation table costs more than a
    // handful of direct evaluations.
    let mut out = p_null.to_vec();
    match spec {
        AlternativeSpec::TypeA { mu } => {
            let t = StudentT::new(TYPE_A_NU)?;
            for (p, &m) in out.iter_mut().zip(mu) {
                if m != 0.0 {
                    *p = t.sf(t.isf(*p) + m);
                }
            }
        }
        _ => Alternative::new(spec, p_null.len())?.apply(&mut out),
    }
    Ok(out)
}
