//! Closed-form asymptotics of the combination test under MRV dependence.
//!
//! The upper-tail dependence of `(1 - P_1, ..., 1 - P_n)` is described by a
//! stable tail dependence function `l`, equivalently by a spectral measure
//! `H` on the unit simplex with `l(v) = sum_k m_k max_i v_i theta_i^(k)`,
//! or by the extreme value copula `C*(u) = exp(-l(-log u))`. Spectral
//! measures here are finitely supported.

use crate::error::{domain, Error, Result};
use crate::transforms::WeightVector;

const SIMPLEX_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-9;

/// A discrete spectral measure: atoms on the unit simplex with positive masses.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    n: usize,
    atoms: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

impl SpectralMeasure {
    /// Builds a measure, checking that every atom lies on the simplex.
    /// The moment constraint is checked separately by [`validate_spectral`].
    pub fn new(atoms: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Validation("spectral measure has no atoms".into()));
        }
        if atoms.len() != masses.len() {
            return Err(Error::Validation(format!(
                "{} atoms but {} masses",
                atoms.len(),
                masses.len()
            )));
        }
        let n = atoms[0].len();
        if n == 0 {
            return Err(Error::Validation(
                "atoms must have at least one coordinate".into(),
            ));
        }
        for (k, atom) in atoms.iter().enumerate() {
            if atom.len() != n {
                return Err(Error::Validation(format!(
                    "atom {k} has {} coordinates, expected {n}",
                    atom.len()
                )));
            }
            if atom.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
                return Err(Error::Validation(format!(
                    "atom {k} has a negative coordinate"
                )));
            }
            let s: f64 = atom.iter().sum();
            if (s - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::Validation(format!(
                    "atom {k} sums to {s}, not 1 (off the simplex)"
                )));
            }
        }
        if let Some((k, m)) = masses
            .iter()
            .enumerate()
            .find(|(_, m)| !(**m > 0.0 && m.is_finite()))
        {
            return Err(Error::Validation(format!(
                "mass {k} must be positive, got {m}"
            )));
        }
        Ok(Self { n, atoms, masses })
    }

    /// Unit masses at the basis vectors (asymptotic independence).
    pub fn independence(n: usize) -> Result<Self> {
        let atoms = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        Self::new(atoms, vec![1.0; n])
    }

    /// Mass `n` at the simplex centre (asymptotic complete dependence).
    pub fn comonotone(n: usize) -> Result<Self> {
        Self::new(vec![vec![1.0 / n as f64; n]], vec![n as f64])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `sum_k m_k theta_i^(k)` for each coordinate `i`; equals `l(e_i)`.
    pub fn moments(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.atoms
                    .iter()
                    .zip(&self.masses)
                    .map(|(a, m)| m * a[i])
                    .sum()
            })
            .collect()
    }

    /// `sum_k m_k (sum_i (c_i theta_i^(k))^(1/gamma))^gamma`.
    fn norm_integral(&self, c: &[f64], gamma: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.masses)
            .map(|(atom, m)| m * power_norm(atom.iter().zip(c).map(|(t, c)| t * c), gamma))
            .sum()
    }
}

// (sum x_i^(1/gamma))^gamma, scaled by the maximum to avoid overflow.
fn power_norm(values: impl Iterator<Item = f64> + Clone, gamma: f64) -> f64 {
    let top = values.clone().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    let p = 1.0 / gamma;
    let s: f64 = values.map(|x| (x / top).powf(p)).sum();
    top * s.powf(gamma)
}

/// How a spectral measure distributes its mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralKind {
    /// All atoms are basis vectors.
    Independence,
    /// All atoms sit at the simplex centre.
    Comonotone,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDiagnostics {
    pub moments: Vec<f64>,
    pub passes: bool,
    pub total_mass: f64,
    pub kind: SpectralKind,
}

/// Checks the moment constraint `sum_k m_k theta_i^(k) = 1` for every `i`
/// and classifies the measure.
pub fn validate_spectral(h: &SpectralMeasure) -> SpectralDiagnostics {
    let moments = h.moments();
    let passes = moments.iter().all(|m| (m - 1.0).abs() <= MOMENT_TOL);
    let n = h.n;
    let is_basis = |a: &Vec<f64>| a.iter().filter(|&&t| t != 0.0).count() == 1;
    let centre = 1.0 / n as f64;
    let is_centre = |a: &Vec<f64>| a.iter().all(|&t| (t - centre).abs() <= SIMPLEX_TOL);
    let kind = if h.atoms.iter().all(is_basis) {
        SpectralKind::Independence
    } else if h.atoms.iter().all(is_centre) {
        SpectralKind::Comonotone
    } else {
        SpectralKind::Mixed
    };
    SpectralDiagnostics {
        moments,
        passes,
        total_mass: h.total_mass(),
        kind,
    }
}

fn require_valid(h: &SpectralMeasure) -> Result<()> {
    let d = validate_spectral(h);
    if d.passes {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "moment constraint violated: sum_k m_k theta_i = {:?}, expected 1",
            d.moments
        )))
    }
}

/// A stable tail dependence function.
#[derive(Debug, Clone, PartialEq)]
pub enum EllSpec {
    IndependenceEll(usize),
    ComonotoneEll(usize),
    /// `(sum v_i^(1/alpha))^alpha` with `0 < alpha <= 1`.
    Logistic {
        alpha: f64,
        n: usize,
    },
    /// Bivariate asymmetric Gumbel (logistic), `theta >= 1`, `a, b` in `[0, 1]`.
    GumbelBiv {
        theta: f64,
        a: f64,
        b: f64,
    },
    /// Bivariate Galambos (negative logistic), `theta > 0`, `a, b` in `[0, 1]`.
    GalambosBiv {
        theta: f64,
        a: f64,
        b: f64,
    },
    FromSpectral(SpectralMeasure),
}

impl EllSpec {
    pub fn dim(&self) -> usize {
        match self {
            EllSpec::IndependenceEll(n) | EllSpec::ComonotoneEll(n) => *n,
            EllSpec::Logistic { n, .. } => *n,
            EllSpec::GumbelBiv { .. } | EllSpec::GalambosBiv { .. } => 2,
            EllSpec::FromSpectral(h) => h.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        match *self {
            EllSpec::IndependenceEll(n)
            | EllSpec::ComonotoneEll(n)
            | EllSpec::Logistic { n, .. }
                if n == 0 =>
            {
                Err(Error::Validation("dimension must be at least 1".into()))
            }
            EllSpec::Logistic { alpha, .. } if !(alpha > 0.0 && alpha <= 1.0) => Err(
                Error::Validation(format!("logistic alpha must lie in (0, 1], got {alpha}")),
            ),
            EllSpec::GumbelBiv { theta, a, b }
                if !(theta >= 1.0 && theta.is_finite() && unit(a) && unit(b)) =>
            {
                Err(Error::Validation(format!(
                    "Gumbel needs theta >= 1 and a, b in [0, 1], got ({theta}, {a}, {b})"
                )))
            }
            EllSpec::GalambosBiv { theta, a, b }
                if !(theta > 0.0 && theta.is_finite() && unit(a) && unit(b)) =>
            {
                Err(Error::Validation(format!(
                    "Galambos needs theta > 0 and a, b in [0, 1], got ({theta}, {a}, {b})"
                )))
            }
            EllSpec::FromSpectral(ref h) => require_valid(h),
            _ => Ok(()),
        }
    }
}

/// Evaluates the stable tail dependence function at `v >= 0`.
pub fn ell_eval(spec: &EllSpec, v: &[f64]) -> Result<f64> {
    spec.validate()?;
    if v.len() != spec.dim() {
        return Err(Error::Usage(format!(
            "argument has {} coordinates, expected {}",
            v.len(),
            spec.dim()
        )));
    }
    if let Some(x) = v.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
        return domain(format!(
            "arguments must be non-negative and finite, got {x}"
        ));
    }
    Ok(ell_unchecked(spec, v))
}

fn ell_unchecked(spec: &EllSpec, v: &[f64]) -> f64 {
    match spec {
        EllSpec::IndependenceEll(_) => v.iter().sum(),
        EllSpec::ComonotoneEll(_) => v.iter().copied().fold(0.0, f64::max),
        EllSpec::Logistic { alpha, .. } => power_norm(v.iter().copied(), *alpha),
        &EllSpec::GumbelBiv { theta, a, b } => {
            let (x, y) = (a * v[0], b * v[1]);
            (1.0 - a) * v[0] + (1.0 - b) * v[1] + power_norm([x, y].into_iter(), 1.0 / theta)
        }
        &EllSpec::GalambosBiv { theta, a, b } => {
            let (x, y) = (a * v[0], b * v[1]);
            let dep = if x == 0.0 || y == 0.0 {
                0.0
            } else {
                // (x^-theta + y^-theta)^(-1/theta) = min * (1 + (min/max)^theta)^(-1/theta)
                let (lo, hi) = if x < y { (x, y) } else { (y, x) };
                lo * (1.0 + (lo / hi).powf(theta)).powf(-1.0 / theta)
            };
            v[0] + v[1] - dep
        }
        EllSpec::FromSpectral(h) => h
            .atoms
            .iter()
            .zip(&h.masses)
            .map(|(atom, m)| m * atom.iter().zip(v).map(|(t, x)| t * x).fold(0.0, f64::max))
            .sum(),
    }
}

/// Extreme value copula `C*(u) = exp(-l(-log u_1, ..., -log u_n))`.
pub fn cstar_eval(spec: &EllSpec, u: &[f64]) -> Result<f64> {
    if let Some(x) = u.iter().find(|x| !(**x >= 0.0 && **x <= 1.0)) {
        return domain(format!("copula arguments must lie in [0, 1], got {x}"));
    }
    if u.contains(&0.0) {
        spec.validate()?;
        return Ok(0.0);
    }
    let v: Vec<f64> = u.iter().map(|x| -x.ln()).collect();
    Ok((-ell_eval(spec, &v)?).exp())
}

/// Limiting scaled type-I error under asymptotic complete dependence,
/// `(1/n) (sum_i w_i^(1/gamma))^gamma`.
pub fn q_bound(gamma: f64, weights: &WeightVector) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(power_norm(weights.as_slice().iter().copied(), gamma) / weights.len() as f64)
}

/// Limiting scaled type-I error `q(gamma)` for spectral measure `h`:
/// `(1/n) sum_k m_k (sum_i (w_i theta_i^(k))^(1/gamma))^gamma`.
pub fn q_gamma_spectral(gamma: f64, h: &SpectralMeasure, weights: &WeightVector) -> Result<f64> {
    check_gamma(gamma)?;
    require_valid(h)?;
    if weights.len() != h.dim() {
        return Err(Error::Usage(format!(
            "{} weights for a {}-dimensional measure",
            weights.len(),
            h.dim()
        )));
    }
    Ok(h.norm_integral(weights.as_slice(), gamma) / h.dim() as f64)
}

/// Tail ratio `lim P(mean X > t) / ((1/n) sum_i P(X_i > t))` for an MRV
/// vector with spectral measure `h` and marginal tail weights `c`.
pub fn h_tail_ratio(gamma: f64, h: &SpectralMeasure, c: &[f64]) -> Result<f64> {
    check_gamma(gamma)?;
    require_valid(h)?;
    if c.len() != h.dim() {
        return Err(Error::Usage(format!(
            "{} tail weights for a {}-dimensional measure",
            c.len(),
            h.dim()
        )));
    }
    if c.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
        return domain("tail weights must be non-negative and finite");
    }
    let total: f64 = c.iter().sum();
    if total == 0.0 {
        return domain("tail weights are all zero");
    }
    let n = h.dim() as f64;
    Ok(n.powf(1.0 - gamma) * h.norm_integral(c, gamma) / total)
}

/// Asymptotic type-I error ratio of the `gamma = 1` combination test over
/// weighted Bonferroni, `n / l(w)`.
pub fn bonferroni_ratio(spec: &EllSpec, weights: &WeightVector) -> Result<f64> {
    Ok(weights.len() as f64 / ell_eval(spec, weights.as_slice())?)
}

/// Asymptotic power ratio `sum_i c_i / l(c)` of the `gamma = 1` combination
/// test over Bonferroni.
pub fn power_ratio(spec: &EllSpec, c: &[f64]) -> Result<f64> {
    if c.iter().any(|x| !(*x > 0.0)) {
        return domain("signal weights must be positive");
    }
    Ok(c.iter().sum::<f64>() / ell_eval(spec, c)?)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        domain(format!("tail index must be positive, got {gamma}"))
    }
}

/// Verdict of a convex-order comparison between two spectral measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexOrder {
    /// The first measure dominates the second in convex order.
    FirstDominates,
    /// The second measure dominates the first in convex order.
    SecondDominates,
    Equal,
    Incomparable,
}

/// Compares two bivariate spectral measures in convex order.
///
/// Both measures have total mass 2 and first-coordinate mean 1, so the order
/// reduces to pointwise comparison of `G(x) = int_0^x H(theta_1 <= t) dt =
/// sum_k m_k (x - theta_1^(k))^+` on `[0, 1]`; the more spread-out measure
/// has the larger `G` everywhere. `G` is piecewise linear with kinks at the
/// atoms, so comparing at the kinks and endpoints is exact.
pub fn convex_order_bivariate(h1: &SpectralMeasure, h2: &SpectralMeasure) -> Result<ConvexOrder> {
    if h1.dim() != 2 || h2.dim() != 2 {
        return domain(format!(
            "convex order comparison needs bivariate measures, got dimensions {} and {}",
            h1.dim(),
            h2.dim()
        ));
    }
    require_valid(h1)?;
    require_valid(h2)?;
    let integrated = |h: &SpectralMeasure, x: f64| -> f64 {
        h.atoms
            .iter()
            .zip(&h.masses)
            .map(|(a, m)| m * (x - a[0]).max(0.0))
            .sum()
    };
    let mut grid: Vec<f64> = h1
        .atoms
        .iter()
        .chain(&h2.atoms)
        .map(|a| a[0])
        .chain([0.0, 1.0])
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let tol = 1e-12;
    let (mut first_above, mut second_above) = (false, false);
    for x in grid {
        let d = integrated(h1, x) - integrated(h2, x);
        if d > tol {
            first_above = true;
        } else if d < -tol {
            second_above = true;
        }
    }
    Ok(match (first_above, second_above) {
        (false, false) => ConvexOrder::Equal,
        (true, false) => ConvexOrder::FirstDominates,
        (false, true) => ConvexOrder::SecondDominates,
        (true, true) => ConvexOrder::Incomparable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT5: f64 = 2.236_067_977_499_79;

    #[test]
    fn ell_examples() {
        let l = EllSpec::Logistic { alpha: 1.0, n: 3 };
        assert!((ell_eval(&l, &[1.0, 2.0, 3.0]).unwrap() - 6.0).abs() < 1e-12);
        let l = EllSpec::Logistic { alpha: 0.5, n: 2 };
        assert!((ell_eval(&l, &[1.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let h = EllSpec::FromSpectral(SpectralMeasure::comonotone(5).unwrap());
        assert!((ell_eval(&h, &[1.0; 5]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ell_rejects_negative_arguments() {
        let l = EllSpec::IndependenceEll(2);
        assert!(matches!(ell_eval(&l, &[1.0, -0.5]), Err(Error::Domain(_))));
        assert!(ell_eval(&l, &[1.0]).is_err());
    }

    #[test]
    fn gumbel_and_galambos_match_their_copulas() {
        // l(v) = -log C(exp(-v1), exp(-v2)) with the copulas written out directly.
        let (theta, a, b) = (2.5, 0.7, 0.4);
        let gumbel = |u1: f64, u2: f64| {
            u1.powf(1.0 - a)
                * u2.powf(1.0 - b)
                * (-((-a * u1.ln()).powf(theta) + (-b * u2.ln()).powf(theta)).powf(1.0 / theta))
                    .exp()
        };
        let galambos = |u1: f64, u2: f64| {
            u1 * u2
                * (((-a * u1.ln()).powf(-theta) + (-b * u2.ln()).powf(-theta)).powf(-1.0 / theta))
                    .exp()
        };
        for &(v1, v2) in &[(0.3f64, 1.2f64), (1.0, 1.0), (2.0, 0.1)] {
            let (u1, u2) = ((-v1).exp(), (-v2).exp());
            let gu = ell_eval(&EllSpec::GumbelBiv { theta, a, b }, &[v1, v2]).unwrap();
            assert!((gu + gumbel(u1, u2).ln()).abs() < 1e-12);
            let ga = ell_eval(&EllSpec::GalambosBiv { theta, a, b }, &[v1, v2]).unwrap();
            assert!((ga + galambos(u1, u2).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn cstar_examples() {
        assert!(
            (cstar_eval(&EllSpec::IndependenceEll(2), &[0.5, 0.5]).unwrap() - 0.25).abs() < 1e-15
        );
        assert!((cstar_eval(&EllSpec::ComonotoneEll(2), &[0.3, 0.7]).unwrap() - 0.3).abs() < 1e-15);
        let e = (-1.0f64).exp();
        let v = cstar_eval(&EllSpec::Logistic { alpha: 0.5, n: 2 }, &[e, e]).unwrap();
        assert!((v - 0.243_116_734_434_214_2).abs() < 1e-12);
        assert_eq!(
            cstar_eval(&EllSpec::IndependenceEll(2), &[0.0, 0.5]).unwrap(),
            0.0
        );
        assert!(cstar_eval(&EllSpec::IndependenceEll(2), &[1.1, 0.5]).is_err());
    }

    #[test]
    fn q_bound_examples() {
        let w = WeightVector::uniform(5);
        assert!((q_bound(1.0, &w).unwrap() - 1.0).abs() < 1e-15);
        assert!((q_bound(0.6, &w).unwrap() - 5f64.powf(-0.4)).abs() < 1e-12);
        assert!((q_bound(1.2, &w).unwrap() - 5f64.powf(0.2)).abs() < 1e-12);
        let w = WeightVector::new(vec![0.5, 1.5, 1.0]).unwrap();
        assert!((q_bound(1.0, &w).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn q_spectral_examples() {
        let w = WeightVector::uniform(5);
        let ind = SpectralMeasure::independence(5).unwrap();
        for g in [0.3, 0.6, 1.0, 2.0] {
            assert!((q_gamma_spectral(g, &ind, &w).unwrap() - 1.0).abs() < 1e-12);
        }
        let com = SpectralMeasure::comonotone(5).unwrap();
        let q = q_gamma_spectral(0.6, &com, &w).unwrap();
        assert!((q - 5f64.powf(-0.4)).abs() < 1e-12);
        assert!((q - q_bound(0.6, &w).unwrap()).abs() < 1e-12);
        assert!((q_gamma_spectral(1.0, &com, &w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn h_tail_ratio_examples() {
        let ind = SpectralMeasure::independence(5).unwrap();
        assert!((h_tail_ratio(2.0, &ind, &[1.0; 5]).unwrap() - 0.2).abs() < 1e-12);
        assert!((h_tail_ratio(1.0, &ind, &[1.0; 5]).unwrap() - 1.0).abs() < 1e-12);
        let com = SpectralMeasure::comonotone(5).unwrap();
        for g in [0.3, 1.0, 2.5] {
            assert!((h_tail_ratio(g, &com, &[1.0; 5]).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(h_tail_ratio(2.0, &ind, &[0.0; 5]).is_err());
    }

    #[test]
    fn bonferroni_ratio_examples() {
        let w = WeightVector::uniform(5);
        assert!((bonferroni_ratio(&EllSpec::IndependenceEll(5), &w).unwrap() - 1.0).abs() < 1e-15);
        assert!((bonferroni_ratio(&EllSpec::ComonotoneEll(5), &w).unwrap() - 5.0).abs() < 1e-15);
        let r = bonferroni_ratio(&EllSpec::Logistic { alpha: 0.5, n: 5 }, &w).unwrap();
        assert!((r - SQRT5).abs() < 1e-12);
    }

    #[test]
    fn power_ratio_examples() {
        assert!(
            (power_ratio(&EllSpec::IndependenceEll(2), &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15
        );
        assert!(
            (power_ratio(&EllSpec::ComonotoneEll(2), &[2.0, 3.0]).unwrap() - 5.0 / 3.0).abs()
                < 1e-15
        );
        let r = power_ratio(&EllSpec::Logistic { alpha: 0.5, n: 2 }, &[1.0, 1.0]).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(power_ratio(&EllSpec::IndependenceEll(2), &[1.0, 0.0]).is_err());
    }

    #[test]
    fn spectral_validation_examples() {
        let d = validate_spectral(&SpectralMeasure::independence(4).unwrap());
        assert!(d.passes);
        assert_eq!(d.total_mass, 4.0);
        assert_eq!(d.kind, SpectralKind::Independence);

        let d = validate_spectral(&SpectralMeasure::comonotone(4).unwrap());
        assert!(d.passes);
        assert_eq!(d.kind, SpectralKind::Comonotone);

        let h = SpectralMeasure::new(vec![vec![0.5, 0.5]], vec![1.0]).unwrap();
        let d = validate_spectral(&h);
        assert!(!d.passes);
        assert_eq!(d.moments, vec![0.5, 0.5]);
        assert!(q_gamma_spectral(1.0, &h, &WeightVector::uniform(2)).is_err());
    }

    #[test]
    fn off_simplex_atoms_are_rejected() {
        assert!(SpectralMeasure::new(vec![vec![0.5, 0.6]], vec![1.0]).is_err());
        assert!(SpectralMeasure::new(vec![vec![1.5, -0.5]], vec![1.0]).is_err());
        assert!(SpectralMeasure::new(vec![vec![0.5, 0.5]], vec![0.0]).is_err());
        assert!(SpectralMeasure::new(vec![vec![0.5, 0.5], vec![1.0]], vec![1.0, 1.0]).is_err());
    }

    fn two_atom(t: f64) -> SpectralMeasure {
        SpectralMeasure::new(vec![vec![t, 1.0 - t], vec![1.0 - t, t]], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn convex_order_extremes() {
        let ind = SpectralMeasure::independence(2).unwrap();
        let com = SpectralMeasure::comonotone(2).unwrap();
        assert_eq!(
            convex_order_bivariate(&ind, &com).unwrap(),
            ConvexOrder::FirstDominates
        );
        assert_eq!(
            convex_order_bivariate(&com, &ind).unwrap(),
            ConvexOrder::SecondDominates
        );
        assert_eq!(
            convex_order_bivariate(&ind, &ind).unwrap(),
            ConvexOrder::Equal
        );
        let h = two_atom(0.2);
        assert_eq!(convex_order_bivariate(&h, &h).unwrap(), ConvexOrder::Equal);
    }

    #[test]
    fn symmetric_two_atom_measures_are_ordered_by_spread() {
        // G for atoms {0.1, 0.9}: 0 | x-0.1 | 0.8+2(x-0.9); for {0.3, 0.7}: 0 | x-0.3 | 0.4+2(x-0.7).
        // The first is >= the second at every kink: no crossing.
        let wide = two_atom(0.1);
        let narrow = two_atom(0.3);
        assert_eq!(
            convex_order_bivariate(&wide, &narrow).unwrap(),
            ConvexOrder::FirstDominates
        );
    }

    #[test]
    fn crossing_measures_are_incomparable() {
        // First coordinates {0.25 (mass 4/3), 1 (mass 2/3)} vs {0.1, 0.9} (mass 1 each):
        // G1(0.2) = 0 < G2(0.2) = 0.1 but G1(1) - G2(1) = 0 and G1(0.9) = 0.8667 > G2(0.9) = 0.8.
        let a = SpectralMeasure::new(
            vec![vec![0.25, 0.75], vec![1.0, 0.0]],
            vec![4.0 / 3.0, 2.0 / 3.0],
        )
        .unwrap();
        assert!(validate_spectral(&a).passes);
        let b = two_atom(0.1);
        assert_eq!(
            convex_order_bivariate(&a, &b).unwrap(),
            ConvexOrder::Incomparable
        );
    }

    #[test]
    fn convex_order_needs_bivariate_valid_measures() {
        let three = SpectralMeasure::independence(3).unwrap();
        let two = SpectralMeasure::independence(2).unwrap();
        assert!(matches!(
            convex_order_bivariate(&three, &two),
            Err(Error::Domain(_))
        ));
        let bad = SpectralMeasure::new(vec![vec![0.5, 0.5]], vec![1.0]).unwrap();
        assert!(convex_order_bivariate(&bad, &two).is_err());
    }
}
