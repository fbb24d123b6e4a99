//! Dependence models for null p-value vectors.
//!
//! Every model produces a vector `P` with standard uniform marginals such
//! that `(1 - P_1, ..., 1 - P_n)` follows the named MRV copula. For the
//! survival Clayton model this means `P` itself is Clayton distributed.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::distributions::{chi_square_sample, ln_gamma_sample, norm_sf, StudentT};
use crate::error::{domain, Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix,
/// stored row-major as an `n * n` array.
pub fn cholesky(n: usize, matrix: &[f64]) -> Result<Vec<f64>> {
    if matrix.len() != n * n {
        return Err(Error::Usage(format!(
            "expected {} entries for a {n}x{n} matrix, got {}",
            n * n,
            matrix.len()
        )));
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = matrix[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return Err(Error::Factorization {
                        pivot: i,
                        value: sum,
                    });
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// A correlation matrix with its Cholesky factor cached.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    entries: Vec<f64>,
    factor: Vec<f64>,
}

impl CorrelationMatrix {
    /// `entries` is row-major. The matrix must be symmetric with unit
    /// diagonal and positive definite.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Construction(
                "correlation matrix must be at least 1x1".into(),
            ));
        }
        if entries.len() != n * n {
            return Err(Error::Construction(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            if (entries[i * n + i] - 1.0).abs() > 1e-12 {
                return Err(Error::Construction(format!(
                    "diagonal entry {i} is {}, expected 1",
                    entries[i * n + i]
                )));
            }
            for j in 0..i {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if (a - b).abs() > 1e-12 || a.abs() > 1.0 || a.is_nan() {
                    return Err(Error::Construction(format!(
                        "entries ({i},{j}) = {a} and ({j},{i}) = {b} are not a valid correlation"
                    )));
                }
            }
        }
        let factor = cholesky(n, &entries)?;
        Ok(Self { n, entries, factor })
    }

    /// Matrix with unit diagonal and every off-diagonal entry equal to `rho`.
    pub fn equicorrelated(n: usize, rho: f64) -> Result<Self> {
        let mut entries = vec![rho; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self::new(n, entries)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::equicorrelated(n, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn factor(&self) -> &[f64] {
        &self.factor
    }

    /// Replaces `z` by `L z`. Rows are processed bottom-up so each row only
    /// reads entries that have not been overwritten yet.
    fn apply_factor(&self, z: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let row = &self.factor[i * n..i * n + i + 1];
            z[i] = row.iter().zip(&z[..=i]).map(|(l, v)| l * v).sum();
        }
    }
}

/// Copula family used by Kendall tau parameterizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopulaFamily {
    Clayton,
    StudentT { nu: f64 },
    Gaussian,
}

impl CopulaFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::StudentT { .. } => "t",
            CopulaFamily::Gaussian => "gaussian",
        }
    }
}

/// Dependence parameter giving pairwise Kendall tau `tau`:
/// `theta = 2 tau / (1 - tau)` for Clayton and `rho = sin(pi tau / 2)` for
/// the elliptical families.
pub fn dependence_from_tau(family: CopulaFamily, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return domain(format!("Kendall tau must lie in (0, 1), got {tau}"));
    }
    Ok(match family {
        CopulaFamily::Clayton => 2.0 * tau / (1.0 - tau),
        CopulaFamily::StudentT { .. } | CopulaFamily::Gaussian => {
            (std::f64::consts::FRAC_PI_2 * tau).sin()
        }
    })
}

/// Student t copula with its marginal t distribution precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct TCopula {
    nu: f64,
    corr: CorrelationMatrix,
    marginal: StudentT,
}

impl TCopula {
    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn correlation(&self) -> &CorrelationMatrix {
        &self.corr
    }
}

/// Clayton copula for the p-vector, i.e. survival Clayton for its complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaytonCopula {
    theta: f64,
    n: usize,
}

impl ClaytonCopula {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `(sum_i u_i^(-theta) - (n - 1))^(-1/theta)`.
    pub fn cdf(&self, u: &[f64]) -> f64 {
        if u.iter().any(|&x| x <= 0.0) {
            return 0.0;
        }
        let s: f64 = u.iter().map(|&x| x.powf(-self.theta)).sum();
        (s - (u.len() as f64 - 1.0)).powf(-1.0 / self.theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureCopula {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    components: Vec<CopulaModel>,
}

impl MixtureCopula {
    pub fn components(&self) -> impl Iterator<Item = (f64, &CopulaModel)> {
        self.weights.iter().copied().zip(&self.components)
    }
}

/// A sampleable dependence model for an `n`-dimensional null p-value vector.
#[derive(Debug, Clone, PartialEq)]
pub enum CopulaModel {
    Independence(usize),
    Comonotone(usize),
    Gaussian(CorrelationMatrix),
    StudentT(TCopula),
    SurvClayton(ClaytonCopula),
    Mixture(MixtureCopula),
}

impl CopulaModel {
    pub fn independence(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(CopulaModel::Independence(n))
    }

    pub fn comonotone(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(CopulaModel::Comonotone(n))
    }

    pub fn gaussian(corr: CorrelationMatrix) -> Self {
        CopulaModel::Gaussian(corr)
    }

    pub fn student_t(nu: f64, corr: CorrelationMatrix) -> Result<Self> {
        let marginal = StudentT::new(nu).map_err(|e| Error::Construction(e.to_string()))?;
        Ok(CopulaModel::StudentT(TCopula { nu, corr, marginal }))
    }

    pub fn clayton(theta: f64, n: usize) -> Result<Self> {
        check_dim(n)?;
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::Construction(format!(
                "Clayton parameter must be positive, got {theta}"
            )));
        }
        Ok(CopulaModel::SurvClayton(ClaytonCopula { theta, n }))
    }

    /// Finite mixture; weights must be positive and sum to one.
    pub fn mixture(parts: Vec<(f64, CopulaModel)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Construction("mixture has no components".into()));
        }
        let n = parts[0].1.dim();
        let mut weights = Vec::with_capacity(parts.len());
        let mut components = Vec::with_capacity(parts.len());
        for (w, c) in parts {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Construction(format!(
                    "mixture weight {w} is not positive"
                )));
            }
            if c.dim() != n {
                return Err(Error::Construction(format!(
                    "mixture components have dimensions {n} and {}",
                    c.dim()
                )));
            }
            weights.push(w);
            components.push(c);
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Construction(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(CopulaModel::Mixture(MixtureCopula {
            weights,
            cumulative,
            components,
        }))
    }

    /// Model with pairwise Kendall tau `tau` in `[0, 1]`; the endpoints map
    /// to independence and comonotonicity. Elliptical families use an
    /// equicorrelated matrix.
    pub fn from_tau(family: CopulaFamily, n: usize, tau: f64) -> Result<Self> {
        if tau == 0.0 {
            return Self::independence(n);
        }
        if tau == 1.0 {
            return Self::comonotone(n);
        }
        let param = dependence_from_tau(family, tau)?;
        match family {
            CopulaFamily::Clayton => Self::clayton(param, n),
            CopulaFamily::StudentT { nu } => {
                Self::student_t(nu, CorrelationMatrix::equicorrelated(n, param)?)
            }
            CopulaFamily::Gaussian => {
                Ok(Self::gaussian(CorrelationMatrix::equicorrelated(n, param)?))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            CopulaModel::Independence(n) | CopulaModel::Comonotone(n) => *n,
            CopulaModel::Gaussian(c) => c.dim(),
            CopulaModel::StudentT(t) => t.corr.dim(),
            CopulaModel::SurvClayton(c) => c.n,
            CopulaModel::Mixture(m) => m.components[0].dim(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CopulaModel::Independence(_) => "independence",
            CopulaModel::Comonotone(_) => "comonotone",
            CopulaModel::Gaussian(_) => "gaussian",
            CopulaModel::StudentT(_) => "t",
            CopulaModel::SurvClayton(_) => "clayton",
            CopulaModel::Mixture(_) => "mixture",
        }
    }

    /// Draws one null p-value vector.
    pub fn sample_null_pvalues<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_into(rng, &mut out);
        out
    }

    /// Fills `out` (of length `dim()`) with one null p-value vector.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        match self {
            CopulaModel::Independence(_) => {
                for p in out.iter_mut() {
                    *p = rng.sample(Open01);
                }
            }
            CopulaModel::Comonotone(_) => {
                let u: f64 = rng.sample(Open01);
                out.fill(u);
            }
            CopulaModel::Gaussian(corr) => {
                for z in out.iter_mut() {
                    *z = rng.sample(StandardNormal);
                }
                corr.apply_factor(out);
                for p in out.iter_mut() {
                    *p = norm_sf(*p);
                }
            }
            CopulaModel::StudentT(t) => {
                for z in out.iter_mut() {
                    *z = rng.sample(StandardNormal);
                }
                t.corr.apply_factor(out);
                let scale = (t.nu / chi_square_sample(t.nu, rng)).sqrt();
                for p in out.iter_mut() {
                    *p = t.marginal.sf(*p * scale);
                }
            }
            CopulaModel::SurvClayton(c) => {
                // Frailty construction: U_i = (1 + E_i / V)^(-1/theta) with
                // V ~ Gamma(1/theta), carried in logs so tiny V cannot underflow.
                let ln_v = ln_gamma_sample(1.0 / c.theta, rng);
                let inv_v = (-ln_v).exp();
                let inv_theta = 1.0 / c.theta;
                for p in out.iter_mut() {
                    let e: f64 = rng.sample(Exp1);
                    let r = e * inv_v;
                    let log_term = if r.is_finite() {
                        r.ln_1p()
                    } else {
                        e.ln() - ln_v
                    };
                    *p = (-inv_theta * log_term).exp();
                }
            }
            CopulaModel::Mixture(m) => {
                let u: f64 = rng.random();
                let k = m
                    .cumulative
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(m.components.len() - 1);
                m.components[k].sample_into(rng, out);
            }
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Construction("dimension must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Analytic CDF of the p-vector's copula, for the models that have one.
pub fn copula_cdf(model: &CopulaModel, u: &[f64]) -> Result<f64> {
    if u.len() != model.dim() {
        return Err(Error::Usage(format!(
            "point has {} coordinates, copula has dimension {}",
            u.len(),
            model.dim()
        )));
    }
    if let Some(x) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return domain(format!("copula argument {x} outside [0, 1]"));
    }
    match model {
        CopulaModel::Independence(_) => Ok(u.iter().product()),
        CopulaModel::Comonotone(_) => Ok(u.iter().copied().fold(1.0, f64::min)),
        CopulaModel::SurvClayton(c) => Ok(c.cdf(u)),
        CopulaModel::Mixture(m) => m
            .components()
            .map(|(w, c)| copula_cdf(c, u).map(|v| w * v))
            .sum(),
        CopulaModel::Gaussian(_) => Err(Error::UnsupportedAnalyticCdf("gaussian")),
        CopulaModel::StudentT(_) => Err(Error::UnsupportedAnalyticCdf("t")),
    }
}

/// Kendall's tau of paired samples in `O(m log m)` (Knight's algorithm).
/// Ties are assumed absent, which holds almost surely for continuous data.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Usage(format!(
            "{} vs {} observations",
            x.len(),
            y.len()
        )));
    }
    let m = x.len();
    if m < 2 {
        return domain("Kendall tau needs at least two observations");
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    let mut ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; m];
    let discordant = count_inversions(&mut ys, &mut buf);
    let pairs = (m as f64) * (m as f64 - 1.0) / 2.0;
    Ok(1.0 - 2.0 * discordant as f64 / pairs)
}

fn count_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let m = v.len();
    if m < 2 {
        return 0;
    }
    let mid = m / 2;
    let mut count = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        count_inversions(left, bl) + count_inversions(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < m {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + m - j].copy_from_slice(&v[j..m]);
    v.copy_from_slice(&buf[..m]);
    count
}

/// Empirical Kendall tau between coordinates `i` and `j` of row-major draws
/// with `dim` columns, using at most the first `cap` rows.
pub fn empirical_kendall_tau(
    draws: &[f64],
    dim: usize,
    i: usize,
    j: usize,
    cap: usize,
) -> Result<f64> {
    if dim == 0 || i >= dim || j >= dim {
        return Err(Error::Usage(format!(
            "coordinates ({i},{j}) out of range for dimension {dim}"
        )));
    }
    let rows = (draws.len() / dim).min(cap);
    let x: Vec<f64> = (0..rows).map(|r| draws[r * dim + i]).collect();
    let y: Vec<f64> = (0..rows).map(|r| draws[r * dim + j]).collect();
    kendall_tau(&x, &y)
}

/// Default row cap for [`empirical_kendall_tau`].
pub const KENDALL_CAP: usize = 20_000;
