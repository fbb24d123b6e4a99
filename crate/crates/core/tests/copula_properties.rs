use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tailfuse_core::copulas::{copula_cdf, dependence_from_tau, kendall_tau};
use tailfuse_core::{CopulaFamily, CopulaModel, CorrelationMatrix, Error};

fn draws(model: &CopulaModel, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| model.sample_null_pvalues(&mut rng))
        .collect()
}

/// Kolmogorov-Smirnov distance of a sample to U(0, 1).
fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / m).abs().max(((i + 1) as f64 / m - x).abs()))
        .fold(0.0, f64::max)
}

fn models(n: usize) -> Vec<CopulaModel> {
    vec![
        CopulaModel::independence(n).unwrap(),
        CopulaModel::comonotone(n).unwrap(),
        CopulaModel::from_tau(CopulaFamily::Gaussian, n, 0.4).unwrap(),
        CopulaModel::from_tau(CopulaFamily::StudentT { nu: 5.0 }, n, 0.6).unwrap(),
        CopulaModel::from_tau(CopulaFamily::Clayton, n, 0.7).unwrap(),
        CopulaModel::clayton(40.0, n).unwrap(),
        CopulaModel::mixture(vec![
            (0.3, CopulaModel::comonotone(n).unwrap()),
            (
                0.7,
                CopulaModel::from_tau(CopulaFamily::Clayton, n, 0.2).unwrap(),
            ),
        ])
        .unwrap(),
    ]
}

#[test]
fn marginals_are_uniform() {
    // 1.63 / sqrt(m) is the 1% KS critical value; seeds are fixed.
    let m = 20_000;
    let crit = 1.63 / (m as f64).sqrt();
    for model in models(3) {
        let d = draws(&model, m, 11);
        for j in 0..3 {
            let ks = ks_uniform(d.iter().map(|row| row[j]).collect());
            assert!(ks < crit, "{} coordinate {j}: KS {ks}", model.name());
        }
        assert!(d.iter().flatten().all(|&p| (0.0..=1.0).contains(&p)));
    }
}

fn pairwise_tau(model: &CopulaModel, m: usize, seed: u64) -> f64 {
    let d = draws(model, m, seed);
    let x: Vec<f64> = d.iter().map(|r| r[0]).collect();
    let y: Vec<f64> = d.iter().map(|r| r[1]).collect();
    kendall_tau(&x, &y).unwrap()
}

#[test]
fn kendall_parameterization_round_trips() {
    for family in [
        CopulaFamily::Clayton,
        CopulaFamily::StudentT { nu: 5.0 },
        CopulaFamily::Gaussian,
    ] {
        for tau in [0.2, 0.5, 0.8] {
            let model = CopulaModel::from_tau(family, 3, tau).unwrap();
            let t = pairwise_tau(&model, 100_000, 5);
            assert!(
                (t - tau).abs() < 0.015,
                "{}: tau {tau} -> {t}",
                family.name()
            );
        }
    }
}

#[test]
fn weak_clayton_is_nearly_independent() {
    let model = CopulaModel::clayton(0.01, 2).unwrap();
    assert!(pairwise_tau(&model, 100_000, 9).abs() < 0.02);
}

#[test]
fn parameter_maps() {
    assert!((dependence_from_tau(CopulaFamily::Clayton, 0.5).unwrap() - 2.0).abs() < 1e-15);
    let rho = dependence_from_tau(CopulaFamily::StudentT { nu: 5.0 }, 0.5).unwrap();
    assert!((rho - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert!(dependence_from_tau(CopulaFamily::Clayton, 1.0).is_err());
    assert!(matches!(
        CopulaModel::from_tau(CopulaFamily::Clayton, 4, 0.0),
        Ok(CopulaModel::Independence(4))
    ));
    assert!(matches!(
        CopulaModel::from_tau(CopulaFamily::Gaussian, 4, 1.0),
        Ok(CopulaModel::Comonotone(4))
    ));
}

#[test]
fn comonotone_coordinates_coincide() {
    for row in draws(&CopulaModel::comonotone(6).unwrap(), 1000, 2) {
        assert!(row.iter().all(|&p| p == row[0]));
    }
}

fn empirical_cdf(d: &[Vec<f64>], u: &[f64]) -> f64 {
    let hits = d
        .iter()
        .filter(|r| r.iter().zip(u).all(|(p, q)| p <= q))
        .count();
    hits as f64 / d.len() as f64
}

#[test]
fn sampled_clayton_follows_its_cdf() {
    let model = CopulaModel::clayton(2.0, 3).unwrap();
    let d = draws(&model, 200_000, 21);
    for u in [[0.1, 0.1, 0.1], [0.3, 0.5, 0.9], [0.05, 0.8, 0.2]] {
        let exact = copula_cdf(&model, &u).unwrap();
        let emp = empirical_cdf(&d, &u);
        let se = (exact * (1.0 - exact) / d.len() as f64).sqrt();
        assert!((emp - exact).abs() < 4.0 * se, "{u:?}: {emp} vs {exact}");
    }
}

#[test]
fn mixture_follows_weighted_law() {
    let w = 0.35;
    let model = CopulaModel::mixture(vec![
        (w, CopulaModel::comonotone(2).unwrap()),
        (1.0 - w, CopulaModel::independence(2).unwrap()),
    ])
    .unwrap();
    let d = draws(&model, 200_000, 3);
    for u in [0.05, 0.2, 0.5] {
        let exact = w * u + (1.0 - w) * u * u;
        assert!((copula_cdf(&model, &[u, u]).unwrap() - exact).abs() < 1e-15);
        let emp = empirical_cdf(&d, &[u, u]);
        let se = (exact * (1.0 - exact) / d.len() as f64).sqrt();
        assert!((emp - exact).abs() < 4.0 * se, "u {u}: {emp} vs {exact}");
    }
}

#[test]
fn elliptical_cdf_is_not_analytic() {
    let model = CopulaModel::from_tau(CopulaFamily::Gaussian, 2, 0.3).unwrap();
    assert!(matches!(
        copula_cdf(&model, &[0.5, 0.5]),
        Err(Error::UnsupportedAnalyticCdf(_))
    ));
}

#[test]
fn invalid_models_are_rejected() {
    assert!(CopulaModel::clayton(0.0, 3).is_err());
    assert!(CopulaModel::independence(0).is_err());
    assert!(CorrelationMatrix::new(2, vec![1.0, 1.5, 1.5, 1.0]).is_err());
    assert!(CorrelationMatrix::new(2, vec![1.0, 0.2, 0.3, 1.0]).is_err());
    // Equicorrelation below -1/(n-1) is not positive definite.
    assert!(matches!(
        CorrelationMatrix::equicorrelated(3, -0.6),
        Err(Error::Factorization { .. })
    ));
    assert!(CopulaModel::mixture(vec![(0.5, CopulaModel::comonotone(2).unwrap())]).is_err());
    assert!(CopulaModel::mixture(vec![
        (0.5, CopulaModel::comonotone(2).unwrap()),
        (0.5, CopulaModel::comonotone(3).unwrap()),
    ])
    .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn draws_are_probabilities(tau in 0.01f64..0.99, n in 1usize..8, seed in any::<u64>()) {
        for family in [CopulaFamily::Clayton, CopulaFamily::StudentT { nu: 5.0 }, CopulaFamily::Gaussian] {
            let model = CopulaModel::from_tau(family, n, tau).unwrap();
            prop_assert_eq!(model.dim(), n);
            for row in draws(&model, 50, seed) {
                prop_assert_eq!(row.len(), n);
                prop_assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
            }
        }
    }

    #[test]
    fn clayton_cdf_is_a_copula(theta in 0.05f64..30.0, u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let model = CopulaModel::clayton(theta, 2).unwrap();
        let c = copula_cdf(&model, &[u, v]).unwrap();
        // Frechet-Hoeffding bounds and uniform margins.
        prop_assert!(c <= u.min(v) + 1e-12);
        prop_assert!(c >= (u + v - 1.0).max(0.0) - 1e-12);
        prop_assert!((copula_cdf(&model, &[u, 1.0]).unwrap() - u).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_draws(seed in any::<u64>(), tau in 0.05f64..0.95) {
        let model = CopulaModel::from_tau(CopulaFamily::StudentT { nu: 5.0 }, 4, tau).unwrap();
        prop_assert_eq!(draws(&model, 20, seed), draws(&model, 20, seed));
    }
}
