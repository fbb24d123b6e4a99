//! Special functions against oracles that share no code with the library:
//! composite Simpson quadrature of unnormalized densities, and bisection on
//! the resulting CDFs.

use proptest::prelude::*;
use tailfuse_core::distributions::{
    norm_cdf, norm_isf, norm_quantile, norm_sf, reg_inc_beta, t_quantile, StudentT,
};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Upper tail mass of `k` beyond `x > 0` relative to the half-line mass,
/// with `t = x e^v` so polynomial tails decay exponentially in `v`.
fn tail_fraction(k: impl Fn(f64) -> f64, x: f64, v_max: f64) -> f64 {
    let upper = simpson(|v| k(x * v.exp()) * x * v.exp(), 0.0, v_max, 400_000);
    let body = simpson(&k, 0.0, x, 20_000);
    upper / (body + upper)
}

fn t_kernel(nu: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| (1.0 + t * t / nu).powf(-(nu + 1.0) / 2.0)
}

fn gauss_kernel(t: f64) -> f64 {
    (-0.5 * t * t).exp()
}

fn oracle_t_sf(nu: f64, x: f64) -> f64 {
    0.5 * tail_fraction(t_kernel(nu), x, (40.0 / nu).max(5.0))
}

fn oracle_norm_cdf(x: f64) -> f64 {
    let half = simpson(gauss_kernel, 0.0, 40.0, 40_000);
    0.5 + 0.5 * simpson(gauss_kernel, 0.0, x, 20_000) / half
}

#[test]
fn quantile_oracles_reproduce_tabulated_values() {
    let z = bisect(oracle_norm_cdf, 0.975, 0.0, 10.0);
    assert!((z - 1.959964).abs() < 1e-6, "oracle z = {z}");
    let t5 = bisect(|x| 1.0 - oracle_t_sf(5.0, x), 0.975, 0.0, 20.0);
    assert!((t5 - 2.570582).abs() < 1e-6, "oracle t5 = {t5}");
}

#[test]
fn quantiles_match_bisection_oracle() {
    let z = norm_quantile(0.975).unwrap();
    let oracle = bisect(oracle_norm_cdf, 0.975, 0.0, 10.0);
    assert!((z - oracle).abs() < 1e-9);
    assert!((z - 1.959964).abs() < 1e-6);

    for (p, nu) in [
        (0.975, 5.0),
        (0.9, 1.0),
        (0.99, 2.5),
        (0.995, 0.6),
        (0.75, 30.0),
    ] {
        let q = t_quantile(p, nu).unwrap();
        let oracle = bisect(|x| 1.0 - oracle_t_sf(nu, x), p, 0.0, 1e6);
        assert!(
            (q - oracle).abs() < 1e-8 * oracle.max(1.0),
            "nu {nu} p {p}: {q} vs {oracle}"
        );
    }
    assert!((t_quantile(0.975, 5.0).unwrap() - 2.570582).abs() < 1e-6);
}

#[test]
fn t_survival_matches_quadrature_across_tail_indices() {
    for nu in [0.3, 0.6, 1.0, 1.2, 5.0, 40.0] {
        let t = StudentT::new(nu).unwrap();
        for x in [0.1, 1.0, 3.0, 25.0, 1e3] {
            let oracle = oracle_t_sf(nu, x);
            let got = t.sf(x);
            assert!(
                (got - oracle).abs() < 1e-9 * oracle,
                "nu {nu} x {x}: {got} vs {oracle}"
            );
        }
    }
}

#[test]
fn cauchy_survival_is_closed_form() {
    let t = StudentT::new(1.0).unwrap();
    for x in [0.5, 2.0, 100.0, 1e8] {
        let exact = 0.5 - f64::atan(x) / std::f64::consts::PI;
        assert!((t.sf(x) - exact).abs() < 1e-14_f64.max(1e-12 * exact));
    }
}

#[test]
fn normal_tail_matches_quadrature() {
    for x in [0.5, 2.0, 5.0, 9.0] {
        let oracle = 0.5 * tail_fraction(gauss_kernel, x, 5.0);
        assert!((norm_sf(x) - oracle).abs() < 1e-9 * oracle, "x {x}");
        assert!((norm_cdf(-x) - oracle).abs() < 1e-9 * oracle);
    }
}

#[test]
fn incomplete_beta_matches_quadrature() {
    for (a, b) in [(1.0, 1.0), (2.0, 3.0), (2.5, 1.5), (7.0, 2.0), (1.0, 12.0)] {
        // t = sin^2(phi) removes the endpoint singularities.
        let k = |phi: f64| 2.0 * phi.sin().powf(2.0 * a - 1.0) * phi.cos().powf(2.0 * b - 1.0);
        let total = simpson(k, 0.0, std::f64::consts::FRAC_PI_2, 200_000);
        for x in [0.05f64, 0.3, 0.5, 0.8, 0.99] {
            let oracle = simpson(k, 0.0, x.sqrt().asin(), 200_000) / total;
            let got = reg_inc_beta(a, b, x).unwrap();
            assert!(
                (got - oracle).abs() < 1e-9,
                "I_{x}({a},{b}) = {got} vs {oracle}"
            );
        }
    }
}

#[test]
fn invalid_arguments_are_rejected() {
    assert!(norm_quantile(0.0).is_err());
    assert!(norm_quantile(1.5).is_err());
    assert!(t_quantile(0.5, 0.0).is_err());
    assert!(StudentT::new(-1.0).is_err());
    assert!(reg_inc_beta(-1.0, 1.0, 0.5).is_err());
    assert!(reg_inc_beta(1.0, 1.0, 1.5).is_err());
}

proptest! {
    #[test]
    fn t_isf_inverts_sf(nu in 0.3f64..50.0, log_s in -250.0f64..-0.7) {
        let t = StudentT::new(nu).unwrap();
        let s = log_s.exp();
        let x = t.isf(s);
        prop_assume!(x.is_finite());
        let back = t.sf(x);
        prop_assert!((back - s).abs() <= 1e-10 * s, "sf(isf({s})) = {back}");
    }

    #[test]
    fn t_is_symmetric(nu in 0.3f64..50.0, x in -1e4f64..1e4) {
        let t = StudentT::new(nu).unwrap();
        prop_assert!((t.cdf(-x) - t.sf(x)).abs() <= 1e-15);
        prop_assert!((t.cdf(x) + t.sf(x) - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn t_sf_is_monotone(nu in 0.3f64..50.0, x in -1e3f64..1e3, dx in 1e-6f64..10.0) {
        let t = StudentT::new(nu).unwrap();
        prop_assert!(t.sf(x + dx) <= t.sf(x));
    }

    #[test]
    fn normal_isf_inverts_sf(log_s in -700.0f64..-0.7) {
        let s = log_s.exp();
        let x = norm_isf(s).unwrap();
        prop_assert!((norm_sf(x) - s).abs() <= 1e-12 * s);
    }

    #[test]
    fn incomplete_beta_reflection(a in 0.2f64..20.0, b in 0.2f64..20.0, x in 0.001f64..0.999) {
        let l = reg_inc_beta(a, b, x).unwrap();
        let r = reg_inc_beta(b, a, 1.0 - x).unwrap();
        prop_assert!((l + r - 1.0).abs() < 1e-12);
    }
}
