use crate::distributions::norm_quantile;

/// Wilson score interval for a binomial proportion at confidence `level`.
pub fn wilson_ci(successes: u64, trials: u64, level: f64) -> (f64, f64) {
    debug_assert!(successes <= trials);
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = norm_quantile(0.5 + level / 2.0).unwrap_or(1.959_963_984_540_054);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The bounds are exact at the extremes; avoid rounding just inside them.
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_successes() {
        let (lo, hi) = wilson_ci(0, 100, 0.95);
        assert_eq!(lo, 0.0);
        // z^2 / (n + z^2)
        let z2 = 1.959_963_984_540_054f64.powi(2);
        assert!((hi - z2 / (100.0 + z2)).abs() < 1e-9);
        assert!((hi - 0.037).abs() < 5e-4);
    }

    #[test]
    fn half_is_symmetric() {
        let (lo, hi) = wilson_ci(50, 100, 0.95);
        assert!(((lo + hi) / 2.0 - 0.5).abs() < 1e-12);
        assert!(lo < 0.5 && hi > 0.5);
    }

    #[test]
    fn all_successes() {
        let (lo, hi) = wilson_ci(100, 100, 0.95);
        assert_eq!(hi, 1.0);
        assert!(lo < 1.0);
    }

    #[test]
    fn contains_estimate() {
        for k in [1, 7, 500, 999] {
            let (lo, hi) = wilson_ci(k, 1000, 0.99);
            let p = k as f64 / 1000.0;
            assert!(lo <= p && p <= hi);
        }
    }
}
