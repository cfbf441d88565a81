//! Small order-statistics helpers shared by the spectral, evaluation, and
//! optimization modules.

/// Median of a sample (averages the two central values for even sizes).
/// Empty input returns NaN.
#[must_use]
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in samples"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Empirical quantile with linear interpolation between order statistics;
/// `p` is clamped to [0, 1]. Input must be sorted ascending.
#[must_use]
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let p = p.clamp(0.0, 1.0);
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Fraction of sorted sample values at or below `x` (the empirical CDF).
#[must_use]
pub fn cdf_at_sorted(sorted: &[f64], x: f64) -> f64 {
    let k = sorted.partition_point(|&v| v <= x);
    k as f64 / sorted.len() as f64
}

/// Sample mean; NaN for empty input.
#[must_use]
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// True when the empirical CDF of `a` lies at or above the CDF of `b`
/// everywhere, meaning `a`'s values are stochastically smaller. Checked via
/// matched order statistics, which is equivalent for equal sample sizes and
/// conservative otherwise.
#[must_use]
pub fn cdf_dominates(a: &[f64], b: &[f64]) -> bool {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    sb.sort_by(|x, y| x.partial_cmp(y).expect("no NaN"));
    let n = sa.len().min(sb.len());
    (0..n).all(|i| {
        let pa = (i as f64 + 0.5) / sa.len() as f64;
        let qa = quantile_sorted(&sa, pa);
        let qb = quantile_sorted(&sb, pa);
        qa <= qb
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_handles_odd_even_and_empty() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn quantiles_interpolate_between_order_statistics() {
        let sorted = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(quantile_sorted(&sorted, 0.0), 0.0);
        assert_eq!(quantile_sorted(&sorted, 1.0), 3.0);
        assert_eq!(quantile_sorted(&sorted, 0.5), 1.5);
    }

    #[test]
    fn cdf_counts_values_at_or_below() {
        let sorted = [1.0, 2.0, 2.0, 5.0];
        assert_eq!(cdf_at_sorted(&sorted, 0.5), 0.0);
        assert_eq!(cdf_at_sorted(&sorted, 2.0), 0.75);
        assert_eq!(cdf_at_sorted(&sorted, 5.0), 1.0);
    }

    #[test]
    fn dominance_detects_stochastically_smaller_samples() {
        let small = [0.01, 0.02, 0.03, 0.04];
        let large = [0.1, 0.2, 0.3, 0.4];
        assert!(cdf_dominates(&small, &large));
        assert!(!cdf_dominates(&large, &small));
        let mixed = [0.001, 0.5, 0.6, 0.7];
        assert!(!cdf_dominates(&mixed, &large), "crossing CDFs do not dominate");
    }
}
