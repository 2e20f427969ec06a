//! Estimators and hypothesis tests shared by the verification layer:
//! summary statistics, Kolmogorov-Smirnov tests, chi-square goodness of fit,
//! and weighted least squares on log-log grids.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the sample mean.
pub fn stderr_of_mean(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Median; averages the middle pair for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::InvalidParameter("KS test needs samples".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    Ok(d)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic_two_sample(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidParameter("KS test needs samples".into()));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).unwrap());
    b.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    Ok(d)
}

/// Asymptotic Kolmogorov p-value: P[sup |B(F)| > x] for the scaled statistic
/// `x = d * sqrt(n_eff)`, by the alternating series.
pub fn kolmogorov_pvalue(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..101 {
        let term = (-2.0 * (k as f64) * (k as f64) * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS p-value (asymptotic).
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    kolmogorov_pvalue(d * (n as f64).sqrt())
}

/// Two-sample KS p-value (asymptotic, effective sample size).
pub fn ks_pvalue_two_sample(d: f64, n1: usize, n2: usize) -> f64 {
    let n_eff = (n1 as f64 * n2 as f64) / (n1 as f64 + n2 as f64);
    kolmogorov_pvalue(d * n_eff.sqrt())
}

/// Chi-square goodness-of-fit p-value for observed counts against expected
/// counts (same total). `dof_reduction` subtracts extra degrees of freedom
/// beyond the one lost to the total.
pub fn chi_square_pvalue(observed: &[u64], expected: &[f64], dof_reduction: usize) -> Result<f64> {
    if observed.len() != expected.len() || observed.len() < 2 {
        return Err(Error::InvalidParameter(
            "chi-square needs matching bins, at least two".into(),
        ));
    }
    let mut stat = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        if e <= 0.0 {
            return Err(Error::InvalidParameter(
                "chi-square expected counts must be positive".into(),
            ));
        }
        let diff = o as f64 - e;
        stat += diff * diff / e;
    }
    let dof = observed.len() - 1 - dof_reduction;
    if dof == 0 {
        return Err(Error::InvalidParameter("chi-square with zero dof".into()));
    }
    let chi = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidParameter(format!("chi-square dof: {e}")))?;
    Ok(1.0 - chi.cdf(stat))
}

/// Weighted least-squares line fit `y = intercept + slope * x`. Weights are
/// inverse variances of the `y` values.
pub fn weighted_linear_fit(xs: &[f64], ys: &[f64], weights: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() != weights.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "linear fit needs matching x, y, w of length at least 2".into(),
        ));
    }
    let w: f64 = weights.iter().sum();
    let wx: f64 = xs.iter().zip(weights).map(|(x, wi)| wi * x).sum();
    let wy: f64 = ys.iter().zip(weights).map(|(y, wi)| wi * y).sum();
    let wxx: f64 = xs.iter().zip(weights).map(|(x, wi)| wi * x * x).sum();
    let wxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(weights)
        .map(|((x, y), wi)| wi * x * y)
        .sum();
    let det = w * wxx - wx * wx;
    if det.abs() < 1e-300 {
        return Err(Error::InvalidParameter(
            "linear fit is degenerate (x values coincide)".into(),
        ));
    }
    let slope = (w * wxy - wx * wy) / det;
    let intercept = (wy - slope * wx) / w;
    Ok((intercept, slope))
}

/// Ordinary least-squares line fit.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    weighted_linear_fit(xs, ys, &vec![1.0; xs.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use approx::assert_abs_diff_eq;

    #[test]
    fn summary_statistics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_abs_diff_eq!(mean(&xs), 2.5);
        assert_abs_diff_eq!(variance(&xs), 5.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(median(&xs), 2.5);
        assert_abs_diff_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn ks_accepts_true_uniform_and_rejects_squared() {
        let mut rng = SplitMix64::new(1);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.next_f64()).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(ks_pvalue(d, xs.len()) > 0.01);
        // x^2 of a uniform has CDF sqrt, so testing against uniform fails.
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let d = ks_statistic(&ys, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(ks_pvalue(d, ys.len()) < 1e-6);
    }

    #[test]
    fn ks_two_sample_null_and_alternative() {
        let mut rng = SplitMix64::new(9);
        let xs: Vec<f64> = (0..8_000).map(|_| rng.next_exp()).collect();
        let ys: Vec<f64> = (0..12_000).map(|_| rng.next_exp()).collect();
        let d = ks_statistic_two_sample(&xs, &ys).unwrap();
        assert!(ks_pvalue_two_sample(d, xs.len(), ys.len()) > 0.01);
        let zs: Vec<f64> = (0..12_000).map(|_| 1.25 * rng.next_exp()).collect();
        let d = ks_statistic_two_sample(&xs, &zs).unwrap();
        assert!(ks_pvalue_two_sample(d, xs.len(), zs.len()) < 1e-4);
    }

    #[test]
    fn kolmogorov_tail_reference_values() {
        // K(1.36) ~ 0.0505 and K(1.63) ~ 0.0102, the classic critical points.
        assert_abs_diff_eq!(kolmogorov_pvalue(1.36), 0.0505, epsilon = 3e-3);
        assert_abs_diff_eq!(kolmogorov_pvalue(1.63), 0.0102, epsilon = 1e-3);
        assert_abs_diff_eq!(kolmogorov_pvalue(0.0), 1.0);
    }

    #[test]
    fn chi_square_detects_bias() {
        // Fair die, fair counts.
        let observed = [95u64, 105, 99, 102, 98, 101];
        let expected = [100.0; 6];
        assert!(chi_square_pvalue(&observed, &expected, 0).unwrap() > 0.05);
        let biased = [200u64, 80, 80, 80, 80, 80];
        assert!(chi_square_pvalue(&biased, &expected, 0).unwrap() < 1e-6);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (b, a) = linear_fit(&xs, &ys).unwrap();
        assert_abs_diff_eq!(b, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a, -0.5, epsilon = 1e-12);
        // Weighting ignores an outlier with zero weight.
        let ys2 = [2.0, 1.5, 100.0, 0.5];
        let (b, a) = weighted_linear_fit(&xs, &ys2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(b, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a, -0.5, epsilon = 1e-12);
    }
}
