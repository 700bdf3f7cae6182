use alloc::vec::Vec;

use crate::error::StatsError;
use crate::math::{exp, sqrt};

/// Two-sample Kolmogorov-Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// Largest gap between the empirical CDFs.
    pub d: f64,
    /// Asymptotic two-sided p-value. Conservative for discrete data.
    pub p: f64,
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov
/// distribution and the usual small-sample correction of the effective size.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult, StatsError> {
    if x.is_empty() || y.is_empty() {
        return Err(StatsError::EmptySample);
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(StatsError::NotANumber);
    }
    let mut a: Vec<f64> = x.to_vec();
    let mut b: Vec<f64> = y.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let en = sqrt(n * m / (n + m));
    let p = kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
    Ok(KsResult { d, p })
}

/// `P(K > lambda)` for the Kolmogorov distribution.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = sign * exp(-2.0 * jf * jf * lambda * lambda);
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let r = ks_two_sample(&x, &x).unwrap();
        assert_eq!(r.d, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn disjoint_samples() {
        let x: Vec<f64> = (0..200).map(|k| k as f64).collect();
        let y: Vec<f64> = (0..200).map(|k| 1000.0 + k as f64).collect();
        let r = ks_two_sample(&x, &y).unwrap();
        assert_eq!(r.d, 1.0);
        assert!(r.p < 1e-12);
    }

    #[test]
    fn kolmogorov_reference_point() {
        // P(K > 1.36) is the familiar 5% critical value.
        assert!((kolmogorov_sf(1.358) - 0.05).abs() < 1e-3);
    }
}
