use alloc::vec;
use alloc::vec::Vec;

use crate::error::StatsError;
use crate::math::{normal_sf, sqrt};

/// Largest combined sample size for which exact p-values are enumerated.
pub const EXACT_LIMIT: usize = 20;

/// Direction of the alternative hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alternative {
    /// The two distributions differ in location.
    #[default]
    TwoSided,
    /// `x` tends to be smaller than `y`.
    Less,
    /// `x` tends to be larger than `y`.
    Greater,
}

/// How a p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PMethod {
    /// Enumeration of the null distribution of `U`.
    Exact,
    /// Normal approximation with tie and continuity corrections.
    Normal,
}

/// Outcome of a rank-sum test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSum {
    /// Mann-Whitney `U` of the first sample: pairs with `x > y`, plus half
    /// the tied pairs.
    pub u: f64,
    /// p-value for the requested alternative.
    pub p: f64,
    /// How `p` was computed.
    pub method: PMethod,
}

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) test.
///
/// Exact when `|x| + |y| <= 20` and there are no ties, otherwise the normal
/// approximation with tie-corrected variance and continuity correction.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> Result<RankSum, StatsError> {
    rank_sum_test(x, y, Alternative::TwoSided)
}

/// Rank-sum test with a chosen alternative; method chosen as in
/// [`wilcoxon_rank_sum`].
pub fn rank_sum_test(x: &[f64], y: &[f64], alt: Alternative) -> Result<RankSum, StatsError> {
    let ranked = Ranked::new(x, y)?;
    if x.len() + y.len() <= EXACT_LIMIT && !ranked.has_ties() {
        Ok(ranked.exact(alt))
    } else {
        Ok(ranked.normal(alt))
    }
}

/// Rank-sum test forced onto the normal approximation.
pub fn rank_sum_normal(x: &[f64], y: &[f64], alt: Alternative) -> Result<RankSum, StatsError> {
    Ok(Ranked::new(x, y)?.normal(alt))
}

/// Rank-sum test by exact enumeration. `None` when the samples contain ties
/// or exceed [`EXACT_LIMIT`] combined.
pub fn rank_sum_exact(x: &[f64], y: &[f64], alt: Alternative) -> Result<Option<RankSum>, StatsError> {
    let ranked = Ranked::new(x, y)?;
    Ok((x.len() + y.len() <= EXACT_LIMIT && !ranked.has_ties()).then(|| ranked.exact(alt)))
}

/// Midranks of the pooled sample, 1-based.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

struct Ranked {
    n: usize,
    m: usize,
    u: f64,
    /// Sum over tie groups of `t^3 - t`.
    tie_term: f64,
}

impl Ranked {
    fn new(x: &[f64], y: &[f64]) -> Result<Self, StatsError> {
        if x.is_empty() || y.is_empty() {
            return Err(StatsError::EmptySample);
        }
        if x.iter().chain(y).any(|v| v.is_nan()) {
            return Err(StatsError::NotANumber);
        }
        let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
        let ranks = midranks(&pooled);
        let (n, m) = (x.len(), y.len());
        let r_x: f64 = ranks[..n].iter().sum();
        let u = r_x - (n * (n + 1)) as f64 / 2.0;

        let mut sorted = pooled;
        sorted.sort_by(f64::total_cmp);
        let mut tie_term = 0.0;
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i + 1;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            let t = (j - i) as f64;
            tie_term += t * t * t - t;
            i = j;
        }
        Ok(Ranked { n, m, u, tie_term })
    }

    fn has_ties(&self) -> bool {
        self.tie_term > 0.0
    }

    fn exact(&self, alt: Alternative) -> RankSum {
        let counts = u_distribution(self.n, self.m);
        let total: f64 = counts.iter().sum();
        // Without ties U is an integer.
        let u = self.u as usize;
        let le = counts[..=u].iter().sum::<f64>() / total;
        let ge = counts[u..].iter().sum::<f64>() / total;
        let p = match alt {
            Alternative::TwoSided => (2.0 * le.min(ge)).min(1.0),
            Alternative::Less => le,
            Alternative::Greater => ge,
        };
        RankSum { u: self.u, p, method: PMethod::Exact }
    }

    fn normal(&self, alt: Alternative) -> RankSum {
        let (n, m) = (self.n as f64, self.m as f64);
        let big_n = n + m;
        let mean = n * m / 2.0;
        let tie = if big_n > 1.0 { self.tie_term / (big_n * (big_n - 1.0)) } else { 0.0 };
        let var = n * m / 12.0 * ((big_n + 1.0) - tie);
        let p = if var <= 0.0 {
            1.0
        } else {
            let sd = sqrt(var);
            let d = self.u - mean;
            match alt {
                Alternative::TwoSided => (2.0 * normal_sf(((d.abs() - 0.5).max(0.0)) / sd)).min(1.0),
                Alternative::Less => normal_sf(-(d + 0.5) / sd),
                Alternative::Greater => normal_sf((d - 0.5) / sd),
            }
        };
        RankSum { u: self.u, p, method: PMethod::Normal }
    }
}

/// Number of rank arrangements giving each value of `U` for sample sizes
/// `n` and `m` (index = `U`).
fn u_distribution(n: usize, m: usize) -> Vec<f64> {
    // f[i][j][u]: arrangements of i x's and j y's with U = u. Adding the
    // largest element: an x above all j y's adds j to U; a y adds nothing.
    let max_u = n * m;
    let mut f = vec![vec![vec![0.0; max_u + 1]; m + 1]; n + 1];
    for j in 0..=m {
        f[0][j][0] = 1.0;
    }
    for i in 1..=n {
        f[i][0][0] = 1.0;
        for j in 1..=m {
            for u in 0..=i * j {
                let from_x = if u >= j { f[i - 1][j][u - j] } else { 0.0 };
                f[i][j][u] = from_x + f[i][j - 1][u];
            }
        }
    }
    core::mem::take(&mut f[n][m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn separated_triples() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.method, PMethod::Exact);
        assert_relative_eq!(r.p, 0.1, max_relative = 1e-12);
    }

    #[test]
    fn identical_samples_do_not_reject() {
        let x: Vec<f64> = (0..30).map(|i| (i % 7) as f64).collect();
        let r = wilcoxon_rank_sum(&x, &x).unwrap();
        assert!(r.p >= 0.99);
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(r.p >= 0.99);
    }

    #[test]
    fn all_tied_gives_one() {
        let r = wilcoxon_rank_sum(&[5.0; 40], &[5.0; 40]).unwrap();
        assert_eq!(r.p, 1.0);
        assert_eq!(r.u, 800.0);
    }

    #[test]
    fn constant_series_far_apart() {
        let r = wilcoxon_rank_sum(&[0.0; 100], &[100.0; 100]).unwrap();
        assert!(r.p < 1e-6, "p {}", r.p);
    }

    #[test]
    fn u_distribution_is_symmetric_and_complete() {
        let d = u_distribution(3, 3);
        assert_eq!(d.iter().sum::<f64>(), 20.0);
        assert_eq!(d, [1.0, 1.0, 2.0, 3.0, 3.0, 3.0, 3.0, 2.0, 1.0, 1.0]);
        let d = u_distribution(10, 10);
        assert_eq!(d.iter().sum::<f64>(), 184_756.0);
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), [3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn errors() {
        assert_eq!(wilcoxon_rank_sum(&[], &[1.0]), Err(StatsError::EmptySample));
        assert_eq!(wilcoxon_rank_sum(&[f64::NAN], &[1.0]), Err(StatsError::NotANumber));
    }

    #[test]
    fn one_sided_directions() {
        let x = [1.0, 2.0, 3.0];
        let y = [4.0, 5.0, 6.0];
        assert_relative_eq!(rank_sum_test(&x, &y, Alternative::Less).unwrap().p, 0.05, max_relative = 1e-12);
        assert_eq!(rank_sum_test(&x, &y, Alternative::Greater).unwrap().p, 1.0);
    }
}
