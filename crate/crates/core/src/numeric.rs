//! Summation and sample statistics.
//!
//! All Monte Carlo reductions go through [`pairwise_sum`] so that results depend
//! only on the order of the input slice, never on how work was split across
//! threads.

use serde::Serialize;

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation. Error grows as O(log n) rather than O(n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

impl SampleStats {
    pub fn from_slice(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return SampleStats { n, mean: f64::NAN, variance: f64::NAN, std_error: f64::NAN };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let variance = if n > 1 {
            let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            pairwise_sum(&dev) / (n - 1) as f64
        } else {
            0.0
        };
        SampleStats { n, mean, variance, std_error: (variance / n as f64).sqrt() }
    }

    /// True when `target` lies within `k` standard errors of the sample mean.
    ///
    /// A floor of a few ulps of the target is applied so that degenerate
    /// (zero-variance) samples compare exactly up to round-off.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        let band = k * self.std_error + 1e-12 * target.abs().max(self.mean.abs());
        (self.mean - target).abs() <= band
    }

    /// Distance to `target` in units of standard error (0 when both are zero).
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = self.mean - target;
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff.abs() <= 1e-12 * target.abs().max(1e-300) {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        }
    }
}

/// Ordinary least squares fit y = slope * x + intercept; returns
/// (slope, intercept, max absolute residual).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let sxx: Vec<f64> = xs.iter().map(|x| (x - mx) * (x - mx)).collect();
    let sxy: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let slope = pairwise_sum(&sxy) / pairwise_sum(&sxx);
    let intercept = my - slope * mx;
    let max_resid = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    (slope, intercept, max_resid)
}

/// Geometric sequence from `start` to `end` inclusive with `per_decade` points per factor of ten.
pub fn geometric_grid(start: f64, end: f64, per_decade: usize) -> Vec<f64> {
    let decades = (end / start).log10();
    let steps = (decades * per_decade as f64).round().max(1.0) as usize;
    let ratio = (end / start).powf(1.0 / steps as f64);
    let mut out: Vec<f64> = (0..steps).map(|i| start * ratio.powi(i as i32)).collect();
    out.push(end);
    out
}

/// Splitmix64 finaliser, used to derive independent seeds from (seed, label) pairs.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }

    #[test]
    fn pairwise_beats_naive_on_cancellation() {
        let mut xs = vec![0.1; 1_000_000];
        xs.push(1e10);
        let exact = 1e10 + 100_000.0;
        let pw = pairwise_sum(&xs);
        assert!((pw - exact).abs() < 1e-4, "pairwise {pw}");
    }

    #[test]
    fn stats_of_constant_sample_have_zero_error() {
        let s = SampleStats::from_slice(&[2.0; 10]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std_error, 0.0);
        assert!(s.agrees_with(2.0, 4.0));
        assert!(!s.agrees_with(2.1, 4.0));
    }

    #[test]
    fn linear_fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let (s, c, r) = linear_fit(&xs, &ys);
        assert!((s - 3.0).abs() < 1e-14 && (c + 1.0).abs() < 1e-14 && r < 1e-14);
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric_grid(10.0, 1e6, 1);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], 10.0);
        assert_eq!(*g.last().unwrap(), 1e6);
        assert!((g[2] - 1000.0).abs() < 1e-9);
    }
}
