//! Fixed-order summary statistics for Monte Carlo estimates.

use serde::{Deserialize, Serialize};

/// Neumaier-compensated sum, accumulated in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Sample mean with a normal-approximation 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let m = values.len();
        let mean = compensated_sum(values.iter().copied()) / m as f64;
        let var = if m > 1 {
            compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (m - 1) as f64
        } else {
            0.0
        };
        let std_error = (var / m as f64).sqrt();
        Self {
            mean,
            std_error,
            ci_low: mean - Z95 * std_error,
            ci_high: mean + Z95 * std_error,
            samples: m,
        }
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn estimate_of_constant_has_zero_width() {
        let e = Estimate::from_samples(&[3.0; 10]);
        assert_eq!(e.mean, 3.0);
        assert_eq!(e.ci_low, 3.0);
        assert_eq!(e.ci_high, 3.0);
    }

    #[test]
    fn interval_overlap() {
        let a = Estimate::from_samples(&[0.0, 1.0, 2.0]);
        let b = Estimate::from_samples(&[10.0, 11.0, 12.0]);
        assert!(!a.overlaps(&b));
        assert!(a.overlaps(&a));
    }
}
