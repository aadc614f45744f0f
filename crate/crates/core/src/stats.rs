//! Order statistics shared by the ensemble and the Monte Carlo stages.

use serde::{Deserialize, Serialize};

/// Percentile of already sorted data with linear interpolation between order
/// statistics (rank `p/100 * (n - 1)`). Returns `None` for empty input.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let rank = (p / 100.0).clamp(0.0, 1.0) * (n - 1) as f64;
    let below = rank.floor() as usize;
    let above = (below + 1).min(n - 1);
    let frac = rank - below as f64;
    Some(sorted[below] + frac * (sorted[above] - sorted[below]))
}

/// Median, averaging the two central order statistics for even counts.
/// Reorders `values`.
pub fn median_in_place(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let (lower, upper_mid, _) = values.select_nth_unstable_by(n / 2, f64::total_cmp);
    let upper_mid = *upper_mid;
    if n % 2 == 1 {
        Some(upper_mid)
    } else {
        let lower_mid = lower.iter().copied().max_by(f64::total_cmp).expect("n >= 2");
        Some(0.5 * (lower_mid + upper_mid))
    }
}

/// The 2.5th, 50th and 97.5th percentiles of a parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentileSummary {
    pub p2_5: f64,
    pub p50: f64,
    pub p97_5: f64,
}

impl PercentileSummary {
    /// Sorts `values` and summarizes them. `None` when empty.
    pub fn from_values(values: &mut [f64]) -> Option<Self> {
        values.sort_by(f64::total_cmp);
        Some(Self {
            p2_5: percentile_sorted(values, 2.5)?,
            p50: percentile_sorted(values, 50.0)?,
            p97_5: percentile_sorted(values, 97.5)?,
        })
    }

    /// Distance from the median to the upper limit.
    pub fn plus(&self) -> f64 {
        self.p97_5 - self.p50
    }

    /// Distance from the lower limit to the median.
    pub fn minus(&self) -> f64 {
        self.p50 - self.p2_5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interpolates_between_order_statistics() {
        let data = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile_sorted(&data, 0.0), Some(1.0));
        assert_eq!(percentile_sorted(&data, 50.0), Some(2.5));
        assert_eq!(percentile_sorted(&data, 100.0), Some(4.0));
        assert!((percentile_sorted(&data, 2.5).unwrap() - 1.075).abs() < 1e-12);
        assert_eq!(percentile_sorted(&[], 50.0), None);
        assert_eq!(percentile_sorted(&[7.0], 97.5), Some(7.0));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median_in_place(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median_in_place(&mut [4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median_in_place(&mut []), None);
    }

    proptest! {
        #[test]
        fn summary_is_ordered(mut v in prop::collection::vec(-100.0f64..100.0, 1..300)) {
            let s = PercentileSummary::from_values(&mut v).unwrap();
            prop_assert!(s.p2_5 <= s.p50 && s.p50 <= s.p97_5);
        }

        #[test]
        fn median_matches_percentile(mut v in prop::collection::vec(-100.0f64..100.0, 1..300)) {
            let mut sorted = v.clone();
            sorted.sort_by(f64::total_cmp);
            let m = median_in_place(&mut v).unwrap();
            prop_assert!((m - percentile_sorted(&sorted, 50.0).unwrap()).abs() < 1e-12);
        }
    }
}
