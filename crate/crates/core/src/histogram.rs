//! Fixed-width histograms over half-open ranges `[lo, hi)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub n_bins: usize,
    pub counts: Vec<u64>,
    pub centers: Vec<f64>,
    /// Inputs outside `[lo, hi)`, NaN included.
    pub dropped: u64,
}

impl Histogram {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.n_bins as f64
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn non_empty_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// `(center, count)` pairs, in bin order.
    pub fn bins(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.centers.iter().copied().zip(self.counts.iter().copied())
    }

    /// An empty histogram with the given layout.
    pub fn empty(lo: f64, hi: f64, n_bins: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidArgument(format!("histogram range [{lo}, {hi}) is empty or not finite")));
        }
        if n_bins < 1 {
            return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
        }
        let w = (hi - lo) / n_bins as f64;
        let centers = (0..n_bins).map(|i| lo + (i as f64 + 0.5) * w).collect();
        Ok(Self { lo, hi, n_bins, counts: vec![0; n_bins], centers, dropped: 0 })
    }

    /// Bin index of `v`, or `None` outside `[lo, hi)`.
    pub fn bin_of(&self, v: f64) -> Option<usize> {
        if !(v >= self.lo && v < self.hi) {
            return None;
        }
        // Scaling by n_bins last keeps floor(2y) within {2 floor(y), 2 floor(y) + 1}
        // exactly, so a refined histogram always nests inside the coarse one.
        let scaled = (v - self.lo) / (self.hi - self.lo) * self.n_bins as f64;
        Some((scaled.floor() as usize).min(self.n_bins - 1))
    }

    pub fn add(&mut self, v: f64) {
        match self.bin_of(v) {
            Some(i) => self.counts[i] += 1,
            None => self.dropped += 1,
        }
    }
}

pub fn build_histogram(values: &[f64], lo: f64, hi: f64, n_bins: usize) -> Result<Histogram> {
    let mut hist = Histogram::empty(lo, hi, n_bins)?;
    for &v in values {
        hist.add(v);
    }
    Ok(hist)
}

/// Natural log of each value, mapping exact zeros to `ln(zero_shift)` so
/// uncited papers stay visible on a log axis.
pub fn log_transform(values: &[f64], zero_shift: f64) -> Result<Vec<f64>> {
    if !(zero_shift > 0.0 && zero_shift.is_finite()) {
        return Err(Error::InvalidArgument(format!("zero shift must be positive, got {zero_shift}")));
    }
    values
        .iter()
        .map(|&v| {
            if v > 0.0 {
                Ok(v.ln())
            } else if v == 0.0 {
                Ok(zero_shift.ln())
            } else {
                Err(Error::InvalidArgument(format!("cannot take the log of {v}")))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_example() {
        let h = build_histogram(&[0.05, 0.15, 0.15], 0.0, 0.3, 3).unwrap();
        assert_eq!(h.counts, vec![1, 2, 0]);
        assert_eq!(h.dropped, 0);
        assert!((h.centers[1] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn upper_edge_is_excluded() {
        let h = build_histogram(&[0.0, 1.0, -0.0001, f64::NAN], 0.0, 1.0, 4).unwrap();
        assert_eq!(h.counts, vec![1, 0, 0, 0]);
        assert_eq!(h.dropped, 3);
    }

    #[test]
    fn just_below_hi_lands_in_last_bin() {
        let v = 8.0f64.next_down();
        let h = build_histogram(&[v], 0.0, 8.0, 800).unwrap();
        assert_eq!(h.counts[799], 1);
    }

    #[test]
    fn bad_arguments() {
        assert!(build_histogram(&[], 1.0, 1.0, 3).is_err());
        assert!(build_histogram(&[], 2.0, 1.0, 3).is_err());
        assert!(build_histogram(&[], 0.0, 1.0, 0).is_err());
        assert!(build_histogram(&[], 0.0, f64::INFINITY, 2).is_err());
    }

    #[test]
    fn log_transform_examples() {
        assert_eq!(log_transform(&[1.0], 0.01).unwrap(), vec![0.0]);
        assert!((log_transform(&[std::f64::consts::E], 0.01).unwrap()[0] - 1.0).abs() < 1e-15);
        let z = log_transform(&[0.0], 0.01).unwrap()[0];
        assert!((z + 4.605).abs() < 1e-3, "{z}");
        assert!(log_transform(&[-1.0], 0.01).is_err());
        assert!(log_transform(&[1.0], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn conservation(values in prop::collection::vec(-2.0f64..12.0, 0..400), n_bins in 1usize..200) {
            let h = build_histogram(&values, 0.0, 8.0, n_bins).unwrap();
            prop_assert_eq!(h.total() + h.dropped, values.len() as u64);
        }

        #[test]
        fn refinement_nests(values in prop::collection::vec(-1.0f64..9.0, 0..400),
                            n_bins in 1usize..400, lo in -0.5f64..0.5, span in 0.1f64..10.0) {
            let coarse = build_histogram(&values, lo, lo + span, n_bins).unwrap();
            let fine = build_histogram(&values, lo, lo + span, 2 * n_bins).unwrap();
            for i in 0..n_bins {
                prop_assert_eq!(coarse.counts[i], fine.counts[2 * i] + fine.counts[2 * i + 1]);
            }
        }

        #[test]
        fn log_transform_monotone(mut values in prop::collection::vec(0.0f64..50.0, 1..100)) {
            values.sort_by(f64::total_cmp);
            let shift = values.iter().copied().filter(|&v| v > 0.0).fold(0.01f64, f64::min);
            let logs = log_transform(&values, shift).unwrap();
            prop_assert!(logs.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
