//! Random-bin ensemble of histogram fits.
//!
//! The best-fit `(mu, sigma)` of a binned sample depends on the bin width.
//! The ensemble redraws the bin count uniformly many times, fits each
//! histogram, and reports percentiles of the resulting parameter
//! distribution as central values and 95% limits.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_histogram, LognormalParams};
use crate::histogram::build_histogram;
use crate::stats::PercentileSummary;
use crate::streams::{derive_key, item_stream};
use crate::{Error, Result};

/// Separates ensemble streams from other consumers of the same seed.
const ENSEMBLE_DOMAIN: u64 = 0xE45E_3B1E;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub lo: f64,
    pub hi: f64,
    pub bins_lo: usize,
    pub bins_hi: usize,
    pub n_fits: usize,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { lo: 0.0, hi: 8.0, bins_lo: 20, bins_hi: 800, n_fits: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitEnsemble {
    pub mu: PercentileSummary,
    pub sigma: PercentileSummary,
    /// Distribution mean `e^(mu + sigma^2 / 2)` per member fit.
    pub mean: PercentileSummary,
    /// Distribution median `e^mu` per member fit.
    pub median: PercentileSummary,
    pub n_fits: usize,
    pub n_failed: usize,
    pub seed: u64,
}

impl FitEnsemble {
    /// Central parameters (the per-parameter medians).
    pub fn central(&self) -> LognormalParams {
        LognormalParams { mu: self.mu.p50, sigma: self.sigma.p50 }
    }
}

/// Sample mean and standard deviation of `ln v` over positive values.
fn log_moments(values: &[f64]) -> Option<LognormalParams> {
    let logs: Vec<f64> = values.iter().filter(|&&v| v > 0.0).map(|v| v.ln()).collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    LognormalParams::new(mean, var.sqrt()).ok()
}

/// Fits `config.n_fits` histograms of `values` over `[lo, hi)`, each with a
/// bin count drawn uniformly from `bins_lo..=bins_hi`.
///
/// Member `i` draws from its own stream derived from `(seed, i)`, so the
/// result is identical at any degree of parallelism. Members that fail to
/// converge are counted in `n_failed` and left out of the percentiles.
pub fn ensemble_fit(values: &[f64], config: &EnsembleConfig) -> Result<FitEnsemble> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("ensemble fit needs at least one value".into()));
    }
    if config.bins_lo < 1 || config.bins_lo > config.bins_hi {
        return Err(Error::InvalidArgument(format!("bin range {}..={} is empty", config.bins_lo, config.bins_hi)));
    }
    if config.n_fits < 1 {
        return Err(Error::InvalidArgument("ensemble needs at least one fit".into()));
    }
    // Validates the range once up front.
    build_histogram(&[], config.lo, config.hi, 1)?;

    let init = log_moments(values);
    let key = derive_key(&[config.seed, ENSEMBLE_DOMAIN]);

    let members: Vec<Option<LognormalParams>> = (0..config.n_fits)
        .into_par_iter()
        .map(|i| {
            let mut rng = item_stream(key, i as u64);
            let n_bins = rng.random_range(config.bins_lo..=config.bins_hi);
            let hist = build_histogram(values, config.lo, config.hi, n_bins).ok()?;
            let fit = fit_histogram(&hist, init).ok()?;
            fit.converged.then_some(fit.params)
        })
        .collect();

    let good: Vec<LognormalParams> = members.iter().flatten().copied().collect();
    let n_failed = config.n_fits - good.len();
    if good.is_empty() {
        return Err(Error::EnsembleFailed { n_fits: config.n_fits });
    }
    if n_failed > 0 {
        log::warn!("{n_failed} of {} ensemble fits failed", config.n_fits);
    }

    let summarize = |f: &dyn Fn(&LognormalParams) -> f64| {
        let mut v: Vec<f64> = good.iter().map(f).collect();
        PercentileSummary::from_values(&mut v).expect("non-empty")
    };
    Ok(FitEnsemble {
        mu: summarize(&|p| p.mu),
        sigma: summarize(&|p| p.sigma),
        mean: summarize(&|p| p.mean()),
        median: summarize(&|p| p.median()),
        n_fits: config.n_fits,
        n_failed,
        seed: config.seed,
    })
}
