//! Lognormal model evaluation and the statistics derived from it.
//!
//! A variable `X` is lognormal with parameters `(mu, sigma)` when `ln X` is
//! normal with mean `mu` and standard deviation `sigma`. Its mode, median
//! and mean are `e^(mu - sigma^2)`, `e^mu` and `e^(mu + sigma^2 / 2)`.
//!
//! FWCI values are already field-normalized citation ratios (global mean 1),
//! which is why the unit-mean family `mu = -sigma^2 / 2` serves as the
//! international baseline in [`crate::simulate`].

mod ensemble;
mod fit;

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erf_inv, erfc};

use crate::{Error, Result};

pub use ensemble::{ensemble_fit, EnsembleConfig, FitEnsemble};
pub use fit::{fit_histogram, fit_normal_log, LognormalFit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalParams {
    pub mu: f64,
    pub sigma: f64,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidArgument(format!("mu must be finite, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { mu, sigma })
    }

    /// The unit-mean member with variance `sigma_sq` of the log, i.e.
    /// `mu = -sigma_sq / 2`.
    pub fn unit_mean(sigma_sq: f64) -> Result<Self> {
        if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma^2 must be positive, got {sigma_sq}")));
        }
        Self::new(-0.5 * sigma_sq, sigma_sq.sqrt())
    }

    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.sigma * self.sigma).exp()
    }

    pub fn median(&self) -> f64 {
        self.mu.exp()
    }

    pub fn mode(&self) -> f64 {
        (self.mu - self.sigma * self.sigma).exp()
    }
}

fn require_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lognormal argument must be positive, got {x}")))
    }
}

/// Unnormalized bell `exp(-(t - mu)^2 / (2 sigma^2))`.
pub(crate) fn bell(t: f64, params: &LognormalParams) -> f64 {
    let z = (t - params.mu) / params.sigma;
    (-0.5 * z * z).exp()
}

pub fn pdf(x: f64, params: &LognormalParams) -> Result<f64> {
    require_positive(x)?;
    Ok(bell(x.ln(), params) / (x * params.sigma * (2.0 * PI).sqrt()))
}

/// Expected bin count `(A / x) exp(-(ln x - mu)^2 / (2 sigma^2))` of an
/// unnormalized histogram. With `A = 1 / (sigma sqrt(2 pi))` this is the pdf.
pub fn scaled_model(x: f64, amplitude: f64, params: &LognormalParams) -> Result<f64> {
    require_positive(x)?;
    if amplitude.is_nan() || amplitude <= 0.0 {
        return Err(Error::InvalidArgument(format!("amplitude must be positive, got {amplitude}")));
    }
    Ok(amplitude / x * bell(x.ln(), params))
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Standard normal quantile for `p` in (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    SQRT_2 * erf_inv(2.0 * p - 1.0)
}

/// Fraction of the distribution below `x`.
pub fn percentile_of(x: f64, params: &LognormalParams) -> Result<f64> {
    require_positive(x)?;
    Ok(normal_cdf((x.ln() - params.mu) / params.sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedStats {
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
    pub coverage: f64,
    /// Central interval holding `coverage` of the distribution.
    pub interval_lo: f64,
    pub interval_hi: f64,
}

pub fn derived_stats(params: &LognormalParams, coverage: f64) -> Result<DerivedStats> {
    if !(coverage > 0.0 && coverage < 1.0) {
        return Err(Error::InvalidArgument(format!("coverage must lie in (0, 1), got {coverage}")));
    }
    let z_lo = normal_quantile(0.5 * (1.0 - coverage));
    let z_hi = normal_quantile(0.5 * (1.0 + coverage));
    Ok(DerivedStats {
        mean: params.mean(),
        median: params.median(),
        mode: params.mode(),
        coverage,
        interval_lo: (params.mu + z_lo * params.sigma).exp(),
        interval_hi: (params.mu + z_hi * params.sigma).exp(),
    })
}
