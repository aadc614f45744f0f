//! Unweighted least-squares fits of a scaled bell to histogram counts.
//!
//! Both fits minimize `sum_i (count_i - model(center_i))^2` over all bins,
//! empty ones included. On the FWCI axis the model is
//! `(A / x) exp(-(ln x - mu)^2 / (2 sigma^2))`; on the ln-FWCI axis it is
//! `A exp(-(t - mu)^2 / (2 sigma^2))`. The two share `(mu, sigma)`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{bell, LognormalParams};
use crate::histogram::Histogram;
use crate::lm::{self, LeastSquares, LmConfig, Normal};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalFit {
    pub amplitude: f64,
    pub params: LognormalParams,
    pub n_bins_used: usize,
    /// Euclidean norm of the count residuals.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `model_i = A * weight_i * bell(t_i)`, parameters `(A, mu, sigma)`.
struct ScaledBell {
    t: Vec<f64>,
    weight: Vec<f64>,
    counts: Vec<f64>,
}

impl ScaledBell {
    fn lognormal(hist: &Histogram) -> Self {
        let mut problem = Self { t: Vec::new(), weight: Vec::new(), counts: Vec::new() };
        for (center, count) in hist.bins().filter(|&(c, _)| c > 0.0) {
            problem.t.push(center.ln());
            problem.weight.push(1.0 / center);
            problem.counts.push(count as f64);
        }
        problem
    }

    fn gaussian(hist: &Histogram) -> Self {
        Self {
            t: hist.centers.clone(),
            weight: vec![1.0; hist.n_bins],
            counts: hist.counts.iter().map(|&c| c as f64).collect(),
        }
    }

    fn non_empty(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0.0).count()
    }

    /// Count-weighted mean and standard deviation of `t`.
    fn moments(&self) -> (f64, f64) {
        let total: f64 = self.counts.iter().sum();
        let mean = self.t.iter().zip(&self.counts).map(|(t, c)| t * c).sum::<f64>() / total;
        let var = self.t.iter().zip(&self.counts).map(|(t, c)| c * (t - mean).powi(2)).sum::<f64>() / total;
        (mean, var.sqrt())
    }

    /// Amplitude that puts the model through the tallest bin.
    fn amplitude_at_peak(&self, params: &LognormalParams) -> f64 {
        let peak = (0..self.counts.len())
            .max_by(|&a, &b| self.counts[a].total_cmp(&self.counts[b]))
            .expect("non-empty problem");
        let shape = self.weight[peak] * bell(self.t[peak], params);
        if shape > 0.0 {
            self.counts[peak] / shape
        } else {
            self.counts[peak]
        }
    }

    fn solve(&self, init: Option<LognormalParams>) -> Result<LognormalFit> {
        if self.non_empty() < 4 {
            return Err(Error::InvalidArgument(format!(
                "fit needs at least 4 non-empty bins, got {}",
                self.non_empty()
            )));
        }
        let start = match init {
            Some(p) => p,
            None => {
                let (mu, sigma) = self.moments();
                LognormalParams::new(mu, sigma)?
            }
        };
        let a0 = self.amplitude_at_peak(&start);
        let out = lm::minimize(self, Vector3::new(a0, start.mu, start.sigma), LmConfig::default());

        let (amplitude, mu, sigma) = (out.params[0], out.params[1], out.params[2].abs());
        let valid = amplitude > 0.0 && mu.is_finite() && sigma > 0.0 && sigma.is_finite();
        Ok(LognormalFit {
            amplitude,
            params: LognormalParams { mu, sigma },
            n_bins_used: self.t.len(),
            residual_norm: out.cost.sqrt(),
            iterations: out.iterations,
            converged: out.converged && valid && out.cost.is_finite(),
        })
    }
}

impl LeastSquares for ScaledBell {
    fn normal(&self, p: &Vector3<f64>) -> Normal {
        let (amplitude, mu, sigma) = (p[0], p[1], p[2]);
        let inv_var = 1.0 / (sigma * sigma);
        let mut n = Normal { cost: 0.0, jtj: Matrix3::zeros(), jtr: Vector3::zeros() };
        for i in 0..self.t.len() {
            let d = self.t[i] - mu;
            let shape = self.weight[i] * (-0.5 * d * d * inv_var).exp();
            let model = amplitude * shape;
            let r = model - self.counts[i];
            let j = Vector3::new(shape, model * d * inv_var, model * d * d * inv_var / sigma);
            n.cost += r * r;
            n.jtj += j * j.transpose();
            n.jtr += j * r;
        }
        n
    }
}

/// Fits the scaled lognormal to a histogram of FWCI values. Bins whose
/// center is not positive are left out.
///
/// Without `init`, `(mu, sigma)` start from the count-weighted moments of
/// `ln(center)`. The amplitude always starts by matching the tallest bin.
pub fn fit_histogram(hist: &Histogram, init: Option<LognormalParams>) -> Result<LognormalFit> {
    ScaledBell::lognormal(hist).solve(init)
}

/// Fits a scaled normal to a histogram of ln-FWCI values. The returned
/// `(mu, sigma)` are directly comparable with [`fit_histogram`].
pub fn fit_normal_log(hist: &Histogram) -> Result<LognormalFit> {
    ScaledBell::gaussian(hist).solve(None)
}
