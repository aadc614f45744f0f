//! A small Levenberg–Marquardt solver for three-parameter models.

use nalgebra::{Matrix3, Vector3};

/// Normal-equation pieces at one parameter point.
#[derive(Debug, Clone)]
pub(crate) struct Normal {
    /// Sum of squared residuals.
    pub cost: f64,
    pub jtj: Matrix3<f64>,
    pub jtr: Vector3<f64>,
}

pub(crate) trait LeastSquares {
    fn normal(&self, params: &Vector3<f64>) -> Normal;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmConfig {
    pub max_iterations: usize,
    /// Relative change of the scaled parameter vector that counts as converged.
    pub xtol: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self { max_iterations: 200, xtol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct LmOutcome {
    pub params: Vector3<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

const LAMBDA_MAX: f64 = 1e16;

pub(crate) fn minimize(problem: &impl LeastSquares, start: Vector3<f64>, config: LmConfig) -> LmOutcome {
    let mut x = start;
    let mut current = problem.normal(&x);
    let outcome =
        |x: Vector3<f64>, cost: f64, iterations, converged| LmOutcome { params: x, cost, iterations, converged };
    if !current.cost.is_finite() {
        return outcome(x, current.cost, 0, false);
    }

    let mut lambda = 1e-3;
    // Marquardt scaling, kept monotone as in MINPACK.
    let mut scale = Vector3::from_fn(|i, _| current.jtj[(i, i)].max(f64::MIN_POSITIVE));

    for iteration in 1..=config.max_iterations {
        if current.jtr.amax() == 0.0 {
            return outcome(x, current.cost, iteration - 1, true);
        }
        for i in 0..3 {
            scale[i] = scale[i].max(current.jtj[(i, i)]);
        }

        loop {
            let damped = current.jtj + Matrix3::from_diagonal(&(scale * lambda));
            let step = damped.cholesky().map(|c| c.solve(&(-current.jtr)));
            let Some(step) = step.filter(|s| s.iter().all(|v| v.is_finite())) else {
                lambda *= 10.0;
                if lambda > LAMBDA_MAX {
                    return outcome(x, current.cost, iteration, false);
                }
                continue;
            };

            let trial = x + step;
            let next = problem.normal(&trial);
            if next.cost.is_finite() && next.cost < current.cost {
                let root = scale.map(f64::sqrt);
                let step_norm = step.component_mul(&root).norm();
                let x_norm = trial.component_mul(&root).norm();
                x = trial;
                current = next;
                lambda = (lambda * 0.1).max(1e-12);
                if step_norm <= config.xtol * x_norm {
                    return outcome(x, current.cost, iteration, true);
                }
                break;
            }

            lambda *= 10.0;
            if lambda > LAMBDA_MAX {
                // No descent left at working precision: x is stationary.
                return outcome(x, current.cost, iteration, true);
            }
        }
    }
    outcome(x, current.cost, config.max_iterations, false)
}
