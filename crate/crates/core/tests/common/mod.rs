//! Test-only oracles. Nothing here calls into the code under test except to
//! build inputs.

#![allow(dead_code)]

use fwci_core::corpus::{normalize_award_code, PubType, PublicationRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, LogNormal};

/// erf by its Maclaurin series; accurate to ~1e-15 for |x| < 3.
pub fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    for n in 1..200 {
        term *= -x * x / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 {
            break;
        }
    }
    sum * 2.0 / std::f64::consts::PI.sqrt()
}

pub fn normal_cdf_oracle(z: f64) -> f64 {
    0.5 * (1.0 + erf_series(z / std::f64::consts::SQRT_2))
}

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

/// Draws from lognormal(mu, sigma) with an RNG and sampler independent of
/// the crate's own.
pub fn lognormal_draws(mu: f64, sigma: f64, n: usize, seed: u64) -> Vec<f64> {
    let dist = LogNormal::new(mu, sigma).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

/// Exactly `n` draws that fall inside the open interval `(lo, hi)`.
pub fn truncated_draws(mu: f64, sigma: f64, n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let dist = LogNormal::new(mu, sigma).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v = dist.sample(&mut rng);
        if v > lo && v < hi {
            out.push(v);
        }
    }
    out
}

pub fn record(code: &str, fwci: Option<f64>, source_id: &str) -> PublicationRecord {
    PublicationRecord {
        award_code: normalize_award_code(code).unwrap(),
        year: 2016,
        pub_type: PubType::Article,
        fwci,
        citations: None,
        title: format!("paper {source_id}"),
        source_id: source_id.to_string(),
    }
}

/// CSV export of a synthetic portfolio: `n_awards` awards with 1..=max_papers
/// papers each, FWCI drawn from lognormal(mu, sigma).
pub fn portfolio_csv(n_awards: usize, max_papers: usize, mu: f64, sigma: f64, seed: u64) -> String {
    let dist = LogNormal::new(mu, sigma).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = String::from("award_code,year,pub_type,fwci,citations,title,source_id\n");
    for a in 0..n_awards {
        let n = rng.random_range(1..=max_papers);
        for p in 0..n {
            let fwci: f64 = dist.sample(&mut rng);
            out.push_str(&format!("SFI/13/IA/{:04},2015,Article,{fwci},,t,{a}-{p}\n", 1000 + a));
        }
    }
    out
}
