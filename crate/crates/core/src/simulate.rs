//! Small-sample correction by Monte Carlo.
//!
//! An award with few papers has a mean FWCI that is usually below the field
//! mean of 1, because the lognormal is skewed. Benchmarking against the
//! median of simulated award means at the same paper count removes that
//! bias: half of all awards from the baseline field land above it.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AwardCode, AwardSummary};
use crate::lognormal::LognormalParams;
use crate::stats::median_in_place;
use crate::streams::{derive_key, item_stream};
use crate::{Error, Result};

const SIMULATION_DOMAIN: u64 = 0x51_3D1A;

/// Unit-mean lognormal field, `mu = -sigma_sq / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineField {
    sigma_sq: f64,
}

impl BaselineField {
    pub fn new(sigma_sq: f64) -> Result<Self> {
        LognormalParams::unit_mean(sigma_sq)?;
        Ok(Self { sigma_sq })
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    pub fn params(&self) -> LognormalParams {
        LognormalParams::unit_mean(self.sigma_sq).expect("validated on construction")
    }
}

/// `n` draws of `e^(mu + sigma Z)`.
pub fn sample_lognormal<R: Rng + ?Sized>(params: &LognormalParams, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            (params.mu + params.sigma * z).exp()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianCurvePoint {
    pub n: usize,
    pub sigma_sq: f64,
    pub median_mean: f64,
    pub reps: usize,
    pub seed: u64,
}

/// Median over `reps` simulated awards of the mean of `n` baseline draws.
///
/// Each `(n, sigma_sq)` pair owns a stream family keyed by the master seed,
/// `n` and the bit pattern of `sigma_sq`; rep `r` uses stream `r` of that
/// family. Adding pairs never perturbs existing ones and the value is the
/// same at any degree of parallelism.
pub fn median_of_means(n: usize, baseline: BaselineField, reps: usize, seed: u64) -> Result<MedianCurvePoint> {
    if n < 1 || reps < 1 {
        return Err(Error::InvalidArgument(format!("need n >= 1 and reps >= 1, got n={n}, reps={reps}")));
    }
    let params = baseline.params();
    let key = derive_key(&[seed, SIMULATION_DOMAIN, n as u64, baseline.sigma_sq.to_bits()]);

    let mut means: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = item_stream(key, rep as u64);
            let mut sum = 0.0;
            for _ in 0..n {
                let z: f64 = rng.sample(StandardNormal);
                sum += (params.mu + params.sigma * z).exp();
            }
            sum / n as f64
        })
        .collect();

    let median_mean = median_in_place(&mut means).expect("reps >= 1");
    Ok(MedianCurvePoint { n, sigma_sq: baseline.sigma_sq, median_mean, reps, seed })
}

/// One point per `(sigma_sq, n)` pair, grouped by baseline in input order.
pub fn median_curve(
    n_values: &[usize],
    baselines: &[BaselineField],
    reps: usize,
    seed: u64,
) -> Result<Vec<MedianCurvePoint>> {
    if n_values.is_empty() {
        return Err(Error::InvalidArgument("median curve needs at least one n".into()));
    }
    baselines.iter().flat_map(|&b| n_values.iter().map(move |&n| median_of_means(n, b, reps, seed))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AboveMedian,
    BelowMedian,
}

impl Verdict {
    /// Ties count as above.
    pub fn compare(observed: f64, threshold: f64) -> Self {
        if observed >= threshold {
            Verdict::AboveMedian
        } else {
            Verdict::BelowMedian
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineVerdict {
    pub sigma_sq: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AwardBenchmark {
    pub award_code: AwardCode,
    pub n_papers: usize,
    pub observed_mean: f64,
    /// One entry per baseline, in the order given.
    pub verdicts: Vec<BaselineVerdict>,
}

impl AwardBenchmark {
    pub fn verdict_for(&self, sigma_sq: f64) -> Option<Verdict> {
        self.verdicts.iter().find(|v| v.sigma_sq == sigma_sq).map(|v| v.verdict)
    }
}

fn benchmark_inputs(summary: &AwardSummary) -> Result<(usize, f64)> {
    if summary.n_papers == 0 {
        return Err(Error::InvalidArgument(format!("award {} has no papers", summary.award_code)));
    }
    let mean = summary
        .mean_fwci
        .ok_or_else(|| Error::InvalidArgument(format!("award {} has no FWCI values", summary.award_code)))?;
    Ok((summary.n_papers, mean))
}

pub fn benchmark_award(
    summary: &AwardSummary,
    baselines: &[BaselineField],
    reps: usize,
    seed: u64,
) -> Result<AwardBenchmark> {
    let (n, observed_mean) = benchmark_inputs(summary)?;
    let verdicts = baselines
        .iter()
        .map(|&b| {
            let threshold = median_of_means(n, b, reps, seed)?.median_mean;
            Ok(BaselineVerdict { sigma_sq: b.sigma_sq, threshold, verdict: Verdict::compare(observed_mean, threshold) })
        })
        .collect::<Result<_>>()?;
    Ok(AwardBenchmark { award_code: summary.award_code.clone(), n_papers: n, observed_mean, verdicts })
}

/// [`benchmark_award`] over a portfolio, simulating each distinct paper
/// count once. Results match per-award calls exactly.
pub fn benchmark_awards(
    summaries: &[AwardSummary],
    baselines: &[BaselineField],
    reps: usize,
    seed: u64,
) -> Result<Vec<AwardBenchmark>> {
    let inputs = summaries.iter().map(benchmark_inputs).collect::<Result<Vec<_>>>()?;
    let mut counts: Vec<usize> = inputs.iter().map(|&(n, _)| n).collect();
    counts.sort_unstable();
    counts.dedup();

    let mut thresholds = std::collections::HashMap::new();
    for &n in &counts {
        for (j, &b) in baselines.iter().enumerate() {
            thresholds.insert((n, j), median_of_means(n, b, reps, seed)?.median_mean);
        }
    }

    Ok(summaries
        .iter()
        .zip(inputs)
        .map(|(s, (n, observed_mean))| AwardBenchmark {
            award_code: s.award_code.clone(),
            n_papers: n,
            observed_mean,
            verdicts: baselines
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    let threshold = thresholds[&(n, j)];
                    BaselineVerdict {
                        sigma_sq: b.sigma_sq,
                        threshold,
                        verdict: Verdict::compare(observed_mean, threshold),
                    }
                })
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineTally {
    pub sigma_sq: f64,
    pub above_median: usize,
    pub below_median: usize,
    pub fraction_above: f64,
    /// Awards with mean below 1 that still clear the median.
    pub below_one_above_median: usize,
    /// Awards with mean >= 1 passed without simulation, plus the sub-1
    /// awards that clear the median.
    pub above_median_shortcut: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkAggregate {
    pub n_awards: usize,
    pub mean_at_least_one: usize,
    pub fraction_mean_at_least_one: f64,
    pub per_baseline: Vec<BaselineTally>,
}

fn fraction(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

/// Counts per baseline, in the order baselines first appear.
pub fn aggregate_benchmarks(benchmarks: &[AwardBenchmark]) -> BenchmarkAggregate {
    let n_awards = benchmarks.len();
    let mean_at_least_one = benchmarks.iter().filter(|b| b.observed_mean >= 1.0).count();

    let mut sigmas: Vec<f64> = Vec::new();
    for v in benchmarks.iter().flat_map(|b| &b.verdicts) {
        if !sigmas.contains(&v.sigma_sq) {
            sigmas.push(v.sigma_sq);
        }
    }

    let per_baseline = sigmas
        .into_iter()
        .map(|sigma_sq| {
            let mut tally = BaselineTally {
                sigma_sq,
                above_median: 0,
                below_median: 0,
                fraction_above: 0.0,
                below_one_above_median: 0,
                above_median_shortcut: mean_at_least_one,
            };
            for b in benchmarks {
                match b.verdict_for(sigma_sq) {
                    Some(Verdict::AboveMedian) => {
                        tally.above_median += 1;
                        if b.observed_mean < 1.0 {
                            tally.below_one_above_median += 1;
                            tally.above_median_shortcut += 1;
                        }
                    }
                    Some(Verdict::BelowMedian) => tally.below_median += 1,
                    None => {}
                }
            }
            tally.fraction_above = fraction(tally.above_median, tally.above_median + tally.below_median);
            tally
        })
        .collect();

    BenchmarkAggregate {
        n_awards,
        mean_at_least_one,
        fraction_mean_at_least_one: fraction(mean_at_least_one, n_awards),
        per_baseline,
    }
}
