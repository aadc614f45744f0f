//! End-to-end runs: ingest, fit, benchmark and curve.
//!
//! Every run reads its inputs afresh, writes line-oriented JSON reports and
//! CSV series under `output_dir`, and embeds the effective [`RunConfig`] in
//! its report. Nothing time- or host-dependent is written, so reruns with the
//! same configuration produce byte-identical files.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{
    filter_eligible, parse_budgets, parse_records, portfolio_totals, split_low_fwci, summarize_awards, AwardCode,
    AwardSummary, EligibilityPolicy, InputFormat, PortfolioTotals, PublicationRecord, Rejection,
};
use crate::histogram::{build_histogram, log_transform, Histogram};
use crate::lognormal::{
    derived_stats, ensemble_fit, fit_normal_log, pdf, DerivedStats, EnsembleConfig, FitEnsemble, LognormalParams,
};
use crate::simulate::{
    aggregate_benchmarks, benchmark_awards, median_curve, AwardBenchmark, BaselineField, BenchmarkAggregate,
    MedianCurvePoint, Verdict,
};
use crate::{Error, Result};

/// Width of the display histogram on the FWCI axis.
pub const LINEAR_BIN_WIDTH: f64 = 0.1;
/// Width of the display histogram on the ln-FWCI axis.
pub const LOG_BIN_WIDTH: f64 = 0.2;
/// Where uncited papers sit on the log axis.
pub const ZERO_SHIFT: f64 = 0.01;
pub const CURVE_POINTS: usize = 512;
pub const INTERVAL_COVERAGE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input_path: PathBuf,
    pub budget_path: Option<PathBuf>,
    pub low_cut: f64,
    pub fit_range: (f64, f64),
    pub bins_range: (usize, usize),
    pub n_fits: usize,
    pub sigma_sq_list: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn new(input_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            input_path: input_path.into(),
            budget_path: None,
            low_cut: 0.1,
            fit_range: (0.0, 8.0),
            bins_range: (20, 800),
            n_fits: 10_000,
            sigma_sq_list: vec![1.0, 1.3, 1.8],
            reps: 100_000,
            seed: 0,
            output_dir: output_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.low_cut >= 0.0 && self.low_cut.is_finite()) {
            return bad(format!("low cut must be >= 0, got {}", self.low_cut));
        }
        let (lo, hi) = self.fit_range;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return bad(format!("fit range {lo}:{hi} must satisfy 0 <= lo < hi"));
        }
        let (b_lo, b_hi) = self.bins_range;
        if b_lo < 1 || b_lo > b_hi {
            return bad(format!("bin range {b_lo}:{b_hi} must satisfy 1 <= lo <= hi"));
        }
        if self.n_fits < 1 || self.reps < 1 {
            return bad("fits and reps must be at least 1".into());
        }
        if self.sigma_sq_list.is_empty() {
            return bad("at least one sigma^2 is required".into());
        }
        self.baselines().map(|_| ())
    }

    pub fn baselines(&self) -> Result<Vec<BaselineField>> {
        self.sigma_sq_list.iter().map(|&s| BaselineField::new(s)).collect()
    }

    pub fn policy(&self) -> EligibilityPolicy {
        let default = EligibilityPolicy::default();
        EligibilityPolicy::new(default.included_types().iter().copied(), true, self.low_cut).expect("validated low cut")
    }

    pub fn ensemble(&self) -> EnsembleConfig {
        EnsembleConfig {
            lo: self.fit_range.0,
            hi: self.fit_range.1,
            bins_lo: self.bins_range.0,
            bins_hi: self.bins_range.1,
            n_fits: self.n_fits,
            seed: self.seed,
        }
    }
}

/// Parsed and filtered inputs shared by every command.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub n_rows: usize,
    pub rejections: Vec<Rejection>,
    pub eligible: Vec<PublicationRecord>,
    pub budgets: BTreeMap<AwardCode, f64>,
    pub budget_rejections: Vec<Rejection>,
}

impl Corpus {
    pub fn fwci_values(&self) -> Vec<f64> {
        self.eligible.iter().filter_map(|r| r.fwci).collect()
    }

    pub fn summaries(&self) -> Vec<AwardSummary> {
        summarize_awards(&self.eligible, &self.budgets)
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn load_corpus(config: &RunConfig) -> Result<Corpus> {
    config.validate()?;
    let parsed = parse_records(open(&config.input_path)?, InputFormat::from_path(&config.input_path))?;
    let n_rows = parsed.records.len() + parsed.rejections.len();
    let eligible = filter_eligible(&parsed.records, &config.policy());
    let (budgets, budget_rejections) = match &config.budget_path {
        Some(path) => parse_budgets(open(path)?)?,
        None => Default::default(),
    };
    Ok(Corpus { n_rows, rejections: parsed.rejections, eligible, budgets, budget_rejections })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

fn write_json_lines<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut out = create(path)?;
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        writeln!(out).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// `3243` -> `3,243`.
pub fn group_thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

// ---------------------------------------------------------------- ingest

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub config: RunConfig,
    pub n_rows: usize,
    pub n_rejected: usize,
    pub n_budget_rejected: usize,
    pub n_eligible: usize,
    pub n_low: usize,
    pub n_main: usize,
    pub low_fraction: f64,
    pub totals: PortfolioTotals,
    /// Budgeted awards with no eligible publication.
    pub awards_without_papers: Vec<AwardCode>,
}

impl IngestReport {
    pub fn headline(&self) -> String {
        format!(
            "{} awards, {} publications",
            group_thousands(self.totals.n_awards),
            group_thousands(self.totals.n_papers)
        )
    }
}

pub fn cmd_ingest(config: &RunConfig) -> Result<IngestReport> {
    let corpus = load_corpus(config)?;
    let summaries = corpus.summaries();
    let (low, main) = split_low_fwci(&corpus.eligible, config.low_cut);
    let awards_without_papers = corpus
        .budgets
        .keys()
        .filter(|code| summaries.binary_search_by(|s| s.award_code.cmp(code)).is_err())
        .cloned()
        .collect();

    let out = &config.output_dir;
    write_json_lines(&out.join("eligible_records.jsonl"), &corpus.eligible)?;
    write_json_lines(&out.join("rejections.jsonl"), &corpus.rejections)?;
    if config.budget_path.is_some() {
        write_json_lines(&out.join("budget_rejections.jsonl"), &corpus.budget_rejections)?;
    }
    write_csv(&out.join("award_summaries.csv"), &summaries)?;

    let n_eligible = corpus.eligible.len();
    let report = IngestReport {
        config: config.clone(),
        n_rows: corpus.n_rows,
        n_rejected: corpus.rejections.len(),
        n_budget_rejected: corpus.budget_rejections.len(),
        n_eligible,
        n_low: low.len(),
        n_main: main.len(),
        low_fraction: if n_eligible == 0 { 0.0 } else { low.len() as f64 / n_eligible as f64 },
        totals: portfolio_totals(&summaries),
        awards_without_papers,
    };
    write_json(&out.join("ingest_report.json"), &report)?;
    Ok(report)
}

// ------------------------------------------------------------------- fit

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub n_eligible: usize,
    pub n_low: usize,
    pub n_main: usize,
    /// Main-sample values inside the open fit range.
    pub n_fitted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalLogCheck {
    pub amplitude: f64,
    pub mu: f64,
    pub sigma: f64,
    pub n_bins: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub config: RunConfig,
    pub sample: SampleCounts,
    pub ensemble: FitEnsemble,
    /// Statistics of the central fit.
    pub derived: DerivedStats,
    /// Plain average over all eligible papers, low-FWCI ones included.
    pub naive_mean_all: Option<f64>,
    /// Plain average over the main sample.
    pub naive_mean_main: Option<f64>,
    pub normal_log_check: Option<NormalLogCheck>,
}

#[derive(Serialize)]
struct HistRow {
    center: f64,
    count: u64,
    excluded: bool,
}

#[derive(Serialize)]
struct CurveRow {
    x: f64,
    expected_count: f64,
}

fn hist_rows(hist: &Histogram, cut: f64) -> Vec<HistRow> {
    let w = hist.width();
    hist.bins().map(|(center, count)| HistRow { center, count, excluded: center - 0.5 * w < cut }).collect()
}

/// Layout with `width`-wide bins covering `values` from a multiple of `width`.
fn covering_layout(values: &[f64], width: f64) -> Option<(f64, f64, usize)> {
    let min = values.iter().copied().reduce(f64::min)?;
    let max = values.iter().copied().reduce(f64::max)?;
    let lo = (min / width).floor() * width;
    let n = ((max - lo) / width).floor() as usize + 1;
    Some((lo, lo + n as f64 * width, n))
}

fn normal_log_check(main: &[f64]) -> Option<NormalLogCheck> {
    let logs: Vec<f64> = main.iter().filter(|&&v| v > 0.0).map(|v| v.ln()).collect();
    let (lo, hi, n) = covering_layout(&logs, LOG_BIN_WIDTH)?;
    let hist = build_histogram(&logs, lo, hi, n).ok()?;
    match fit_normal_log(&hist) {
        Ok(fit) => Some(NormalLogCheck {
            amplitude: fit.amplitude,
            mu: fit.params.mu,
            sigma: fit.params.sigma,
            n_bins: n,
            converged: fit.converged,
        }),
        Err(e) => {
            log::warn!("normal fit to ln(FWCI) skipped: {e}");
            None
        }
    }
}

pub fn cmd_fit(config: &RunConfig) -> Result<FitReport> {
    let corpus = load_corpus(config)?;
    let all = corpus.fwci_values();
    let (low, main) = split_low_fwci(&corpus.eligible, config.low_cut);
    let main: Vec<f64> = main.iter().filter_map(|r| r.fwci).collect();
    let (lo, hi) = config.fit_range;
    let fitted: Vec<f64> = main.iter().copied().filter(|&v| v > lo && v < hi).collect();
    if fitted.is_empty() {
        return Err(Error::InsufficientData(format!("no FWCI values in ({lo}, {hi}) after the low cut")));
    }

    let ensemble = ensemble_fit(&fitted, &config.ensemble())?;
    let central = ensemble.central();
    let derived = derived_stats(&central, INTERVAL_COVERAGE)?;

    let report = FitReport {
        config: config.clone(),
        sample: SampleCounts { n_eligible: all.len(), n_low: low.len(), n_main: main.len(), n_fitted: fitted.len() },
        ensemble,
        derived,
        naive_mean_all: mean(&all),
        naive_mean_main: mean(&main),
        normal_log_check: normal_log_check(&fitted),
    };

    write_fit_series(config, &all, fitted.len(), &central)?;
    write_json(&config.output_dir.join("fit_report.json"), &report)?;
    Ok(report)
}

fn write_fit_series(config: &RunConfig, all: &[f64], n_fitted: usize, central: &LognormalParams) -> Result<()> {
    let out = &config.output_dir;
    let (lo, hi) = config.fit_range;

    let n_linear = (((hi - lo) / LINEAR_BIN_WIDTH).round() as usize).max(1);
    let linear = build_histogram(all, lo, hi, n_linear)?;
    write_csv(&out.join("fit_linear_hist.csv"), &hist_rows(&linear, config.low_cut))?;
    let w = linear.width();
    let curve: Vec<CurveRow> = (1..=CURVE_POINTS)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / CURVE_POINTS as f64;
            let density = pdf(x, central).unwrap_or(0.0);
            CurveRow { x, expected_count: n_fitted as f64 * w * density }
        })
        .collect();
    write_csv(&out.join("fit_linear_curve.csv"), &curve)?;

    let logs = log_transform(all, ZERO_SHIFT)?;
    let log_cut = if config.low_cut > 0.0 { config.low_cut.ln() } else { f64::NEG_INFINITY };
    let (rows, curve) = match covering_layout(&logs, LOG_BIN_WIDTH) {
        Some((t_lo, t_hi, n)) => {
            let hist = build_histogram(&logs, t_lo, t_hi, n)?;
            let norm = n_fitted as f64 * LOG_BIN_WIDTH / (central.sigma * (2.0 * std::f64::consts::PI).sqrt());
            let curve = (0..CURVE_POINTS)
                .map(|i| {
                    let t = t_lo + (t_hi - t_lo) * i as f64 / (CURVE_POINTS - 1) as f64;
                    CurveRow { x: t, expected_count: norm * crate::lognormal::bell(t, central) }
                })
                .collect();
            (hist_rows(&hist, log_cut), curve)
        }
        None => (Vec::new(), Vec::new()),
    };
    write_csv(&out.join("fit_log_hist.csv"), &rows)?;
    write_csv(&out.join("fit_log_curve.csv"), &curve)
}

// ------------------------------------------------------------- benchmark

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: RunConfig,
    pub aggregate: BenchmarkAggregate,
    pub awards: Vec<AwardBenchmark>,
}

fn benchmark_table(path: &Path, benchmarks: &[AwardBenchmark], sigmas: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["award_code".to_string(), "n_papers".into(), "observed_mean".into()];
    for s in sigmas {
        header.push(format!("threshold_s2_{s}"));
        header.push(format!("verdict_s2_{s}"));
    }
    out.write_record(&header)?;
    for b in benchmarks {
        let mut row = vec![b.award_code.to_string(), b.n_papers.to_string(), b.observed_mean.to_string()];
        for v in &b.verdicts {
            row.push(v.threshold.to_string());
            row.push(match v.verdict {
                Verdict::AboveMedian => "above_median".into(),
                Verdict::BelowMedian => "below_median".into(),
            });
        }
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn cmd_benchmark(config: &RunConfig) -> Result<BenchmarkReport> {
    let corpus = load_corpus(config)?;
    let baselines = config.baselines()?;
    let summaries: Vec<AwardSummary> = corpus.summaries().into_iter().filter(|s| s.mean_fwci.is_some()).collect();
    if summaries.is_empty() {
        log::warn!("no awards to benchmark");
    }
    let awards = benchmark_awards(&summaries, &baselines, config.reps, config.seed)?;
    let report = BenchmarkReport { config: config.clone(), aggregate: aggregate_benchmarks(&awards), awards };

    benchmark_table(&config.output_dir.join("benchmark_table.csv"), &report.awards, &config.sigma_sq_list)?;
    write_json(&config.output_dir.join("benchmark_report.json"), &report)?;
    Ok(report)
}

// ----------------------------------------------------------------- curve

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub config: RunConfig,
    pub n_values: Vec<usize>,
    pub points: Vec<MedianCurvePoint>,
}

/// Median-of-means series for each `n` in `n_list` and each baseline.
/// Repeated `n` values are dropped with a warning. `input_path` is unused.
pub fn cmd_curve(config: &RunConfig, n_list: &[usize]) -> Result<CurveReport> {
    config.validate()?;
    let mut n_values: Vec<usize> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n_values.contains(&n) {
            log::warn!("n = {n} repeated; computing it once");
        } else {
            n_values.push(n);
        }
    }
    let points = median_curve(&n_values, &config.baselines()?, config.reps, config.seed)?;
    write_csv(&config.output_dir.join("median_curve.csv"), &points)?;
    let report = CurveReport { config: config.clone(), n_values, points };
    write_json(&config.output_dir.join("curve_report.json"), &report)?;
    Ok(report)
}
