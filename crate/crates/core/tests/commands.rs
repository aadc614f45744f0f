mod common;

use std::fs;

use common::*;
use fwci_core::commands::{cmd_benchmark, cmd_curve, cmd_fit, cmd_ingest, RunConfig};
use fwci_core::Error;

const HEADER: &str = "award_code,year,pub_type,fwci,citations,title,source_id\n";

fn small_config(input: &std::path::Path, out: &std::path::Path) -> RunConfig {
    RunConfig { n_fits: 200, reps: 2_000, seed: 3, ..RunConfig::new(input, out) }
}

#[test]
fn ingest_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("export.csv");
    let budgets = dir.path().join("budgets.csv");
    fs::write(
        &input,
        format!(
            "{HEADER}SFI/12/IA/1570,2014,Article,2.0,10,a,1\n\
             12/1A/1570,2015,Letter,0.05,0,b,2\n\
             12/IA/1570,2015,Article,1.0,4,dup,1\n\
             13/IA/0002,2016,Review,3.0,9,c,3\n\
             13/IA/0002,2016,Conference Paper,,1,d,4\n\
             14/IA/2884,2016,Article,1.0,1,e,5\n\
             14/IB/2884,2016,Article,1.0,1,f,6\n"
        ),
    )
    .unwrap();
    fs::write(&budgets, "award_code,budget_eur\n12/IA/1570,\"1,000,000\"\n15/IA/0001,500\nnope,1\n").unwrap();
    let out = dir.path().join("out");
    let config = RunConfig { budget_path: Some(budgets), ..small_config(&input, &out) };

    let report = cmd_ingest(&config).unwrap();
    assert_eq!(report.n_rows, 7);
    // Duplicate source id and the malformed code.
    assert_eq!(report.n_rejected, 2);
    assert_eq!(report.n_budget_rejected, 1);
    // The review and the paper without FWCI are not eligible.
    assert_eq!(report.n_eligible, 3);
    assert_eq!(report.n_low, 1);
    assert_eq!(report.headline(), "2 awards, 3 publications");
    assert_eq!(report.totals.cost_per_paper, Some(500_000.0));
    assert_eq!(report.awards_without_papers.len(), 1);

    for name in [
        "eligible_records.jsonl",
        "rejections.jsonl",
        "budget_rejections.jsonl",
        "award_summaries.csv",
        "ingest_report.json",
    ] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let eligible = fs::read_to_string(out.join("eligible_records.jsonl")).unwrap();
    assert_eq!(eligible.lines().count(), 3);
}

#[test]
fn empty_file_yields_empty_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.csv");
    fs::write(&input, HEADER).unwrap();
    let out = dir.path().join("out");
    let config = small_config(&input, &out);
    let report = cmd_ingest(&config).unwrap();
    assert_eq!(report.headline(), "0 awards, 0 publications");
    assert!(matches!(cmd_fit(&config), Err(Error::InsufficientData(_))));
    let bench = cmd_benchmark(&config).unwrap();
    assert!(bench.awards.is_empty());
}

#[test]
fn missing_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(&dir.path().join("absent.csv"), &dir.path().join("out"));
    assert!(matches!(cmd_ingest(&config), Err(Error::InputNotFound(_))));
}

#[test]
fn fit_recovers_synthetic_portfolio() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("export.csv");
    fs::write(&input, portfolio_csv(120, 40, -0.0761, 0.933, 13)).unwrap();
    let config = RunConfig { n_fits: 500, ..small_config(&input, &dir.path().join("out")) };
    let report = cmd_fit(&config).unwrap();
    assert!(report.sample.n_fitted > 1500);
    assert!((report.ensemble.mu.p50 + 0.0761).abs() < 0.1, "{:?}", report.ensemble.mu);
    assert!((report.ensemble.sigma.p50 - 0.933).abs() < 0.1, "{:?}", report.ensemble.sigma);
    let check = report.normal_log_check.unwrap();
    assert!((check.mu - report.ensemble.mu.p50).abs() < 0.15);
    assert!(report.derived.mode < report.derived.median && report.derived.median < report.derived.mean);
}

#[test]
fn reruns_and_thread_counts_agree() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("export.csv");
    fs::write(&input, portfolio_csv(30, 20, -0.65, 1.3f64.sqrt(), 14)).unwrap();
    let config = small_config(&input, &dir.path().join("out"));
    let a = cmd_benchmark(&config).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| cmd_benchmark(&config).unwrap());
    assert_eq!(a, b);
    let f1 = cmd_fit(&config).unwrap();
    let f2 = pool.install(|| cmd_fit(&config).unwrap());
    assert_eq!(f1, f2);
}

#[test]
fn curve_deduplicates_and_orders() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(&dir.path().join("unused.csv"), &dir.path().join("out"));
    let report = cmd_curve(&config, &[1, 46, 1, 400]).unwrap();
    assert_eq!(report.n_values, vec![1, 46, 400]);
    assert_eq!(report.points.len(), 9);
    assert!(dir.path().join("out/median_curve.csv").is_file());
    assert!(matches!(cmd_curve(&config, &[]), Err(Error::InvalidArgument(_))));
}
