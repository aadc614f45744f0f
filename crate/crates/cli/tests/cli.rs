use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "award_code,year,pub_type,fwci,citations,title,source_id\n";

fn fwci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwci")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_exits_zero() {
    let out = fwci(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("benchmark"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&fwci(&[])), 1);
    assert_eq!(code(&fwci(&["fit", "--range", "8"])), 1);
    assert_eq!(code(&fwci(&["ingest"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let out = fwci(&["ingest", "--input", path(&dir.path().join("absent.csv")), "--out", path(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));
    let bad_sigma = fwci(&["curve", "--n", "1", "--sigma2", "-1", "--out", path(dir.path())]);
    assert_eq!(code(&bad_sigma), 1);
}

#[test]
fn unreadable_export_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("broken.csv");
    fs::write(&input, "something,else\n1,2\n").unwrap();
    let out = fwci(&["ingest", "--input", path(&input), "--out", path(&dir.path().join("out"))]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn empty_export_ingests_and_fit_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.csv");
    fs::write(&input, HEADER).unwrap();
    let out_dir = dir.path().join("out");
    let ingest = fwci(&["ingest", "--input", path(&input), "--out", path(&out_dir)]);
    assert_eq!(code(&ingest), 0);
    assert!(String::from_utf8_lossy(&ingest.stdout).starts_with("0 awards, 0 publications\n"));
    let fit = fwci(&["fit", "--input", path(&input), "--out", path(&out_dir)]);
    assert_eq!(code(&fit), 3);
}

#[test]
fn headline_groups_thousands() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("export.csv");
    let mut text = String::from(HEADER);
    for i in 0..1234 {
        text.push_str(&format!("SFI/13/IA/{:04},2015,Article,{},,t,{i}\n", i % 7, 0.05 + (i % 50) as f64 / 10.0));
    }
    fs::write(&input, text).unwrap();
    let out = fwci(&["ingest", "--input", path(&input), "--out", path(&dir.path().join("out"))]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("7 awards, 1,234 publications\n"), "{stdout}");
}

#[test]
fn full_pipeline_runs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("export.csv");
    let mut text = String::from(HEADER);
    for i in 0..600 {
        let v = (0.3 + 2.5 * ((i * 37 % 101) as f64 / 101.0)).powi(2) / 2.0;
        text.push_str(&format!("13/IA/{:04},2015,Article,{v},,t,{i}\n", i % 12));
    }
    fs::write(&input, text).unwrap();
    let out_dir = dir.path().join("out");
    let common = ["--input", path(&input), "--out", path(&out_dir), "--fits", "100", "--reps", "1000"];
    for cmd in ["fit", "benchmark"] {
        let mut args = vec![cmd];
        args.extend(common);
        let out = fwci(&args);
        assert_eq!(code(&out), 0, "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let curve = fwci(&["curve", "--n", "1,46", "--reps", "1000", "--out", path(&out_dir)]);
    assert_eq!(code(&curve), 0);
    assert_eq!(String::from_utf8_lossy(&curve.stdout).lines().count(), 6);
    for name in ["fit_report.json", "benchmark_table.csv", "median_curve.csv"] {
        assert!(out_dir.join(name).is_file(), "{name}");
    }
}
