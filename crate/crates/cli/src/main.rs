use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use fwci_core::commands::{cmd_benchmark, cmd_curve, cmd_fit, cmd_ingest, group_thousands, RunConfig};
use fwci_core::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// FWCI decomposition, lognormal fitting and small-sample benchmarking of
/// grant portfolios.
#[derive(Debug, Parser)]
#[command(name = "fwci", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, filter and summarize a publication export.
    Ingest(Common),
    /// Random-bin ensemble fit of the lognormal to the main sample.
    Fit(Common),
    /// Compare each award mean with the simulated median for its size.
    Benchmark(Common),
    /// Median-of-means series for a list of paper counts.
    Curve {
        #[command(flatten)]
        common: Common,
        /// Paper counts, comma separated.
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Publication export (.csv, or .jsonl for one JSON object per line).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Budget file with columns award_code,budget_eur.
    #[arg(long)]
    budgets: Option<PathBuf>,
    /// Papers with FWCI below this are left out of the fit.
    #[arg(long, default_value_t = 0.1)]
    low_cut: f64,
    /// Fit range LO:HI.
    #[arg(long, default_value = "0:8")]
    range: Pair<f64>,
    /// Bin-count range LO:HI for the ensemble.
    #[arg(long, default_value = "20:800")]
    bins: Pair<usize>,
    /// Number of ensemble fits.
    #[arg(long, default_value_t = 10_000)]
    fits: usize,
    /// Baseline sigma^2 values, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,1.3,1.8")]
    sigma2: Vec<f64>,
    /// Simulated awards per paper count.
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy)]
struct Pair<T>(T, T);

impl<T: FromStr> FromStr for Pair<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<T>().map_err(|_| format!("bad number {v:?} in {s:?}"));
        Ok(Pair(parse(a)?, parse(b)?))
    }
}

impl Common {
    fn into_config(self) -> RunConfig {
        RunConfig {
            input_path: self.input.unwrap_or_default(),
            budget_path: self.budgets,
            low_cut: self.low_cut,
            fit_range: (self.range.0, self.range.1),
            bins_range: (self.bins.0, self.bins.1),
            n_fits: self.fits,
            sigma_sq_list: self.sigma2,
            reps: self.reps,
            seed: self.seed,
            output_dir: self.out,
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) | Error::InputNotFound(_) => EXIT_USAGE,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_DATA,
    }
}

fn require_input(config: &RunConfig) -> Result<(), Error> {
    if config.input_path.as_os_str().is_empty() {
        return Err(Error::InvalidArgument("--input is required".into()));
    }
    Ok(())
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Ingest(common) => {
            let config = common.into_config();
            require_input(&config)?;
            let r = cmd_ingest(&config)?;
            println!("{}", r.headline());
            println!(
                "{} rows read, {} rejected, {} eligible",
                group_thousands(r.n_rows),
                group_thousands(r.n_rejected),
                group_thousands(r.n_eligible)
            );
            println!(
                "FWCI < {}: {} ({:.1}%), main sample {}",
                config.low_cut,
                group_thousands(r.n_low),
                100.0 * r.low_fraction,
                group_thousands(r.n_main)
            );
            if let Some(cost) = r.totals.cost_per_paper {
                println!("cost per paper: EUR {}", group_thousands(cost.round() as usize));
            }
        }
        Command::Fit(common) => {
            let config = common.into_config();
            require_input(&config)?;
            let r = cmd_fit(&config)?;
            let e = &r.ensemble;
            println!(
                "mu = {:.4} (+{:.4}/-{:.4}), sigma = {:.4} (+{:.4}/-{:.4}) from {} fits ({} failed)",
                e.mu.p50,
                e.mu.plus(),
                e.mu.minus(),
                e.sigma.p50,
                e.sigma.plus(),
                e.sigma.minus(),
                e.n_fits,
                e.n_failed
            );
            println!(
                "median {:.4}, fitted mean {:.4} (+{:.4}/-{:.4}), naive mean {}",
                r.derived.median,
                e.mean.p50,
                e.mean.plus(),
                e.mean.minus(),
                r.naive_mean_main.map_or("n/a".into(), |m| format!("{m:.4}"))
            );
        }
        Command::Benchmark(common) => {
            let config = common.into_config();
            require_input(&config)?;
            let r = cmd_benchmark(&config)?;
            let a = &r.aggregate;
            println!(
                "{} awards, {} with mean FWCI >= 1 ({:.0}%)",
                a.n_awards,
                a.mean_at_least_one,
                100.0 * a.fraction_mean_at_least_one
            );
            for t in &a.per_baseline {
                println!(
                    "sigma^2 = {}: {} above median ({:.0}%), {} of them below mean 1",
                    t.sigma_sq,
                    t.above_median,
                    100.0 * t.fraction_above,
                    t.below_one_above_median
                );
            }
        }
        Command::Curve { common, n_list } => {
            let config = common.into_config();
            let r = cmd_curve(&config, &n_list)?;
            for p in &r.points {
                println!("sigma^2 = {}, n = {}: median mean {:.4}", p.sigma_sq, p.n, p.median_mean);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
