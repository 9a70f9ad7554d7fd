//! Command-line experiment harness.

use biprank::config::PartialConfig;
use biprank::experiment::{rate_experiment, rate_slope, run_experiment, RateConfig};
use biprank::scoregen::ScoreGen;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "biprank",
    about = "Bipartite ranking experiments: rank-statistic maximization on synthetic Gaussian models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded Monte-Carlo training/evaluation experiment.
    Run(RunArgs),
    /// Estimate how the sup deviation of the rank criterion shrinks with N.
    Rate(RateArgs),
    /// Run the fast invariant self-checks.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model preset: loc1..loc3, scale1..scale3, loc:eps=<x>, scale:eps=<x>.
    #[arg(long)]
    preset: Option<String>,
    /// Score-generating function spec (repeatable), e.g. mww, pol:q=3,
    /// rtb:u0=0.9,beta=50,lambda=50.
    #[arg(long = "phi")]
    phis: Vec<String>,
    /// Scorer class: linear or quadscale.
    #[arg(long)]
    scorer: Option<String>,
    /// Feature dimension d.
    #[arg(long)]
    dim: Option<usize>,
    /// Master seed; every stream in the run derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Positive and negative test-sample size (n_test = m_test).
    #[arg(long)]
    test_size: Option<usize>,
    /// Training sample size per class (n_train = m_train).
    #[arg(long)]
    train_size: Option<usize>,
    /// Number of Monte-Carlo replications B.
    #[arg(long)]
    replications: Option<usize>,
    /// Distance ranking the best/worst curves: sup (default) or l1.
    #[arg(long)]
    best_worst_metric: Option<String>,
    /// Gradient-ascent iterations T.
    #[arg(long)]
    iterations: Option<usize>,
    /// Also render static SVG charts of the ROC grid and the trajectories.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Score-generating function of the statistic under study.
    #[arg(long, default_value = "mww")]
    phi: String,
    /// Comma-separated pooled-size ladder.
    #[arg(long, default_value = "100,400,1600,6400", value_delimiter = ',')]
    ladder: Vec<usize>,
    /// Number of fixed random linear scorers.
    #[arg(long, default_value_t = 25)]
    scorers: usize,
    #[arg(long, default_value_t = 15)]
    dim: usize,
    /// Location-model shift of the data-generating pair.
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Optional CSV output path for the table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Rate(args) => rate(args),
        Command::Check(args) => check(args),
    }
}

fn run(args: RunArgs) -> ExitCode {
    let file = match &args.config {
        Some(path) => match PartialConfig::from_file(path) {
            Ok(partial) => partial,
            Err(err) => {
                eprintln!("error: {err}");
                return ExitCode::from(2);
            }
        },
        None => PartialConfig::default(),
    };
    let overrides = PartialConfig {
        preset: args.preset,
        dim: args.dim,
        scorer: args.scorer,
        phi_specs: if args.phis.is_empty() {
            None
        } else {
            Some(args.phis)
        },
        n_train: args.train_size,
        m_train: args.train_size,
        n_test: args.test_size,
        m_test: args.test_size,
        replications: args.replications,
        best_worst_metric: args.best_worst_metric,
        iterations: args.iterations,
        seed: args.seed,
        out_dir: args.out,
        svg: if args.svg { Some(true) } else { None },
        ..Default::default()
    };
    let cfg = match file.merged_with(overrides).resolve() {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };

    match run_experiment(&cfg) {
        Ok(result) => {
            println!(
                "model {} | scorer {} | B = {} | seed {}",
                cfg.model.spec_string(),
                cfg.scorer.as_str(),
                cfg.replications,
                cfg.master_seed
            );
            println!("reference AUC* = {:.6}", result.reference_auc);
            for agg in &result.aggregates {
                println!(
                    "phi {:<24} mean test AUC = {:.6} (std {:.6}) | best rep {} | worst rep {}",
                    agg.phi, agg.mean_auc, agg.std_auc, agg.best_rep, agg.worst_rep
                );
            }
            for failure in &result.failures {
                eprintln!(
                    "replication {} phi {} failed: {}",
                    failure.rep, failure.phi, failure.message
                );
            }
            println!("artifacts written to {}", cfg.out_dir.display());
            if result.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn rate(args: RateArgs) -> ExitCode {
    let phi = match ScoreGen::parse(&args.phi) {
        Ok(phi) => phi,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };
    let cfg = RateConfig {
        phi,
        n_ladder: args.ladder,
        scorer_count: args.scorers,
        dim: args.dim,
        epsilon: args.epsilon,
        seed: args.seed,
    };
    match rate_experiment(&cfg) {
        Ok(table) => {
            println!(
                "{:>8} {:>16} {:>12} {:>12}",
                "N", "sup_deviation", "log N", "log dev"
            );
            for point in &table {
                println!(
                    "{:>8} {:>16.6} {:>12.4} {:>12.4}",
                    point.n_pooled,
                    point.sup_deviation,
                    (point.n_pooled as f64).ln(),
                    point.sup_deviation.ln()
                );
            }
            println!("log-log slope = {:.4}", rate_slope(&table));
            if let Some(path) = args.out {
                let mut csv = String::from("n_pooled,sup_deviation\n");
                for point in &table {
                    csv.push_str(&format!("{},{:.6}\n", point.n_pooled, point.sup_deviation));
                }
                if let Some(parent) = path.parent() {
                    let _ = std::fs::create_dir_all(parent);
                }
                if let Err(err) = std::fs::write(&path, csv) {
                    eprintln!("error writing {}: {err}", path.display());
                    return ExitCode::from(1);
                }
                println!("table written to {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn check(args: CheckArgs) -> ExitCode {
    let outcomes = biprank::checks::self_check(args.seed);
    let mut ok = true;
    for outcome in &outcomes {
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("check {:<28} {status}  ({})", outcome.name, outcome.detail);
        ok &= outcome.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
