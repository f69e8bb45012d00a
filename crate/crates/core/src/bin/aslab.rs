use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aslab::harness::{
    self, cmd_compare, cmd_estimate, cmd_generate, cmd_plot, cmd_predict, cmd_selftest, diagnostic,
    exit_code, params_from_json, Mutation, RunConfig,
};
use aslab::{Error, Result};

/// Assouad-type dimension spectra: generate clouds, estimate spectra,
/// predict them from parameters, compare and plot.
#[derive(Parser)]
#[command(name = "aslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Run configuration (JSON, schema 1).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generator preset (apollonian, cauliflower, petal2, petal4, zlattice1, zlattice2).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comparison tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
}

/// Comma-separated θ values.
#[derive(Clone, Debug)]
struct Thetas(Vec<f64>);

fn parse_thetas(s: &str) -> std::result::Result<Thetas, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad θ '{t}': {e}"))
        })
        .collect::<std::result::Result<_, _>>()
        .map(Thetas)
}

#[derive(Subcommand)]
enum Command {
    /// Generate a preset point cloud (CSV and binary).
    Generate {
        #[command(flatten)]
        common: Common,
        /// Lattice radius.
        #[arg(long)]
        n: Option<usize>,
        /// Inverse-iteration steps.
        #[arg(long)]
        iters: Option<usize>,
        /// Random backward walks.
        #[arg(long)]
        seeds: Option<usize>,
        /// Sampling resolution.
        #[arg(long)]
        eps: Option<f64>,
        /// Point cap.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Estimate spectra of a cloud or a measure oracle.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Cloud file to estimate instead of the configured source.
        #[arg(long)]
        cloud: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_parser = parse_thetas)]
        thetas: Option<Thetas>,
    },
    /// Predict the four spectra from parameters.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Parameters JSON (overrides prediction.params).
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, value_parser = parse_thetas)]
        thetas: Option<Thetas>,
    },
    /// Compare estimate CSVs against a prediction CSV.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long = "estimate", required = true)]
        estimates: Vec<PathBuf>,
        #[arg(long)]
        prediction: PathBuf,
    },
    /// Plot a prediction and/or estimates as SVG.
    Plot {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        prediction: Option<PathBuf>,
        #[arg(long = "estimate")]
        estimates: Vec<PathBuf>,
    },
    /// Run the reduced-scale invariant suites.
    Selftest {
        #[command(flatten)]
        common: Common,
        /// Perturb a formula constant; the self-test must then fail.
        #[arg(long, hide = true)]
        mutate: Option<String>,
    },
}

fn base_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &common.preset {
        cfg.generator.preset = Some(p.clone());
        cfg.generator.cloud = None;
        cfg.generator.oracle = None;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(t) = common.tolerance {
        cfg.tolerance = Some(t);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("ASLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "ASLAB_THREADS must be a positive integer, got '{v}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn run(cli: Cli) -> Result<i32> {
    configure_threads()?;
    match cli.command {
        Command::Generate {
            common,
            n,
            iters,
            seeds,
            eps,
            cap,
        } => {
            let mut cfg = base_config(&common)?;
            let o = &mut cfg.generator.options;
            o.n = n.or(o.n);
            o.iterations = iters.or(o.iterations);
            o.seeds = seeds.or(o.seeds);
            o.cap = cap.or(o.cap);
            if let Some(e) = eps {
                o.eps_proj = Some(e);
                o.resolution = Some(e);
            }
            print_json(&cmd_generate(&cfg)?)?;
            Ok(0)
        }
        Command::Estimate {
            common,
            cloud,
            n,
            thetas,
        } => {
            let mut cfg = base_config(&common)?;
            if let Some(c) = cloud {
                cfg.generator = harness::GeneratorSpec {
                    cloud: Some(c),
                    ..Default::default()
                };
            }
            cfg.generator.options.n = n.or(cfg.generator.options.n);
            if let Some(t) = thetas {
                cfg.estimator.thetas = t.0;
            }
            cfg.validate()?;
            print_json(&cmd_estimate(&cfg)?)?;
            Ok(0)
        }
        Command::Predict {
            common,
            params,
            thetas,
        } => {
            let mut cfg = base_config(&common)?;
            if let Some(p) = params {
                let text = std::fs::read_to_string(&p).map_err(|e| {
                    Error::InvalidConfig(format!("cannot read {}: {e}", p.display()))
                })?;
                cfg.prediction.params = Some(params_from_json(&text)?);
            }
            if let Some(t) = thetas {
                cfg.prediction.thetas = t.0;
            }
            cfg.validate()?;
            print_json(&cmd_predict(&cfg)?)?;
            Ok(0)
        }
        Command::Compare {
            common,
            estimates,
            prediction,
        } => {
            let cfg = base_config(&common)?;
            let report = cmd_compare(&cfg, &estimates, &prediction, cfg.tolerance)?;
            let total: usize = report.series.iter().map(|s| s.rows.len()).sum();
            let mut failed = 0;
            for (s, r) in report.failing_rows() {
                failed += 1;
                println!(
                    "FAIL {} theta={} predicted={} estimated={} abs_error={} tolerance={}{}",
                    s.column,
                    r.theta,
                    r.predicted,
                    r.estimated
                        .map(|v| v.to_string())
                        .unwrap_or_else(|| "none".into()),
                    r.abs_error
                        .map(|v| v.to_string())
                        .unwrap_or_else(|| "none".into()),
                    s.tolerance,
                    if r.status == "ok" {
                        String::new()
                    } else {
                        format!(" ({})", r.status)
                    }
                );
            }
            if report.all_pass {
                println!("PASS {total} rows within tolerance");
                Ok(0)
            } else {
                eprintln!("ERR: {failed} of {total} rows outside tolerance");
                Ok(harness::EXIT_FAILED)
            }
        }
        Command::Plot {
            common,
            prediction,
            estimates,
        } => {
            let cfg = base_config(&common)?;
            print_json(&cmd_plot(&cfg, prediction.as_deref(), &estimates)?)?;
            Ok(0)
        }
        Command::Selftest { common, mutate } => {
            let cfg = base_config(&common)?;
            let mutation = mutate
                .or_else(|| std::env::var("ASLAB_SELFTEST_MUTATE").ok())
                .map(|m| m.parse::<Mutation>())
                .transpose()?;
            let report = cmd_selftest(&cfg, mutation)?;
            print_json(&report)?;
            if report.all_pass {
                Ok(0)
            } else {
                eprintln!(
                    "ERR: selftest failed {} of {} checks",
                    report.failed,
                    report.failed + report.passed
                );
                Ok(harness::EXIT_FAILED)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("ERR: {}", first.trim_start_matches("error: "));
            return ExitCode::from(harness::EXIT_INPUT as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", diagnostic(&e));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
