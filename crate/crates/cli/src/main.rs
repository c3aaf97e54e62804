use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};
use reproopt::figures::{self, FigureId};
use reproopt::harness::{self, write_long_csv, write_plotdata, write_trajectory_csv, ExperimentConfig, Report};
use reproopt::verify::{self, Suite, VerifyOptions};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "reproopt", version, about = "Reproducibility experiments for first-order methods under inexact oracles")]
struct Cli {
    /// Increase log verbosity (-v debug, -vv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config.
    Run(RunArgs),
    /// Run several experiment configs in parallel.
    Sweep(SweepArgs),
    /// Regenerate the figure series and SVG panels.
    Figures(FiguresArgs),
    /// Run the invariant or acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Overrides {
    /// Override a config value by dotted path, e.g. `oracle.delta=0`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Master seed; shorthand for `--set master_seed=N`.
    #[arg(long)]
    seed: Option<u64>,
}

impl Overrides {
    fn pairs(&self) -> anyhow::Result<Vec<(String, String)>> {
        let mut pairs = self.set.iter().map(|kv| split_override(kv)).collect::<anyhow::Result<Vec<_>>>()?;
        if let Some(seed) = self.seed {
            pairs.push(("master_seed".into(), seed.to_string()));
        }
        Ok(pairs)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct SweepArgs {
    /// Config files; each report goes to `<out>/<index>_<experiment_id>/`.
    #[arg(long, value_name = "PATH", required = true, num_args = 1..)]
    config: Vec<PathBuf>,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct FiguresArgs {
    /// Figure id, or `all`.
    #[arg(long, default_value = "all")]
    figure: String,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, default_value_t = figures::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "invariants")]
    suite: String,
    /// Directory for the pass/fail table.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// `eg.stepsize_scale=X` or `seed=N`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: EXIT_CONFIG, error: e.into() }
    }
}

fn split_override(kv: &str) -> anyhow::Result<(String, String)> {
    match kv.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => bail!("override '{kv}' is not of the form key=value"),
    }
}

fn load_config(path: &Path, overrides: &[(String, String)]) -> anyhow::Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    ExperimentConfig::from_json_with_overrides(&text, overrides).with_context(|| format!("in {}", path.display()))
}

fn write_report(report: &Report, out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let json = serde_json::to_string_pretty(report)?;
    fs::write(out.join("report.json"), json + "\n")?;
    write_long_csv(report, BufWriter::new(fs::File::create(out.join("series.csv"))?))?;
    write_trajectory_csv(report, BufWriter::new(fs::File::create(out.join("trajectory.csv"))?))?;
    write_plotdata(report, &out.join("plotdata"))?;
    Ok(())
}

fn budget_check(report: &Report) -> Result<(), Failure> {
    if report.complete {
        return Ok(());
    }
    let labels: Vec<&str> = report.algorithms.iter().filter(|a| !a.complete).map(|a| a.label.as_str()).collect();
    Err(Failure {
        code: EXIT_BUDGET,
        error: anyhow::anyhow!("{}: iteration budget exhausted before the stopping certificate for {labels:?}", report.experiment_id),
    })
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let config = load_config(&args.config, &args.overrides.pairs()?)?;
    let started = Instant::now();
    let report = harness::run_experiment(&config)?;
    info!("{}: wall time {:.2} s", config.experiment_id, started.elapsed().as_secs_f64());
    write_report(&report, &args.out)?;
    for algo in &report.algorithms {
        println!("{:<12} final deviation_sq {:.6e}", algo.label, algo.final_deviation_sq.mean);
    }
    budget_check(&report)
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let overrides = args.overrides.pairs()?;
    let configs = args.config.iter().map(|p| load_config(p, &overrides)).collect::<anyhow::Result<Vec<_>>>()?;
    let started = Instant::now();
    let jobs = if args.jobs == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { args.jobs };
    let results = harness::sweep(&configs, jobs)?;
    info!("sweep of {} configs: wall time {:.2} s", configs.len(), started.elapsed().as_secs_f64());
    let mut code = 0;
    for (i, (config, result)) in configs.iter().zip(results).enumerate() {
        match result {
            Ok(report) => {
                write_report(&report, &args.out.join(format!("{i}_{}", config.experiment_id)))?;
                if let Err(f) = budget_check(&report) {
                    warn!("{:#}", f.error);
                    code = code.max(f.code);
                }
                println!("{i} {} ok", config.experiment_id);
            }
            Err(e) => {
                error!("{}: {e}", config.experiment_id);
                println!("{i} {} failed", config.experiment_id);
                code = code.max(EXIT_CONFIG);
            }
        }
    }
    if code == 0 {
        Ok(())
    } else {
        Err(Failure { code, error: anyhow::anyhow!("some sweep entries did not complete") })
    }
}

fn cmd_figures(args: &FiguresArgs) -> Result<(), Failure> {
    let ids = if args.figure == "all" { FigureId::ALL.to_vec() } else { vec![args.figure.parse::<FigureId>()?] };
    for id in ids {
        let started = Instant::now();
        let out = figures::run_figure(id, args.seed, &args.out)?;
        info!("{id}: wall time {:.2} s", started.elapsed().as_secs_f64());
        for path in out.csv.iter().chain(&out.svg) {
            println!("{}", path.display());
        }
        budget_check(&out.report)?;
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let suite: Suite = args.suite.parse()?;
    let mut opts = VerifyOptions::default();
    for kv in &args.set {
        let (k, v) = split_override(kv)?;
        opts.set(&k, &v)?;
    }
    if let Some(seed) = args.seed {
        opts.master_seed = seed;
    }
    let started = Instant::now();
    let rows = verify::run_suite(suite, &opts)?;
    info!("{} suite: wall time {:.2} s", args.suite, started.elapsed().as_secs_f64());
    for row in &rows {
        println!("{row}");
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let path = dir.join(format!("verify_{}.csv", args.suite));
        verify::write_table(&rows, BufWriter::new(fs::File::create(&path)?))?;
        info!("wrote {}", path.display());
    }
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_VERIFY_FAILED, error: anyhow::anyhow!("failed checks: {}", failed.join(", ")) })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Figures(a) => cmd_figures(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
