use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::metrics::{deviation_sq_flat, rate_slope};
use crate::problems::Instance;
use crate::run::{RunStatus, SolverRun};

use super::{config_hash, dist_at, gap_at, problem_seed, Channel, ExperimentConfig, Protocol, RunSeeds};

pub const LONG_CSV_HEADER: [&str; 9] = ["experiment_id", "algo", "channel", "delta", "run", "t", "metric", "value", "seed"];

/// Mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, n }
    }

    fn of_options(values: impl Iterator<Item = Option<f64>>) -> Option<Self> {
        let v: Option<Vec<f64>> = values.collect();
        v.filter(|v| !v.is_empty()).map(|v| Self::of(&v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    pub kind: String,
    pub dim: usize,
    pub ell: f64,
    pub mu: f64,
    /// `f_gap` or `duality_gap`.
    pub gap_metric: String,
    /// `dist_to_opt` or `dist_to_saddle`.
    pub dist_metric: String,
}

impl ProblemSummary {
    fn new(config: &ExperimentConfig, instance: &Instance) -> Self {
        let kind = serde_json::to_value(&config.problem)
            .ok()
            .and_then(|v| v.get("kind").and_then(|k| k.as_str().map(String::from)))
            .unwrap_or_default();
        match instance {
            Instance::Min(p) => Self {
                kind,
                dim: p.dim(),
                ell: p.ell(),
                mu: p.mu(),
                gap_metric: "f_gap".into(),
                dist_metric: "dist_to_opt".into(),
            },
            Instance::Minimax(p) => Self {
                kind,
                dim: p.joint().dim(),
                ell: p.ell(),
                mu: p.mu(),
                gap_metric: "duality_gap".into(),
                dist_metric: "dist_to_saddle".into(),
            },
        }
    }
}

/// Both runs of a pair at one shared checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCheckpoint {
    pub t: usize,
    /// Between the algorithm outputs (running averages where averaging).
    pub deviation_sq: f64,
    pub iterate_deviation_sq: f64,
    pub gap: [Option<f64>; 2],
    pub dist: [Option<f64>; 2],
    pub oracle_calls: [u64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub repeat: usize,
    pub seeds: [RunSeeds; 2],
    pub init_offsets: [f64; 2],
    pub outputs: [Vec<f64>; 2],
    pub final_deviation_sq: f64,
    pub final_iterate_deviation_sq: f64,
    pub final_gap: [Option<f64>; 2],
    pub final_dist: [Option<f64>; 2],
    pub certificates: [Option<f64>; 2],
    pub status: [RunStatus; 2],
    pub iterations: [usize; 2],
    pub oracle_calls: [u64; 2],
    pub series: Vec<PairCheckpoint>,
}

impl PairRecord {
    pub fn new(
        instance: &Instance,
        repeat: usize,
        seeds: [RunSeeds; 2],
        init_offsets: [f64; 2],
        runs: &[SolverRun; 2],
    ) -> Result<Self> {
        let [a, b] = runs;
        let mut series = Vec::new();
        for ca in &a.checkpoints {
            let Some(cb) = b.checkpoint_at(ca.t) else { continue };
            series.push(PairCheckpoint {
                t: ca.t,
                deviation_sq: deviation_sq_flat(&ca.output, &cb.output)?,
                iterate_deviation_sq: deviation_sq_flat(&ca.iterate, &cb.iterate)?,
                gap: [gap_at(instance, &ca.output), gap_at(instance, &cb.output)],
                dist: [dist_at(instance, &ca.output), dist_at(instance, &cb.output)],
                oracle_calls: [ca.oracle_calls, cb.oracle_calls],
            });
        }
        Ok(Self {
            repeat,
            seeds,
            init_offsets,
            outputs: [a.output.clone(), b.output.clone()],
            final_deviation_sq: deviation_sq_flat(&a.output, &b.output)?,
            final_iterate_deviation_sq: deviation_sq_flat(&a.last_iterate, &b.last_iterate)?,
            final_gap: [gap_at(instance, &a.output), gap_at(instance, &b.output)],
            final_dist: [dist_at(instance, &a.output), dist_at(instance, &b.output)],
            certificates: [a.certificate, b.certificate],
            status: [a.status, b.status],
            iterations: [a.iterations, b.iterations],
            oracle_calls: [a.oracle_calls, b.oracle_calls],
            series,
        })
    }

    pub fn complete(&self) -> bool {
        self.status.iter().all(|s| *s != RunStatus::BudgetExceeded)
    }
}

/// Across-pair aggregate at one checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: usize,
    pub deviation_sq: Summary,
    pub gap: [Option<Summary>; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSlopes {
    /// Log-log slope of the mean gap of each run against `t >= 10`.
    pub gap: [Option<f64>; 2],
    pub deviation_sq: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoReport {
    pub label: String,
    pub algo: String,
    pub complete: bool,
    pub final_deviation_sq: Summary,
    pub final_gap: [Option<Summary>; 2],
    pub rate_slopes: RateSlopes,
    pub series: Vec<SeriesRow>,
    pub pairs: Vec<PairRecord>,
}

const SLOPE_WINDOW: (f64, f64) = (10.0, f64::INFINITY);

impl AlgoReport {
    pub fn new(label: String, algo: &str, pairs: Vec<PairRecord>) -> Self {
        let finals: Vec<f64> = pairs.iter().map(|p| p.final_deviation_sq).collect();
        let final_gap = [0, 1].map(|j| Summary::of_options(pairs.iter().map(|p| p.final_gap[j])));
        let series: Vec<SeriesRow> = pairs[0]
            .series
            .iter()
            .enumerate()
            .filter_map(|(i, c)| {
                let rows: Option<Vec<&PairCheckpoint>> =
                    pairs.iter().map(|p| p.series.get(i).filter(|r| r.t == c.t)).collect();
                let rows = rows?;
                let dev: Vec<f64> = rows.iter().map(|r| r.deviation_sq).collect();
                Some(SeriesRow {
                    t: c.t,
                    deviation_sq: Summary::of(&dev),
                    gap: [0, 1].map(|j| Summary::of_options(rows.iter().map(|r| r.gap[j]))),
                })
            })
            .collect();
        let slope = |f: &dyn Fn(&SeriesRow) -> Option<f64>| {
            let pts: Option<Vec<(f64, f64)>> = series.iter().map(|r| f(r).map(|v| (r.t as f64, v))).collect();
            pts.and_then(|p| rate_slope(&p, Some(SLOPE_WINDOW)).ok())
        };
        let rate_slopes = RateSlopes {
            gap: [0, 1].map(|j| slope(&|r: &SeriesRow| r.gap[j].map(|s| s.mean))),
            deviation_sq: slope(&|r: &SeriesRow| Some(r.deviation_sq.mean)),
        };
        Self {
            label,
            algo: algo.to_string(),
            complete: pairs.iter().all(PairRecord::complete),
            final_deviation_sq: Summary::of(&finals),
            final_gap,
            rate_slopes,
            series,
            pairs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment_id: String,
    pub config_hash: String,
    pub protocol: Protocol,
    pub channel: Channel,
    pub delta: f64,
    pub master_seed: u64,
    pub problem_seed: u64,
    pub problem: ProblemSummary,
    pub repeats: usize,
    /// False when some run hit its iteration cap before certifying.
    pub complete: bool,
    pub algorithms: Vec<AlgoReport>,
}

impl Report {
    pub fn new(config: &ExperimentConfig, instance: &Instance, algorithms: Vec<AlgoReport>) -> Result<Self> {
        Ok(Self {
            experiment_id: config.experiment_id.clone(),
            config_hash: config_hash(config)?,
            protocol: config.protocol,
            channel: config.channel,
            delta: config.oracle.delta,
            master_seed: config.master_seed,
            problem_seed: problem_seed(config),
            problem: ProblemSummary::new(config, instance),
            repeats: config.repeat_count(),
            complete: algorithms.iter().all(|a| a.complete),
            algorithms,
        })
    }

    pub fn algorithm(&self, label: &str) -> Option<&AlgoReport> {
        self.algorithms.iter().find(|a| a.label == label)
    }
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Long-format series: one row per (algorithm, pair, checkpoint, metric).
/// Pair metrics carry the second run's channel seed; per-run metrics are
/// suffixed `_a` and `_b` and carry their own run's seed.
pub fn write_long_csv<W: Write>(report: &Report, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LONG_CSV_HEADER)?;
    let channel = report.channel.as_str();
    let delta = num(report.delta);
    let gap = &report.problem.gap_metric;
    let dist = &report.problem.dist_metric;
    for algo in &report.algorithms {
        for pair in &algo.pairs {
            let run = pair.repeat.to_string();
            let seeds = pair.seeds.map(|s| s.channel_seed(report.channel).to_string());
            for c in &pair.series {
                let t = c.t.to_string();
                let mut row = |metric: &str, value: String, seed: &str| {
                    w.write_record([&report.experiment_id, &algo.label, channel, &delta, &run, &t, metric, &value, seed])
                };
                row("deviation_sq", num(c.deviation_sq), &seeds[1])?;
                row("deviation", num(c.deviation_sq.sqrt()), &seeds[1])?;
                row("iterate_deviation_sq", num(c.iterate_deviation_sq), &seeds[1])?;
                for (j, suffix) in ["a", "b"].iter().enumerate() {
                    if let Some(v) = c.gap[j] {
                        row(&format!("{gap}_{suffix}"), num(v), &seeds[j])?;
                    }
                    if let Some(v) = c.dist[j] {
                        row(&format!("{dist}_{suffix}"), num(v), &seeds[j])?;
                    }
                    row(&format!("oracle_calls_{suffix}"), c.oracle_calls[j].to_string(), &seeds[j])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// One trajectory row per run and checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub run_id: usize,
    pub algo: String,
    pub t: usize,
    pub f_gap: Option<f64>,
    pub dist_to_opt: Option<f64>,
    pub duality_gap: Option<f64>,
    pub dist_to_saddle: Option<f64>,
    pub oracle_calls: u64,
}

/// Per-run trajectories; run `2k + j` is run `j` of pair `k`.
pub fn trajectory_rows(report: &Report) -> Vec<TrajectoryRow> {
    let minimax = report.problem.gap_metric == "duality_gap";
    let mut rows = Vec::new();
    for algo in &report.algorithms {
        for pair in &algo.pairs {
            for j in 0..2 {
                for c in &pair.series {
                    let (gap, dist) = (c.gap[j], c.dist[j]);
                    rows.push(TrajectoryRow {
                        run_id: 2 * pair.repeat + j,
                        algo: algo.label.clone(),
                        t: c.t,
                        f_gap: gap.filter(|_| !minimax),
                        dist_to_opt: dist.filter(|_| !minimax),
                        duality_gap: gap.filter(|_| minimax),
                        dist_to_saddle: dist.filter(|_| minimax),
                        oracle_calls: c.oracle_calls[j],
                    });
                }
            }
        }
    }
    rows
}

pub fn write_trajectory_csv<W: Write>(report: &Report, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run_id", "algo", "t", "f_gap", "dist_to_opt", "duality_gap", "dist_to_saddle", "oracle_calls"])?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for r in trajectory_rows(report) {
        w.write_record([
            r.run_id.to_string(),
            r.algo,
            r.t.to_string(),
            opt(r.f_gap),
            opt(r.dist_to_opt),
            opt(r.duality_gap),
            opt(r.dist_to_saddle),
            r.oracle_calls.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// File-name-safe version of a label.
pub(crate) fn slug(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' }).collect()
}

/// `(t, value)` pairs for one plotted metric, `t >= 1`.
pub(crate) fn plot_series(algo: &AlgoReport, metric: PlotMetric) -> Vec<(usize, f64)> {
    algo.series
        .iter()
        .filter(|r| r.t >= 1)
        .filter_map(|r| {
            let v = match metric {
                PlotMetric::Gap => r.gap[1].map(|s| s.mean),
                PlotMetric::Deviation => Some(r.deviation_sq.mean),
            }?;
            Some((r.t, v))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PlotMetric {
    /// Mean gap of the second (perturbed) run.
    Gap,
    /// Mean squared deviation between the runs.
    Deviation,
}

/// Writes `plotdata/<label>_<metric>.csv` files with columns `t,value` for
/// each algorithm's gap and squared deviation, and returns their paths.
pub fn write_plotdata(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for algo in &report.algorithms {
        for (metric, name) in [(PlotMetric::Gap, report.problem.gap_metric.as_str()), (PlotMetric::Deviation, "deviation_sq")] {
            let path = dir.join(format!("{}_{name}.csv", slug(&algo.label)));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["t", "value"])?;
            for (t, v) in plot_series(algo, metric) {
                w.write_record([t.to_string(), num(v)])?;
            }
            w.flush()?;
            paths.push(path);
        }
    }
    Ok(paths)
}
