//! Seeded two-run and reference-run experiments.
//!
//! Seeds are derived from the master seed with [`rng::derive_seed`] as
//! `(master, index, role)`:
//!
//! * problem: `(master, problem.seed, PROBLEM)`, shared by every run;
//! * reference point `u0` of repeat `k`: `(master, k, REFERENCE_POINT)`;
//! * run `j` of repeat `k`: init seed `(master, 2k + j', INIT)` and oracle
//!   seed `(master, 2k + j'', ORACLE)`, where `j'` is `j` in the
//!   initialization channel and `0` otherwise, and `j''` is `j` in the
//!   gradient channels and `0` otherwise.
//!
//! The two runs of a pair therefore differ only in the channel under study.
//! A reference-run pair shares every seed and sets `delta = 0` on run `a`.

mod config;
mod report;

pub use config::{AlgoEntry, AlgoSpec, Channel, ExperimentConfig, InitSpec, Preset, Protocol, ScscParams};
pub(crate) use report::{plot_series, PlotMetric};
pub use report::{
    trajectory_rows, write_long_csv, write_plotdata, write_trajectory_csv, AlgoReport, PairCheckpoint, PairRecord,
    ProblemSummary, Report, SeriesRow, Summary, TrajectoryRow, LONG_CSV_HEADER,
};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config_err, Result};
use crate::metrics::{deviation_sq_flat, duality_gap_closed_form, optimality_gap};
use crate::min_solvers::{agd, gd, inexact_agd, reg_min};
use crate::minimax_solvers::{eg, gda, inexact_eg_scsc, inexact_gda_scsc, inexact_ppm, reg_minimax, sgda};
use crate::oracles::{draw_init, OracleKind, OracleSpec};
use crate::problems::{Domain, Instance};
use crate::rng::{self, role};
use crate::run::SolverRun;

/// Seeds of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub reference_point: u64,
    pub init: u64,
    pub oracle: u64,
}

impl RunSeeds {
    /// The seed of the channel under study.
    pub fn channel_seed(&self, channel: Channel) -> u64 {
        match channel {
            Channel::Initialization => self.init,
            Channel::DeterministicGradient | Channel::StochasticGradient => self.oracle,
        }
    }
}

pub fn problem_seed(config: &ExperimentConfig) -> u64 {
    rng::derive_seed(config.master_seed, config.problem.spec().seed, role::PROBLEM)
}

/// Seeds for both runs of repeat `k`.
pub fn seed_protocol(config: &ExperimentConfig, k: usize) -> [RunSeeds; 2] {
    let m = config.master_seed;
    let k = k as u64;
    let per_run = |j: u64, varies: bool, r| rng::derive_seed(m, 2 * k + if varies { j } else { 0 }, r);
    let init_varies = config.protocol == Protocol::TwoRun && config.channel == Channel::Initialization;
    let oracle_varies = config.protocol == Protocol::TwoRun && config.channel != Channel::Initialization;
    [0, 1].map(|j| RunSeeds {
        reference_point: rng::derive_seed(m, k, role::REFERENCE_POINT),
        init: per_run(j, init_varies, role::INIT),
        oracle: per_run(j, oracle_varies, role::ORACLE),
    })
}

/// Builds the shared problem instance with its derived seed.
pub fn build_instance(config: &ExperimentConfig) -> Result<Instance> {
    let mut doc = config.problem.clone();
    doc.spec_mut().seed = problem_seed(config);
    doc.build()
}

/// Lowercase hex SHA-256 of the config's canonical JSON (keys sorted).
pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let value = serde_json::to_value(config)?;
    let digest = Sha256::digest(serde_json::to_string(&value)?.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn instance_domain(instance: &Instance) -> &Domain {
    match instance {
        Instance::Min(p) => p.domain(),
        Instance::Minimax(p) => p.joint(),
    }
}

fn unit_sphere(s: &mut rng::Stream, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| s.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|a| a * radius / norm).collect();
        }
    }
}

/// The reference point `u0` of a repeat.
pub fn reference_point(config: &ExperimentConfig, instance: &Instance, seed: u64) -> Result<Vec<f64>> {
    let dim = instance_domain(instance).dim();
    match &config.init {
        InitSpec::Origin => Ok(vec![0.0; dim]),
        InitSpec::Point { point } => {
            if point.len() != dim {
                return config_err(format!("init point has {} coordinates, expected {dim}", point.len()));
            }
            Ok(point.clone())
        }
        InitSpec::Sphere { radius } => {
            let mut s = rng::stream(seed, 0, role::REFERENCE_POINT);
            Ok(match instance {
                Instance::Min(p) => unit_sphere(&mut s, p.dim(), *radius),
                Instance::Minimax(p) => {
                    let (dx, dy) = p.dims();
                    let mut u = unit_sphere(&mut s, dx, *radius);
                    u.extend(unit_sphere(&mut s, dy, *radius));
                    u
                }
            })
        }
    }
}

fn run_solver(instance: &Instance, algo: &AlgoSpec, oracle: &OracleSpec, z0: &[f64]) -> Result<SolverRun> {
    let need_min = || config_err(format!("{} needs a minimization problem", algo.name()));
    let need_minimax = || config_err(format!("{} needs a minimax problem", algo.name()));
    match (instance, algo) {
        (Instance::Min(p), AlgoSpec::Gd(params)) => gd(p, oracle, z0, params),
        (Instance::Min(p), AlgoSpec::Agd(params)) => agd(p, oracle, z0, params),
        (Instance::Min(p), AlgoSpec::InexactAgd(params)) => inexact_agd(p, oracle, z0, params.r, &params.solver()),
        (Instance::Min(p), AlgoSpec::RegMin(params)) => reg_min(p, oracle, z0, params),
        (Instance::Min(_), _) => need_minimax(),
        (Instance::Minimax(p), algo) => {
            let z0 = crate::JointPoint::split(&z0.to_vec().into(), p.dims().0);
            match algo {
                AlgoSpec::Gda(params) => gda(p, oracle, &z0, params),
                AlgoSpec::Sgda(params) => sgda(p, oracle, &z0, params),
                AlgoSpec::Eg(params) => eg(p, oracle, &z0, params),
                AlgoSpec::InexactGdaScsc(params) => inexact_gda_scsc(p, oracle, &z0, params.iters, &params.schedule),
                AlgoSpec::InexactEgScsc(params) => inexact_eg_scsc(p, oracle, &z0, params.iters, &params.schedule),
                AlgoSpec::RegMinimax(params) => reg_minimax(p, oracle, &z0, params),
                AlgoSpec::InexactPpm(params) => inexact_ppm(p, oracle, &z0, params),
                _ => need_min(),
            }
        }
    }
}

/// Gap of `z` against the instance's known optimum, when one is available.
pub fn gap_at(instance: &Instance, z: &[f64]) -> Option<f64> {
    match instance {
        Instance::Min(p) => optimality_gap(p, z).ok(),
        Instance::Minimax(p) => {
            let dx = p.dims().0;
            duality_gap_closed_form(p, &z[..dx], &z[dx..]).ok()
        }
    }
}

/// Distance from `z` to the known minimizer or saddle point.
pub fn dist_at(instance: &Instance, z: &[f64]) -> Option<f64> {
    let opt = match instance {
        Instance::Min(p) => p.minimizer()?.clone(),
        Instance::Minimax(p) => p.saddle()?.flatten(),
    };
    deviation_sq_flat(opt.as_slice(), z).ok().map(f64::sqrt)
}

struct PairRuns {
    seeds: [RunSeeds; 2],
    init_offsets: [f64; 2],
    runs: [SolverRun; 2],
}

fn run_pair(
    config: &ExperimentConfig,
    instance: &Instance,
    algo: &AlgoSpec,
    k: usize,
) -> Result<PairRuns> {
    let seeds = seed_protocol(config, k);
    let u0 = reference_point(config, instance, seeds[0].reference_point)?;
    let domain = instance_domain(instance);
    let mut offsets = [0.0; 2];
    let mut runs = Vec::with_capacity(2);
    for (j, s) in seeds.iter().enumerate() {
        let mut spec = config.oracle;
        if config.protocol == Protocol::ReferenceRun && j == 0 {
            spec.delta = 0.0;
        }
        let draw = draw_init(&spec.with_seed(s.init), domain, &u0)?;
        offsets[j] = draw.offset_norm;
        runs.push(run_solver(instance, algo, &spec.with_seed(s.oracle), &draw.x0)?);
    }
    let runs: [SolverRun; 2] = runs.try_into().expect("two runs");
    Ok(PairRuns { seeds, init_offsets: offsets, runs })
}

/// Runs the configured protocol for every algorithm.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let instance = build_instance(config)?;
    let repeats = config.repeat_count();
    let mut algorithms = Vec::with_capacity(config.algorithms.len());
    for entry in &config.algorithms {
        let algo = entry.resolve(config, &instance)?;
        let pairs = (0..repeats)
            .into_par_iter()
            .map(|k| run_pair(config, &instance, &algo, k))
            .collect::<Result<Vec<_>>>()?;
        let records = pairs
            .into_iter()
            .enumerate()
            .map(|(k, p)| PairRecord::new(&instance, k, p.seeds, p.init_offsets, &p.runs))
            .collect::<Result<Vec<_>>>()?;
        algorithms.push(AlgoReport::new(entry.label(), algo.name(), records));
    }
    Report::new(config, &instance, algorithms)
}

/// Runs the two-run protocol; a config error for other protocols.
pub fn run_two_run(config: &ExperimentConfig) -> Result<Report> {
    if config.protocol != Protocol::TwoRun {
        return config_err("run_two_run needs protocol two_run");
    }
    run_experiment(config)
}

/// Runs the reference-run protocol; a config error for other protocols.
pub fn run_reference(config: &ExperimentConfig) -> Result<Report> {
    if config.protocol != Protocol::ReferenceRun {
        return config_err("run_reference needs protocol reference_run");
    }
    run_experiment(config)
}

/// Runs every config on a pool of `jobs` threads; results come back in input
/// order and failures are kept per entry.
pub fn sweep(configs: &[ExperimentConfig], jobs: usize) -> Result<Vec<Result<Report>>> {
    if configs.is_empty() {
        return config_err("sweep needs at least one config");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| configs.par_iter().map(run_experiment).collect()))
}

/// Oracle kinds compatible with a perturbation channel.
pub fn channel_accepts(channel: Channel, kind: OracleKind) -> bool {
    matches!(
        (channel, kind),
        (_, OracleKind::Exact)
            | (Channel::Initialization, OracleKind::InexactInit)
            | (Channel::DeterministicGradient, OracleKind::InexactGrad)
            | (Channel::StochasticGradient, OracleKind::StochasticGrad)
    )
}
