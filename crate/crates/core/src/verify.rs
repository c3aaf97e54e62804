//! Acceptance criteria and module invariants as pass/fail tables with
//! measured values and pinned tolerances.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::figures::{figure_config, FigureId};
use crate::harness::{
    run_experiment, write_long_csv, AlgoEntry, AlgoSpec, Channel, ExperimentConfig, InitSpec, Preset, Protocol, Report,
};
use crate::metrics::{deviation_sq_flat, duality_gap_closed_form, linear_gap, rate_slope};
use crate::min_solvers::{inexact_agd, reg_min, MinBase, MinSolverParams, RegMinParams, StopRule};
use crate::minimax_solvers::{
    eg, gda, inexact_eg_scsc, inexact_gda_scsc, inexact_ppm, oracle_certificate, reg_minimax, InnerStop, MinimaxBase,
    MinimaxSolverParams, OutputMode, PpmParams, RegMinimaxParams, StepPolicy, Stepsize,
};
use crate::oracles::{audit_inexactness, Anchored, GradMode, OracleKind, OracleSpec, Simulated};
use crate::point::JointPoint;
use crate::problems::{make_bilinear_game, make_scsc_quadratic, Domain, Instance, InstanceDoc, InstanceSeedSpec, MinimaxProblem};
use crate::rng::{self, role};
use crate::run::{RunStatus, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Invariants,
    Acceptance,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "invariants" => Ok(Suite::Invariants),
            "acceptance" => Ok(Suite::Acceptance),
            _ => config_err(format!("unknown suite '{s}'; expected invariants or acceptance")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub master_seed: u64,
    /// Multiplies every EG stepsize; values far from 1 should fail the
    /// rate checks.
    pub eg_stepsize_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { master_seed: 1, eg_stepsize_scale: 1.0 }
    }
}

impl VerifyOptions {
    /// Applies a `key=value` override: `seed` or `eg.stepsize_scale`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Config(format!("invalid value '{value}' for {key}"));
        match key {
            "seed" | "master_seed" => self.master_seed = value.parse().map_err(|_| bad())?,
            "eg.stepsize_scale" => {
                let v: f64 = value.parse().map_err(|_| bad())?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(bad());
                }
                self.eg_stepsize_scale = v;
            }
            _ => return config_err(format!("unknown verify override '{key}'; expected seed or eg.stepsize_scale")),
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tolerance {
    Below { limit: f64 },
    AtMost { limit: f64 },
    Range { lo: f64, hi: f64 },
}

impl Tolerance {
    pub fn accepts(&self, v: f64) -> bool {
        match *self {
            Tolerance::Below { limit } => v < limit,
            Tolerance::AtMost { limit } => v <= limit,
            Tolerance::Range { lo, hi } => lo <= v && v <= hi,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Below { limit } => write!(f, "< {limit}"),
            Tolerance::AtMost { limit } => write!(f, "<= {limit}"),
            Tolerance::Range { lo, hi } => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub id: String,
    pub description: String,
    pub measured: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(id: &str, description: impl Into<String>, measured: f64, tolerance: Tolerance) -> Self {
        Self { id: id.into(), description: description.into(), measured, pass: tolerance.accepts(measured), tolerance }
    }
}

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<5} {}: measured {:.6e}, required {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.description,
            self.measured,
            self.tolerance
        )
    }
}

fn below(limit: f64) -> Tolerance {
    Tolerance::Below { limit }
}

fn at_most(limit: f64) -> Tolerance {
    Tolerance::AtMost { limit }
}

fn range(lo: f64, hi: f64) -> Tolerance {
    Tolerance::Range { lo, hi }
}

/// Rows of one criterion and the bytes of the data it measured.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionOutcome {
    pub rows: Vec<CheckRow>,
    pub artifact: Vec<u8>,
}

/// `key,value` lines with full-precision values.
#[derive(Default)]
struct Artifact(Vec<u8>);

impl Artifact {
    fn put(&mut self, key: &str, value: f64) {
        let _ = writeln!(self.0, "{key},{value:?}");
    }
}

fn runtime_row(id: &str, started: Instant, limit: f64) -> CheckRow {
    CheckRow::new(id, "runtime in seconds", started.elapsed().as_secs_f64(), at_most(limit))
}

fn seed_for(opts: &VerifyOptions, criterion: u64, k: u64) -> u64 {
    rng::derive_seed(opts.master_seed, criterion * 1_000_000 + k, role::PROBLEM)
}

fn spec(seed: u64, d: usize, eig_lo: f64, eig_hi: f64, zeros: usize) -> InstanceSeedSpec {
    InstanceSeedSpec { seed, d, eig_lo, eig_hi, zeros }
}

fn sphere(s: &mut rng::Stream, n: usize, radius: f64) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| s.sample::<f64, _>(StandardNormal)).collect();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.into_iter().map(|a| a * radius / norm).collect()
}

fn joint_sphere(p: &MinimaxProblem, radius: f64, seed: u64) -> JointPoint {
    let (dx, dy) = p.dims();
    let mut s = rng::stream(seed, 0, role::REFERENCE_POINT);
    let x = sphere(&mut s, dx, radius);
    JointPoint { x, y: sphere(&mut s, dy, radius) }
}

fn gap_of(p: &MinimaxProblem, z: &[f64]) -> f64 {
    let dx = p.dims().0;
    duality_gap_closed_form(p, &z[..dx], &z[dx..]).unwrap_or(f64::NAN)
}

fn final_gap(report: &Report, label: &str) -> f64 {
    report.algorithm(label).and_then(|a| a.final_gap[1]).map_or(f64::NAN, |s| s.mean)
}

fn final_dev(report: &Report, label: &str) -> f64 {
    report.algorithm(label).map_or(f64::NAN, |a| a.final_deviation_sq.mean)
}

fn report_bytes(report: &Report) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_long_csv(report, &mut buf)?;
    Ok(buf)
}

fn scale_eg(config: &mut ExperimentConfig, scale: f64) {
    for entry in &mut config.algorithms {
        if let AlgoSpec::Eg(p) = &mut entry.algo {
            if let Stepsize::Value(v) = p.stepsize {
                p.stepsize = Stepsize::Value(v * scale);
            }
        }
    }
}

/// Regularization versus plain methods on the rank-deficient quadratic.
pub fn criterion_1(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let started = Instant::now();
    let report = run_experiment(&figure_config(FigureId::MinInexactGrad, opts.master_seed))?;
    let rows = vec![
        CheckRow::new("1a", "Reg-AGD / AGD final deviation", final_dev(&report, "Reg-AGD") / final_dev(&report, "AGD"), below(0.2)),
        CheckRow::new("1b", "Reg-GD / GD final deviation", final_dev(&report, "Reg-GD") / final_dev(&report, "GD"), below(1.0)),
        CheckRow::new("1c", "Reg-AGD / AGD optimality gap at T", final_gap(&report, "Reg-AGD") / final_gap(&report, "AGD"), at_most(10.0)),
        runtime_row("1d", started, 60.0),
    ];
    Ok(CriterionOutcome { rows, artifact: report_bytes(&report)? })
}

/// Regularization versus plain methods on the bilinear game.
pub fn criterion_2(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let started = Instant::now();
    let mut config = figure_config(FigureId::MinimaxInexactGrad, opts.master_seed);
    scale_eg(&mut config, opts.eg_stepsize_scale);
    let report = run_experiment(&config)?;
    let rows = vec![
        CheckRow::new("2a", "Reg-EG / EG final deviation", final_dev(&report, "Reg-EG") / final_dev(&report, "EG"), below(0.1)),
        CheckRow::new("2b", "Reg-EG / EG duality gap at T", final_gap(&report, "Reg-EG") / final_gap(&report, "EG"), at_most(10.0)),
        runtime_row("2c", started, 120.0),
    ];
    Ok(CriterionOutcome { rows, artifact: report_bytes(&report)? })
}

/// Log-log slopes of the averaged duality gap of EG and GDA.
pub fn criterion_3(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let started = Instant::now();
    let p = make_bilinear_game(&spec(seed_for(opts, 3, 0), 50, 0.1, 10.0, 1), 10.0)?;
    let z0 = joint_sphere(&p, 5.0, seed_for(opts, 3, 1));
    let exact = OracleSpec::exact();
    let mut art = Artifact::default();
    let (mut eg_series, mut gda_series) = (Vec::new(), Vec::new());
    for k in 8..=13 {
        let t = 1usize << k;
        let mut params = MinimaxSolverParams::new(t)
            .with_stepsize(Stepsize::Value(opts.eg_stepsize_scale / p.ell()))
            .with_output(OutputMode::Average);
        params.schedule = Schedule::FinalOnly;
        let g = gap_of(&p, &eg(&p, &exact, &z0, &params)?.output);
        art.put(&format!("eg_gap_{t}"), g);
        eg_series.push((t as f64, g));
        params.stepsize = Stepsize::Policy(StepPolicy::InvSqrtT);
        let g = gap_of(&p, &gda(&p, &exact, &z0, &params)?.output);
        art.put(&format!("gda_gap_{t}"), g);
        gda_series.push((t as f64, g));
    }
    let slope = |s: &[(f64, f64)]| rate_slope(s, None).unwrap_or(f64::NAN);
    let rows = vec![
        CheckRow::new("3a", "EG averaged-gap slope over T = 2^8..2^13", slope(&eg_series), range(-1.25, -0.75)),
        CheckRow::new("3b", "GDA averaged-gap slope, stepsize 1/(l sqrt T)", slope(&gda_series), range(-0.75, -0.3)),
        runtime_row("3c", started, 60.0),
    ];
    Ok(CriterionOutcome { rows, artifact: art.0 })
}

/// Regularized minimizers are no farther apart than their anchors.
pub fn criterion_4(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let started = Instant::now();
    let mut art = Artifact::default();
    let mut worst = f64::NEG_INFINITY;
    let mut certified = 0;
    let n = 100;
    for k in 0..n {
        let doc = InstanceDoc::QuadraticMin {
            spec: spec(seed_for(opts, 4, k), 10, 0.1, 3.0, 1),
            b_scale: 1.0,
            radius: (k % 2 == 1).then_some(3.0),
        };
        let Instance::Min(p) = doc.build()? else { unreachable!("quadratic instances are minimization problems") };
        let mut s = rng::stream(seed_for(opts, 4, n + k), 0, role::REFERENCE_POINT);
        let x0: Vec<f64> = sphere(&mut s, 10, 1.0);
        let offset = sphere(&mut s, 10, 0.5);
        let x1: Vec<f64> = x0.iter().zip(&offset).map(|(a, b)| a + b).collect();
        let mut params = RegMinParams::new(0.1, 1e-12, MinBase::InexactAgd);
        params.stop = StopRule::Certificate;
        params.max_iters = Some(1_000_000);
        params.schedule = Schedule::Every { step: 50 };
        let ra = reg_min(&p, &OracleSpec::exact(), &x0, &params)?;
        let rb = reg_min(&p, &OracleSpec::exact(), &x1, &params)?;
        certified += usize::from(ra.status == RunStatus::Certified && rb.status == RunStatus::Certified);
        let excess = deviation_sq_flat(&ra.output, &rb.output)? - deviation_sq_flat(&x0, &x1)?;
        art.put(&format!("excess_{k}"), excess);
        worst = worst.max(excess);
    }
    let rows = vec![
        CheckRow::new("4a", "pairs solved to F_r gap 1e-12", certified as f64, range(n as f64, n as f64)),
        CheckRow::new("4b", "max ||x_r - x_r'||^2 - ||x0 - x0'||^2 over 100 quadratics", worst, at_most(1e-5)),
        runtime_row("4c", started, 30.0),
    ];
    Ok(CriterionOutcome { rows, artifact: art.0 })
}

fn c5_config(opts: &VerifyOptions, delta: f64) -> ExperimentConfig {
    let mut gda_params = MinimaxSolverParams::new(1000).with_stepsize(Stepsize::Policy(StepPolicy::InvSqrtT));
    gda_params.schedule = Schedule::FinalOnly;
    let mut reg = RegMinimaxParams::new(1.0, 1.0, MinimaxBase::Eg);
    reg.stop = StopRule::Certificate;
    reg.max_iters = Some(1_000_000);
    reg.base_stepsize = None;
    let mut ppm = PpmParams::new(1.0, 1.0, 50, MinimaxBase::Eg);
    ppm.inner_stop = InnerStop::Certificate;
    ppm.inner_max_iters = Some(100_000);
    ExperimentConfig {
        experiment_id: format!("two_run_bounds_delta_{delta}"),
        problem: InstanceDoc::Bilinear { spec: spec(5, 20, 0.1, 1.0, 1), radius: 1.0 },
        oracle: OracleSpec::new(OracleKind::InexactInit, delta, GradMode::default(), 0),
        algorithms: vec![
            AlgoEntry::new("GDA", AlgoSpec::Gda(gda_params)),
            AlgoEntry::new("Reg-EG", AlgoSpec::RegMinimax(reg)).with_preset(Preset::RegInit { eps: 0.1 }),
            AlgoEntry::new("PPM", AlgoSpec::InexactPpm(ppm)).with_preset(Preset::PpmInit),
        ],
        protocol: Protocol::TwoRun,
        channel: Channel::Initialization,
        master_seed: opts.master_seed,
        repeats: Some(8),
        init: InitSpec::Sphere { radius: 0.5 },
        schedule: Some(Schedule::FinalOnly),
    }
}

/// Two-run deviation bounds under an inexact initialization.
pub fn criterion_5(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let started = Instant::now();
    let mut art = Vec::new();
    let mut rows = Vec::new();
    for (i, delta) in [0.05, 0.2].into_iter().enumerate() {
        let report = run_experiment(&c5_config(opts, delta))?;
        art.extend(report_bytes(&report)?);
        for (j, (label, bound)) in [("GDA", std::f64::consts::E), ("Reg-EG", 4.0), ("PPM", 9.0)].into_iter().enumerate() {
            let algo = report.algorithm(label);
            let worst = algo.map_or(f64::NAN, |a| a.pairs.iter().map(|p| p.final_deviation_sq).fold(f64::NEG_INFINITY, f64::max));
            let id = format!("5{}", (b'a' + (3 * i + j) as u8) as char);
            rows.push(CheckRow::new(&id, format!("{label} max deviation / delta^2 at delta = {delta}"), worst / (delta * delta), at_most(bound)));
        }
        rows.push(CheckRow::new(
            &format!("5{}", (b'g' + i as u8) as char),
            format!("all subproblems certified at delta = {delta}"),
            if report.complete { 1.0 } else { 0.0 },
            range(1.0, 1.0),
        ));
    }
    rows.push(runtime_row("5i", started, 60.0));
    Ok(CriterionOutcome { rows, artifact: art })
}

fn plateau_ratio(f: impl Fn(f64) -> Result<f64>, delta: f64) -> Result<(f64, f64, f64)> {
    let a = f(delta)?;
    let b = f(2.0 * delta)?;
    Ok((a, b, b / a))
}

/// Noise floors of the linearly convergent inexact methods scale as delta^2.
pub fn criterion_6(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let started = Instant::now();
    let mut art = Artifact::default();
    let grad = |delta: f64, seed: u64| OracleSpec::new(OracleKind::InexactGrad, delta, GradMode::FixedDirection, seed);
    let delta = 0.05;

    let doc = InstanceDoc::QuadraticMin { spec: spec(seed_for(opts, 6, 0), 20, 1.0, 3.0, 0), b_scale: 1.0, radius: None };
    let Instance::Min(p) = doc.build()? else { unreachable!("quadratic instances are minimization problems") };
    let x_star = p.minimizer().expect("strongly convex quadratic").clone();
    let oseed = seed_for(opts, 6, 1);
    let agd_plateau = |d: f64| -> Result<f64> {
        let mut params = MinSolverParams::new(3000);
        params.schedule = Schedule::FinalOnly;
        let run = inexact_agd(&p, &grad(d, oseed), &[0.0; 20], None, &params)?;
        deviation_sq_flat(&run.output, x_star.as_slice())
    };

    let q = make_scsc_quadratic(&spec(seed_for(opts, 6, 2), 20, 0.5, 5.0, 0), 1.0, 10.0)?;
    let s = q.saddle().expect("scsc saddle").flatten();
    let z0 = joint_sphere(&q, 5.0, seed_for(opts, 6, 3));
    let eg_plateau = |d: f64| -> Result<f64> {
        let run = inexact_eg_scsc(&q, &grad(d, oseed), &z0, 3000, &Schedule::FinalOnly)?;
        deviation_sq_flat(&run.output, s.as_slice())
    };
    let gda_plateau = |d: f64| -> Result<f64> {
        let run = inexact_gda_scsc(&q, &grad(d, oseed), &z0, 10_000, &Schedule::FinalOnly)?;
        deviation_sq_flat(&run.output, s.as_slice())
    };

    let mut rows = Vec::new();
    for (id, name, kappa, result) in [
        ("6a", "Inexact-AGD", p.ell() / p.mu(), plateau_ratio(agd_plateau, delta)?),
        ("6b", "Inexact-EG", q.kappa(), plateau_ratio(eg_plateau, delta)?),
        ("6c", "Inexact-GDA", q.kappa(), plateau_ratio(gda_plateau, delta)?),
    ] {
        art.put(&format!("{name}_plateau_delta"), result.0);
        art.put(&format!("{name}_plateau_2delta"), result.1);
        rows.push(CheckRow::new(id, format!("{name} plateau ratio for 2 delta vs delta (kappa {kappa:.2})"), result.2, range(2.0, 8.0)));
    }
    rows.push(CheckRow::new("6d", "largest condition number", (p.ell() / p.mu()).max(q.kappa()), at_most(10.0)));
    rows.push(runtime_row("6e", started, 60.0));
    Ok(CriterionOutcome { rows, artifact: art.0 })
}

fn c7_config(opts: &VerifyOptions, iters: usize) -> ExperimentConfig {
    let mut params = MinimaxSolverParams::new(iters);
    params.eps = Some(0.1);
    ExperimentConfig {
        experiment_id: format!("sgda_scaling_{iters}"),
        problem: InstanceDoc::Bilinear { spec: spec(7, 20, 0.1, 1.0, 1), radius: 1.0 },
        oracle: OracleSpec::new(OracleKind::StochasticGrad, 0.1, GradMode::default(), 0),
        algorithms: vec![AlgoEntry::new("SGDA", AlgoSpec::Sgda(params))],
        protocol: Protocol::TwoRun,
        channel: Channel::StochasticGradient,
        master_seed: opts.master_seed,
        repeats: Some(50),
        init: InitSpec::Sphere { radius: 0.5 },
        schedule: Some(Schedule::FinalOnly),
    }
}

/// SGDA deviation shrinks like `1/T` at stepsize `1/(l eps T)`.
pub fn criterion_7(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let started = Instant::now();
    let short = run_experiment(&c7_config(opts, 4096))?;
    let long = run_experiment(&c7_config(opts, 16384))?;
    let mut art = report_bytes(&short)?;
    art.extend(report_bytes(&long)?);
    let ratio = final_dev(&long, "SGDA") / final_dev(&short, "SGDA");
    let rows = vec![
        CheckRow::new("7a", "mean deviation ratio, T = 16384 vs 4096, 50 seed pairs", ratio, range(0.15, 0.45)),
        runtime_row("7b", started, 120.0),
    ];
    Ok(CriterionOutcome { rows, artifact: art })
}

fn linear_gap_probe(opts: &VerifyOptions, k: u64, art: &mut Artifact) -> Result<f64> {
    let mut s = rng::stream(seed_for(opts, 8, k), 0, role::REFERENCE_POINT);
    let mut ball = || -> Result<(Domain, [f64; 2], f64)> {
        let c = [s.random_range(-1.0..1.0), s.random_range(-1.0..1.0)];
        let r = s.random_range(0.5..2.0);
        Ok((Domain::ball(c.to_vec(), r)?, c, r))
    };
    let (bx, cx, rx) = ball()?;
    let (by, cy, ry) = ball()?;
    let domain = Domain::product(vec![bx, by])?;
    let g: Vec<f64> = (0..4).map(|_| s.sample::<f64, _>(StandardNormal)).collect();
    let (sx, sy) = (0.5 * rx * s.random::<f64>(), 0.5 * ry * s.random::<f64>());
    let ux = sphere(&mut s, 2, sx);
    let uy = sphere(&mut s, 2, sy);
    let z = [cx[0] + ux[0], cx[1] + ux[1], cy[0] + uy[0], cy[1] + uy[1]];
    let closed = linear_gap(&g, &z, &domain)?;
    let base: f64 = g.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut best = f64::NEG_INFINITY;
    for _ in 0..100_000 {
        let (a, b): (f64, f64) = (s.random_range(0.0..std::f64::consts::TAU), s.random_range(0.0..std::f64::consts::TAU));
        let w = [cx[0] + rx * a.cos(), cx[1] + rx * a.sin(), cy[0] + ry * b.cos(), cy[1] + ry * b.sin()];
        let v = base - g.iter().zip(&w).map(|(p, q)| p * q).sum::<f64>();
        best = best.max(v);
    }
    art.put(&format!("closed_{k}"), closed);
    art.put(&format!("sampled_{k}"), best);
    Ok((closed - best) / closed)
}

/// GDA steps expand distances by at most `1 + a^2 l^2`; the worst excess
/// over the bound is returned.
fn expansiveness(opts: &VerifyOptions, pairs: u64, art: &mut Artifact) -> Result<f64> {
    let p = make_bilinear_game(&spec(seed_for(opts, 8, 100), 5, 0.1, 3.0, 1), 10.0)?;
    let mut s = rng::stream(seed_for(opts, 8, 101), 0, role::REFERENCE_POINT);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..pairs {
        let alpha = s.random_range(0.05..0.5);
        let mut point = || {
            let r = 8.0 * s.random::<f64>();
            let x = sphere(&mut s, 5, r);
            JointPoint { x, y: sphere(&mut s, 5, r) }
        };
        let (a, b) = (point(), point());
        let mut params = MinimaxSolverParams::new(1).with_stepsize(Stepsize::Value(alpha)).with_output(OutputMode::Last);
        params.schedule = Schedule::FinalOnly;
        let ra = gda(&p, &OracleSpec::exact(), &a, &params)?;
        let rb = gda(&p, &OracleSpec::exact(), &b, &params)?;
        let before = deviation_sq_flat(a.flatten().as_slice(), b.flatten().as_slice())?;
        let ratio = deviation_sq_flat(&ra.output, &rb.output)? / before;
        let excess = ratio - (1.0 + alpha * alpha * p.ell() * p.ell());
        if k % 100 == 0 {
            art.put(&format!("expansion_{k}"), ratio);
        }
        worst = worst.max(excess);
    }
    Ok(worst)
}

/// Linear-gap closed form against sampling, and GDA expansiveness.
pub fn criterion_8(opts: &VerifyOptions) -> Result<CriterionOutcome> {
    let started = Instant::now();
    let mut art = Artifact::default();
    let mut worst_short = f64::NEG_INFINITY;
    let mut worst_excess = f64::NEG_INFINITY;
    for k in 0..20 {
        let rel = linear_gap_probe(opts, k, &mut art)?;
        worst_short = worst_short.max(rel);
        worst_excess = worst_excess.max(-rel);
    }
    let rows = vec![
        CheckRow::new("8a", "max (sampled sup - closed form) / closed form, 20 instances", worst_excess, at_most(1e-12)),
        CheckRow::new("8b", "max (closed form - sampled sup) / closed form", worst_short, at_most(0.01)),
        CheckRow::new("8c", "max GDA expansion excess over 1 + a^2 l^2, 1000 pairs", expansiveness(opts, 1000, &mut art)?, at_most(1e-9)),
        runtime_row("8d", started, 30.0),
    ];
    Ok(CriterionOutcome { rows, artifact: art.0 })
}

pub fn criterion(n: u8, opts: &VerifyOptions) -> Result<CriterionOutcome> {
    match n {
        1 => criterion_1(opts),
        2 => criterion_2(opts),
        3 => criterion_3(opts),
        4 => criterion_4(opts),
        5 => criterion_5(opts),
        6 => criterion_6(opts),
        7 => criterion_7(opts),
        8 => criterion_8(opts),
        _ => config_err(format!("no acceptance criterion {n}")),
    }
}

/// Re-runs criteria 1 to 8 and compares their data byte for byte, against
/// `first` when given and against a fresh run otherwise.
pub fn criterion_9(opts: &VerifyOptions, first: Option<&[Vec<u8>]>) -> Result<CriterionOutcome> {
    let mut rows = Vec::new();
    for n in 1..=8u8 {
        let again = criterion(n, opts)?.artifact;
        let reference = match first {
            Some(f) => f[usize::from(n) - 1].clone(),
            None => criterion(n, opts)?.artifact,
        };
        let differs = if again == reference && !again.is_empty() { 0.0 } else { 1.0 };
        rows.push(CheckRow::new(&format!("9.{n}"), format!("criterion {n} data byte-identical on re-run"), differs, at_most(0.0)));
    }
    Ok(CriterionOutcome { rows, artifact: Vec::new() })
}

pub fn acceptance(opts: &VerifyOptions) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    for n in 1..=8 {
        let outcome = criterion(n, opts)?;
        rows.extend(outcome.rows);
        artifacts.push(outcome.artifact);
    }
    rows.extend(criterion_9(opts, Some(&artifacts))?.rows);
    Ok(rows)
}

fn rate_game(opts: &VerifyOptions) -> Result<(MinimaxProblem, JointPoint)> {
    let p = make_bilinear_game(&spec(seed_for(opts, 10, 0), 10, 1.0, 2.0, 0), 10.0)?;
    let z0 = joint_sphere(&p, 5.0, seed_for(opts, 10, 1));
    Ok((p, z0))
}

/// Fast module-level property checks.
pub fn invariants(opts: &VerifyOptions) -> Result<Vec<CheckRow>> {
    let exact = OracleSpec::exact();
    let mut rows = Vec::new();

    let (p, z0) = rate_game(opts)?;
    let eg_gap = |t: usize| -> Result<f64> {
        let mut params = MinimaxSolverParams::new(t).with_stepsize(Stepsize::Value(opts.eg_stepsize_scale / p.ell()));
        params.schedule = Schedule::FinalOnly;
        Ok(gap_of(&p, &eg(&p, &exact, &z0, &params)?.output))
    };
    for (i, t) in [256, 512, 1024].into_iter().enumerate() {
        rows.push(CheckRow::new(&format!("i1{}", (b'a' + i as u8) as char), format!("EG gap(2T)/gap(T), T = {t}"), eg_gap(2 * t)? / eg_gap(t)?, range(0.35, 0.65)));
    }
    let gda_gap = |t: usize| -> Result<f64> {
        let mut params = MinimaxSolverParams::new(t).with_stepsize(Stepsize::Policy(StepPolicy::InvSqrtT));
        params.schedule = Schedule::FinalOnly;
        Ok(gap_of(&p, &gda(&p, &exact, &z0, &params)?.output))
    };
    let series = [256, 512, 1024, 2048, 4096].map(|t| gda_gap(t).map(|g| (t as f64, g))).into_iter().collect::<Result<Vec<_>>>()?;
    rows.push(CheckRow::new("i2", "GDA averaged-gap slope over T = 2^8..2^12", rate_slope(&series, None).unwrap_or(f64::NAN), range(-0.75, -0.3)));

    let mut scratch = Artifact::default();
    rows.push(CheckRow::new("i3", "GDA expansion excess over 1 + a^2 l^2, 1000 pairs", expansiveness(opts, 1000, &mut scratch)?, at_most(1e-9)));

    // Certificates reported by the regularized framework match a recomputation.
    let g = make_bilinear_game(&spec(seed_for(opts, 10, 2), 6, 0.2, 2.0, 1), 3.0)?;
    let w0 = joint_sphere(&g, 2.0, seed_for(opts, 10, 3));
    let flat0 = w0.flatten().as_slice().to_vec();
    let mut reg = RegMinimaxParams::new(0.3, 1e-6, MinimaxBase::Eg);
    reg.stop = StopRule::Certificate;
    let run = reg_minimax(&g, &exact, &w0, &reg)?;
    let anchored = Anchored::new(Simulated::new(&g, &exact)?, 0.3, &flat0);
    let recomputed = oracle_certificate(&anchored, &run.output)?;
    rows.push(CheckRow::new("i4", "|reported - recomputed| certificate", (run.certificate.unwrap_or(f64::NAN) - recomputed).abs(), at_most(1e-10)));

    // Paired proximal point rounds move apart by at most 2 sqrt(2 eps_hat alpha).
    let alpha = 1.0 / g.ell();
    let eps_hat = 1e-6;
    let mut ppm = PpmParams::new(alpha, eps_hat, 8, MinimaxBase::InexactEgScsc);
    ppm.inner_stop = InnerStop::Certificate;
    ppm.schedule = Schedule::Every { step: 1 };
    let a = inexact_ppm(&g, &exact, &w0, &ppm)?;
    let b = inexact_ppm(&g, &exact, &joint_sphere(&g, 2.0, seed_for(opts, 10, 4)), &ppm)?;
    let slack = 2.0 * (2.0 * eps_hat * alpha).sqrt();
    let mut worst = f64::NEG_INFINITY;
    for (wa, wb) in a.checkpoints.windows(2).zip(b.checkpoints.windows(2)) {
        let before = deviation_sq_flat(&wa[0].iterate, &wb[0].iterate)?.sqrt();
        let after = deviation_sq_flat(&wa[1].iterate, &wb[1].iterate)?.sqrt();
        worst = worst.max(after - before - slack);
    }
    rows.push(CheckRow::new("i5", "max PPM round expansion beyond 2 sqrt(2 eps_hat alpha)", worst, at_most(0.0)));

    // Deterministic oracles perturb by exactly delta.
    let pts: Vec<Vec<f64>> = (0..20).map(|k| joint_sphere(&g, 1.0, k).flatten().as_slice().to_vec()).collect();
    let audit = audit_inexactness(&OracleSpec::new(OracleKind::InexactGrad, 0.3, GradMode::PointHash, 1), &g, &pts)?;
    rows.push(CheckRow::new("i6", "|max gradient error - delta|, point-hash oracle", (audit - 0.3).abs(), at_most(1e-12)));

    // The linear gap bounds the duality-gap contribution of a point.
    let (dx, _) = g.dims();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..50 {
        let zh = joint_sphere(&g, 2.5, seed_for(opts, 11, k)).flatten().as_slice().to_vec();
        let probe = joint_sphere(&g, 3.0, seed_for(opts, 12, k)).flatten().as_slice().to_vec();
        let op = g.operator(&JointPoint::split(&zh.clone().into(), dx)).flatten();
        let lg = linear_gap(op.as_slice(), &zh, g.joint())?;
        let value = |x: &[f64], y: &[f64]| g.value(&JointPoint::from_slices(x, y));
        let diff = value(&zh[..dx], &probe[dx..]) - value(&probe[..dx], &zh[dx..]);
        worst = worst.max(diff - lg);
    }
    rows.push(CheckRow::new("i7", "max F(x^, y) - F(x, y^) - linear gap over probes", worst, at_most(1e-10)));

    let params = MinimaxSolverParams::new(300);
    let spec_i = OracleSpec::new(OracleKind::InexactGrad, 0.1, GradMode::FixedDirection, 3);
    let same = eg(&p, &spec_i, &z0, &params)? == eg(&p, &spec_i, &z0, &params)?;
    rows.push(CheckRow::new("i8", "EG replays bit-identically (1 = yes)", if same { 1.0 } else { 0.0 }, range(1.0, 1.0)));
    Ok(rows)
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<CheckRow>> {
    match suite {
        Suite::Invariants => invariants(opts),
        Suite::Acceptance => acceptance(opts),
    }
}

/// Writes `id,description,measured,tolerance,pass` rows.
pub fn write_table<W: Write>(rows: &[CheckRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "description", "measured", "tolerance", "pass"])?;
    for r in rows {
        w.write_record([r.id.clone(), r.description.clone(), format!("{:?}", r.measured), r.tolerance.to_string(), r.pass.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
