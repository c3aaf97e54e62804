//! Solver trajectories and the checkpoint schedule.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::oracles::FirstOrderOracle;
use crate::point::{CompensatedMean, JointPoint, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    /// Every iteration up to `dense_until`, then geometric spacing.
    Geometric {
        #[serde(default = "default_dense")]
        dense_until: usize,
        #[serde(default = "default_ratio")]
        ratio: f64,
    },
    Every { step: usize },
    FinalOnly,
}

fn default_dense() -> usize {
    100
}

fn default_ratio() -> f64 {
    1.2
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::Geometric { dense_until: default_dense(), ratio: default_ratio() }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Schedule::Geometric { ratio, .. } if !(*ratio > 1.0 && ratio.is_finite()) => {
                config_err(format!("checkpoint ratio must exceed 1, got {ratio}"))
            }
            Schedule::Every { step: 0 } => config_err("checkpoint step must be positive"),
            _ => Ok(()),
        }
    }

    /// Sorted, deduplicated iteration indices in `0..=t_max`, always including
    /// both ends.
    pub fn points(&self, t_max: usize) -> Vec<usize> {
        let mut pts = vec![0];
        match self {
            Schedule::Geometric { dense_until, ratio } => {
                pts.extend(1..=(*dense_until).min(t_max));
                let mut t = (*dense_until).max(1) as f64;
                loop {
                    t *= ratio;
                    let k = t.round() as usize;
                    if k > t_max {
                        break;
                    }
                    pts.push(k);
                }
            }
            Schedule::Every { step } => pts.extend((1..=t_max).filter(|t| t % step == 0)),
            Schedule::FinalOnly => {}
        }
        pts.push(t_max);
        pts.dedup();
        pts.sort_unstable();
        pts.dedup();
        pts
    }
}

/// The default schedule: dense to 100, then ratio 1.2.
pub fn checkpoint_schedule(t_max: usize) -> Vec<usize> {
    Schedule::default().points(t_max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: usize,
    /// The algorithm's output at `t` (running average or current iterate).
    pub output: Vec<f64>,
    pub iterate: Vec<f64>,
    pub oracle_calls: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Ran the fixed iteration budget.
    Completed,
    /// Stopped once the certificate reached its target.
    Certified,
    /// Hit the iteration cap before the certificate reached its target.
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverRun {
    pub algo: String,
    /// Leading coordinates belonging to the minimization block.
    pub min_dim: usize,
    pub output: Vec<f64>,
    pub last_iterate: Vec<f64>,
    pub iterations: usize,
    pub oracle_calls: u64,
    pub checkpoints: Vec<Checkpoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<f64>,
    pub status: RunStatus,
}

impl SolverRun {
    pub fn output_vector(&self) -> Vector {
        Vector::from_column_slice(&self.output)
    }

    pub fn output_joint(&self) -> JointPoint {
        JointPoint::from_slices(&self.output[..self.min_dim], &self.output[self.min_dim..])
    }

    pub fn checkpoint_at(&self, t: usize) -> Option<&Checkpoint> {
        self.checkpoints.binary_search_by_key(&t, |c| c.t).ok().map(|i| &self.checkpoints[i])
    }

    pub fn complete(&self) -> bool {
        self.status != RunStatus::BudgetExceeded
    }
}

/// One iteration of a first-order method on flattened coordinates.
pub(crate) trait Method<O: FirstOrderOracle> {
    fn step(&mut self, oracle: &mut O);
    fn iterate(&self) -> &[f64];
    /// Output after the steps taken so far.
    fn output(&self) -> Vec<f64>;
}

pub(crate) type CertificateFn<'a, O> = Box<dyn FnMut(&[f64], &O) -> f64 + 'a>;

/// Certificate-based stopping, checked on the current output at every
/// checkpoint and on a geometric grid of at least 64 points per doubling.
pub(crate) struct Stopping<'a, O> {
    pub target: f64,
    pub certificate: CertificateFn<'a, O>,
}

fn probes_certificate(t: usize) -> bool {
    let stride = (t.next_power_of_two() / 64).max(1);
    t.is_multiple_of(stride)
}

/// Runs `method` for up to `iters` steps, recording checkpoints and stopping
/// early when a certificate is supplied and reaches its target.
pub(crate) fn drive<O, M>(
    algo: &str,
    method: &mut M,
    oracle: &mut O,
    iters: usize,
    schedule: &Schedule,
    mut stopping: Option<Stopping<'_, O>>,
) -> SolverRun
where
    O: FirstOrderOracle,
    M: Method<O>,
{
    let points = schedule.points(iters);
    let mut checkpoints = Vec::with_capacity(points.len());
    let mut next = 0;
    let mut certificate = None;
    let mut status = if stopping.is_some() { RunStatus::BudgetExceeded } else { RunStatus::Completed };
    let start_calls = oracle.calls();
    let mut t = 0;
    loop {
        let record = next < points.len() && points[next] == t;
        if record || (stopping.is_some() && probes_certificate(t)) {
            let output = method.output();
            let cert = stopping.as_mut().map(|s| (s.certificate)(&output, oracle));
            let reached = matches!((cert, stopping.as_ref()), (Some(c), Some(s)) if c <= s.target);
            if record || reached {
                checkpoints.push(Checkpoint {
                    t,
                    output,
                    iterate: method.iterate().to_vec(),
                    oracle_calls: oracle.calls() - start_calls,
                    certificate: cert,
                });
            }
            if record {
                next += 1;
            }
            if cert.is_some() {
                certificate = cert;
            }
            if reached {
                status = RunStatus::Certified;
                break;
            }
        }
        if t == iters {
            break;
        }
        method.step(oracle);
        t += 1;
    }
    let last = checkpoints.last().expect("schedule always includes t = 0");
    SolverRun {
        algo: algo.to_string(),
        min_dim: oracle.min_dim(),
        output: last.output.clone(),
        last_iterate: last.iterate.clone(),
        iterations: t,
        oracle_calls: oracle.calls() - start_calls,
        checkpoints,
        certificate,
        status,
    }
}

/// Running mean that falls back to a start point before the first sample.
#[derive(Clone, Debug)]
pub(crate) struct Averager {
    mean: CompensatedMean,
    start: Vec<f64>,
}

impl Averager {
    pub fn new(start: &[f64]) -> Self {
        Self { mean: CompensatedMean::new(start.len()), start: start.to_vec() }
    }

    pub fn add(&mut self, v: &[f64]) {
        self.mean.add(&[v]);
    }

    pub fn mean(&self) -> Vec<f64> {
        self.mean.mean().unwrap_or_else(|| self.start.clone())
    }
}
