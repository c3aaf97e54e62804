//! Projected gradient descent, accelerated methods and the regularized
//! framework for convex minimization.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, input_err, Result};
use crate::methods::{Accelerated, MomentumRule, ProjectedGradient};
use crate::oracles::{Anchored, FirstOrderOracle, OracleSpec, Simulated};
use crate::problems::{Domain, MinProblem};
use crate::run::{drive, Schedule, SolverRun, Stopping};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MinSolverParams {
    /// Defaults to the method's theory stepsize.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stepsize: Option<f64>,
    pub iters: usize,
    #[serde(default)]
    pub schedule: Schedule,
}

impl MinSolverParams {
    pub fn new(iters: usize) -> Self {
        Self { iters, ..Self::default() }
    }

    pub fn with_stepsize(mut self, stepsize: f64) -> Self {
        self.stepsize = Some(stepsize);
        self
    }
}

pub(crate) fn check_stepsize(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return config_err(format!("stepsize must be positive and finite, got {alpha}"));
    }
    Ok(alpha)
}

pub(crate) fn check_start(domain: &Domain, z0: &[f64]) -> Result<()> {
    domain.check_dim(z0.len())?;
    if !domain.contains(z0, 1e-9) {
        return input_err("start point lies outside the domain");
    }
    Ok(())
}

fn default_step(ell: f64) -> f64 {
    if ell > 0.0 {
        1.0 / ell
    } else {
        1.0
    }
}

/// Projected gradient descent; the output is the last iterate.
pub fn gd(problem: &MinProblem, oracle: &OracleSpec, x0: &[f64], params: &MinSolverParams) -> Result<SolverRun> {
    let mut o = Simulated::new(problem, oracle)?;
    let alpha = params.stepsize.unwrap_or_else(|| default_step(problem.ell()));
    gd_with(&mut o, x0, alpha, params.iters, &params.schedule)
}

pub fn gd_with<O: FirstOrderOracle>(oracle: &mut O, x0: &[f64], stepsize: f64, iters: usize, schedule: &Schedule) -> Result<SolverRun> {
    check_stepsize(stepsize)?;
    check_start(oracle.domain(), x0)?;
    schedule.validate()?;
    let mut m = ProjectedGradient::new(x0, stepsize, false);
    Ok(drive("gd", &mut m, oracle, iters, schedule, None))
}

/// Nesterov's accelerated gradient for smooth convex problems, momentum
/// `t/(t+3)`.
pub fn agd(problem: &MinProblem, oracle: &OracleSpec, x0: &[f64], params: &MinSolverParams) -> Result<SolverRun> {
    let mut o = Simulated::new(problem, oracle)?;
    let alpha = params.stepsize.unwrap_or_else(|| default_step(problem.ell()));
    agd_with(&mut o, x0, alpha, params.iters, &params.schedule)
}

pub fn agd_with<O: FirstOrderOracle>(oracle: &mut O, x0: &[f64], stepsize: f64, iters: usize, schedule: &Schedule) -> Result<SolverRun> {
    check_stepsize(stepsize)?;
    check_start(oracle.domain(), x0)?;
    schedule.validate()?;
    let mut m = Accelerated::new(x0, stepsize, MomentumRule::Nesterov);
    Ok(drive("agd", &mut m, oracle, iters, schedule, None))
}

/// `(2 - q) / (2 + q)` with `q = sqrt(r / (l + r))`.
pub fn momentum_coefficient(ell: f64, r: f64) -> f64 {
    let q = (r / (ell + r)).sqrt();
    (2.0 - q) / (2.0 + q)
}

/// Inexact accelerated gradient for an `r`-strongly convex, `(l + r)`-smooth
/// objective. `r` defaults to the problem's own modulus.
pub fn inexact_agd(
    problem: &MinProblem,
    oracle: &OracleSpec,
    x0: &[f64],
    r: Option<f64>,
    params: &MinSolverParams,
) -> Result<SolverRun> {
    let mut o = Simulated::new(problem, oracle)?;
    let r = r.unwrap_or(problem.mu());
    inexact_agd_with(&mut o, x0, problem.ell(), r, params.stepsize, params.iters, &params.schedule)
}

pub fn inexact_agd_with<O: FirstOrderOracle>(
    oracle: &mut O,
    x0: &[f64],
    ell: f64,
    r: f64,
    stepsize: Option<f64>,
    iters: usize,
    schedule: &Schedule,
) -> Result<SolverRun> {
    inexact_agd_stopping(oracle, x0, ell, r, stepsize, iters, schedule, None)
}

#[allow(clippy::too_many_arguments)]
fn inexact_agd_stopping<O: FirstOrderOracle>(
    oracle: &mut O,
    x0: &[f64],
    ell: f64,
    r: f64,
    stepsize: Option<f64>,
    iters: usize,
    schedule: &Schedule,
    stopping: Option<Stopping<'_, O>>,
) -> Result<SolverRun> {
    if !(r > 0.0 && r.is_finite()) {
        return config_err(format!("inexact AGD needs a positive strong convexity modulus, got {r}"));
    }
    let alpha = check_stepsize(stepsize.unwrap_or(0.5 / (ell + r)))?;
    check_start(oracle.domain(), x0)?;
    schedule.validate()?;
    let mut m = Accelerated::new(x0, alpha, MomentumRule::Constant(momentum_coefficient(ell, r)));
    Ok(drive("inexact_agd", &mut m, oracle, iters, schedule, stopping))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinBase {
    Gd,
    InexactAgd,
}

/// How a regularized framework decides it has solved its subproblem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Certificate when one is computable, otherwise the iteration cap.
    #[default]
    Auto,
    /// Certificate required; a config error when it is unavailable.
    Certificate,
    /// Run exactly the iteration cap.
    Budget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegMinParams {
    pub r: f64,
    pub eps_r: f64,
    pub base: MinBase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_stepsize: Option<f64>,
    #[serde(default)]
    pub stop: StopRule,
    /// Iteration cap; derived from the base method's rate when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub schedule: Schedule,
}

impl RegMinParams {
    pub fn new(r: f64, eps_r: f64, base: MinBase) -> Self {
        Self { r, eps_r, base, base_stepsize: None, stop: StopRule::Auto, max_iters: None, schedule: Schedule::default() }
    }
}

/// Iterations the base method needs to bring the `F_r` gap from
/// `(l + r) D^2` down to `eps_r` at its linear rate.
pub fn reg_min_iteration_cap(base: MinBase, ell: f64, r: f64, eps_r: f64, diameter: f64) -> usize {
    let log = ((ell + r) * diameter * diameter / eps_r).ln().max(1.0);
    let factor = match base {
        MinBase::Gd => (ell + r) / r,
        MinBase::InexactAgd => 2.0 * (2.0 * (ell + r) / r).sqrt(),
    };
    (factor * log).ceil() as usize
}

/// Minimizes `F_r(x) = F(x) + (r/2)||x - x0||^2` with the base method and
/// returns its approximate minimizer.
pub fn reg_min(problem: &MinProblem, oracle: &OracleSpec, x0: &[f64], params: &RegMinParams) -> Result<SolverRun> {
    let ell = problem.ell();
    if !(params.r > 1e-14 * ell.max(f64::MIN_POSITIVE) && params.r.is_finite()) {
        return config_err(format!("regularization r = {} is degenerate for l = {ell}", params.r));
    }
    if !(params.eps_r > 0.0) {
        return config_err(format!("target accuracy eps_r must be positive, got {}", params.eps_r));
    }
    check_start(problem.domain(), x0)?;
    let anchor = nalgebra::DVector::from_column_slice(x0);
    let exact = problem.regularized_minimizer(params.r, &anchor);
    let f_r = |x: &[f64]| {
        let xv = nalgebra::DVector::from_column_slice(x);
        problem.value(&xv) + 0.5 * params.r * (&xv - &anchor).norm_squared()
    };
    let use_certificate = match (params.stop, &exact) {
        (StopRule::Budget, _) => false,
        (StopRule::Certificate, None) => {
            return config_err("no closed-form subproblem solution for this domain; use a budget stop");
        }
        (_, Some(_)) => true,
        (StopRule::Auto, None) => false,
    };
    let iters = match params.max_iters {
        Some(n) => n,
        None => {
            let diameter = problem.domain().diameter().unwrap_or_else(|| 1.0 + 2.0 * anchor.norm());
            reg_min_iteration_cap(params.base, ell, params.r, params.eps_r, diameter)
        }
    };

    let mut o = Anchored::new(Simulated::new(problem, oracle)?, params.r, x0);
    let stopping = if use_certificate {
        let target_value = f_r(exact.as_ref().expect("checked above").as_slice());
        Some(Stopping::<Anchored<Simulated<MinProblem>>> {
            target: params.eps_r,
            certificate: Box::new(move |x: &[f64], _: &Anchored<Simulated<MinProblem>>| f_r(x) - target_value),
        })
    } else {
        None
    };
    let mut run = match params.base {
        MinBase::Gd => {
            let alpha = check_stepsize(params.base_stepsize.unwrap_or(1.0 / (ell + params.r)))?;
            let mut m = ProjectedGradient::new(x0, alpha, false);
            drive("reg_gd", &mut m, &mut o, iters, &params.schedule, stopping)
        }
        MinBase::InexactAgd => {
            let mut run = inexact_agd_stopping(&mut o, x0, ell, params.r, params.base_stepsize, iters, &params.schedule, stopping)?;
            run.algo = "reg_agd".into();
            run
        }
    };
    run.min_dim = problem.dim();
    Ok(run)
}

/// Parameter presets from the convergence theory.
pub mod presets {
    /// Initialization-oracle setting: `r = eps/D^2`,
    /// `eps_r = (eps/2) min{1, delta^2/(4 D^2)}`.
    pub fn reg_min_init(eps: f64, delta: f64, diameter: f64) -> (f64, f64) {
        let d2 = diameter * diameter;
        (eps / d2, 0.5 * eps * (delta * delta / (4.0 * d2)).min(1.0))
    }

    /// Inexact-gradient setting: `r = eps/D^2`,
    /// `eps_r = 6 delta^2 D^3 sqrt(l / (2 eps^3))`.
    pub fn reg_min_grad(eps: f64, delta: f64, diameter: f64, ell: f64) -> (f64, f64) {
        let d2 = diameter * diameter;
        (eps / d2, 6.0 * delta * delta * diameter.powi(3) * (ell / (2.0 * eps.powi(3))).sqrt())
    }
}

#[cfg(test)]
mod tests;
