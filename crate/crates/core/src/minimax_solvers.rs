//! GDA, SGDA, extragradient, their strongly-monotone inexact variants, the
//! regularized framework and the inexact proximal point method for
//! convex-concave minimax problems.

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::methods::{Extragradient, ProjectedGradient};
use crate::metrics::linear_gap;
use crate::min_solvers::{check_start, check_stepsize, StopRule};
use crate::oracles::{to_operator, Anchored, FirstOrderOracle, OracleKind, OracleSpec, Simulated};
use crate::point::JointPoint;
use crate::problems::{Domain, MinimaxProblem};
use crate::run::{drive, Averager, Checkpoint, RunStatus, Schedule, SolverRun, Stopping};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepPolicy {
    /// The algorithm's own theory stepsize.
    Theory,
    /// `1/l`.
    Lipschitz,
    /// `min{1/l, (delta / (2 l^2 T))^(1/3)}`; `1/l` when `delta = 0`.
    CubeRoot,
    /// `min{1/l, (delta / (2 l^2))^(1/2)}`; `1/l` when `delta = 0`.
    SqrtDelta,
    /// `1 / (l sqrt(T))`.
    InvSqrtT,
    /// `1 / (l eps T)`.
    Sgda,
}

/// A fixed value or a policy, written in configs as a number or a name.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Stepsize {
    Value(f64),
    Policy(StepPolicy),
}

impl Default for Stepsize {
    fn default() -> Self {
        Stepsize::Policy(StepPolicy::Theory)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    Last,
    Average,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaxSolverParams {
    #[serde(default)]
    pub stepsize: Stepsize,
    pub iters: usize,
    /// Defaults to `average` for GDA, SGDA and EG.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputMode>,
    /// Target accuracy for the SGDA stepsize policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default)]
    pub schedule: Schedule,
}

impl MinimaxSolverParams {
    pub fn new(iters: usize) -> Self {
        Self { stepsize: Stepsize::default(), iters, output: None, eps: None, schedule: Schedule::default() }
    }

    pub fn with_stepsize(mut self, stepsize: Stepsize) -> Self {
        self.stepsize = stepsize;
        self
    }

    pub fn with_output(mut self, output: OutputMode) -> Self {
        self.output = Some(output);
        self
    }
}

struct StepContext {
    ell: f64,
    iters: usize,
    delta: f64,
    eps: Option<f64>,
}

fn resolve(stepsize: Stepsize, theory: StepPolicy, ctx: &StepContext) -> Result<f64> {
    let inv_l = if ctx.ell > 0.0 { 1.0 / ctx.ell } else { 1.0 };
    let value = match stepsize {
        Stepsize::Value(v) => v,
        Stepsize::Policy(p) => match if p == StepPolicy::Theory { theory } else { p } {
            StepPolicy::Theory | StepPolicy::Lipschitz => inv_l,
            StepPolicy::CubeRoot if ctx.delta == 0.0 => inv_l,
            StepPolicy::CubeRoot => inv_l.min((ctx.delta / (2.0 * ctx.ell * ctx.ell * ctx.iters.max(1) as f64)).cbrt()),
            StepPolicy::SqrtDelta if ctx.delta == 0.0 => inv_l,
            StepPolicy::SqrtDelta => inv_l.min((ctx.delta / (2.0 * ctx.ell * ctx.ell)).sqrt()),
            StepPolicy::InvSqrtT => inv_l / (ctx.iters.max(1) as f64).sqrt(),
            StepPolicy::Sgda => {
                let Some(eps) = ctx.eps.filter(|e| *e > 0.0) else {
                    return config_err("the sgda stepsize policy needs a positive eps");
                };
                inv_l / (eps * ctx.iters.max(1) as f64)
            }
        },
    };
    check_stepsize(value)
}

fn context(problem: &MinimaxProblem, oracle: &OracleSpec, params: &MinimaxSolverParams) -> StepContext {
    StepContext { ell: problem.ell(), iters: params.iters, delta: oracle.grad_delta(), eps: params.eps }
}

/// Projected simultaneous gradient descent ascent. The average runs over
/// `z_0..z_{T-1}`.
pub fn gda(problem: &MinimaxProblem, oracle: &OracleSpec, z0: &JointPoint, params: &MinimaxSolverParams) -> Result<SolverRun> {
    let alpha = resolve(params.stepsize, StepPolicy::InvSqrtT, &context(problem, oracle, params))?;
    let mut o = Simulated::new(problem, oracle)?;
    let avg = params.output.unwrap_or(OutputMode::Average) == OutputMode::Average;
    gda_with(&mut o, z0.flatten().as_slice(), alpha, avg, params.iters, &params.schedule)
}

pub fn gda_with<O: FirstOrderOracle>(oracle: &mut O, z0: &[f64], stepsize: f64, average: bool, iters: usize, schedule: &Schedule) -> Result<SolverRun> {
    check_stepsize(stepsize)?;
    check_start(oracle.domain(), z0)?;
    schedule.validate()?;
    let mut m = ProjectedGradient::new(z0, stepsize, average);
    Ok(drive("gda", &mut m, oracle, iters, schedule, None))
}

/// GDA driven by a stochastic oracle; the default stepsize is `1/(l eps T)`.
pub fn sgda(problem: &MinimaxProblem, oracle: &OracleSpec, z0: &JointPoint, params: &MinimaxSolverParams) -> Result<SolverRun> {
    if oracle.kind != OracleKind::StochasticGrad {
        return config_err("sgda needs a stochastic gradient oracle; use gda for deterministic oracles");
    }
    let alpha = resolve(params.stepsize, StepPolicy::Sgda, &context(problem, oracle, params))?;
    let mut o = Simulated::new(problem, oracle)?;
    let avg = params.output.unwrap_or(OutputMode::Average) == OutputMode::Average;
    let mut run = gda_with(&mut o, z0.flatten().as_slice(), alpha, avg, params.iters, &params.schedule)?;
    run.algo = "sgda".into();
    Ok(run)
}

/// Extragradient; the average runs over the half iterates.
pub fn eg(problem: &MinimaxProblem, oracle: &OracleSpec, z0: &JointPoint, params: &MinimaxSolverParams) -> Result<SolverRun> {
    let alpha = resolve(params.stepsize, StepPolicy::Lipschitz, &context(problem, oracle, params))?;
    let mut o = Simulated::new(problem, oracle)?;
    let avg = params.output.unwrap_or(OutputMode::Average) == OutputMode::Average;
    eg_with(&mut o, z0.flatten().as_slice(), alpha, avg, params.iters, &params.schedule)
}

pub fn eg_with<O: FirstOrderOracle>(oracle: &mut O, z0: &[f64], stepsize: f64, average: bool, iters: usize, schedule: &Schedule) -> Result<SolverRun> {
    check_stepsize(stepsize)?;
    check_start(oracle.domain(), z0)?;
    schedule.validate()?;
    let mut m = Extragradient::new(z0, stepsize, average);
    Ok(drive("eg", &mut m, oracle, iters, schedule, None))
}

fn check_modulus(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return config_err(format!("strongly monotone variants need a positive modulus, got {mu}"));
    }
    Ok(())
}

/// GDA with stepsize `mu / (4 l^2)`; the output is the last iterate.
pub fn inexact_gda_scsc(problem: &MinimaxProblem, oracle: &OracleSpec, z0: &JointPoint, iters: usize, schedule: &Schedule) -> Result<SolverRun> {
    check_modulus(problem.mu())?;
    let ell = problem.ell();
    let mut o = Simulated::new(problem, oracle)?;
    let mut run = gda_with(&mut o, z0.flatten().as_slice(), problem.mu() / (4.0 * ell * ell), false, iters, schedule)?;
    run.algo = "inexact_gda_scsc".into();
    Ok(run)
}

/// EG with stepsize `1 / (2 l)`; the output is the last iterate.
pub fn inexact_eg_scsc(problem: &MinimaxProblem, oracle: &OracleSpec, z0: &JointPoint, iters: usize, schedule: &Schedule) -> Result<SolverRun> {
    check_modulus(problem.mu())?;
    let mut o = Simulated::new(problem, oracle)?;
    let mut run = eg_with(&mut o, z0.flatten().as_slice(), 0.5 / problem.ell(), false, iters, schedule)?;
    run.algo = "inexact_eg_scsc".into();
    Ok(run)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimaxBase {
    Eg,
    InexactEgScsc,
    Gda,
    InexactGdaScsc,
}

impl MinimaxBase {
    /// Default stepsize on a subproblem with smoothness `ell` and modulus `mu`.
    fn stepsize(self, ell: f64, mu: f64) -> f64 {
        match self {
            MinimaxBase::Eg => 1.0 / ell,
            MinimaxBase::InexactEgScsc => 0.5 / ell,
            MinimaxBase::Gda => mu / (ell * ell),
            MinimaxBase::InexactGdaScsc => mu / (4.0 * ell * ell),
        }
    }

    /// Iterations per e-fold of the squared distance, from the linear rates.
    fn rate_factor(self, ell: f64, mu: f64) -> f64 {
        let kappa = ell / mu;
        match self {
            MinimaxBase::Eg | MinimaxBase::InexactEgScsc => 8.0 * kappa,
            MinimaxBase::Gda | MinimaxBase::InexactGdaScsc => 4.0 * kappa * kappa,
        }
    }

    fn run<O: FirstOrderOracle>(
        self,
        oracle: &mut O,
        z0: &[f64],
        stepsize: f64,
        iters: usize,
        schedule: &Schedule,
        stopping: Option<Stopping<'_, O>>,
    ) -> SolverRun {
        match self {
            MinimaxBase::Eg | MinimaxBase::InexactEgScsc => {
                drive("eg", &mut Extragradient::new(z0, stepsize, false), oracle, iters, schedule, stopping)
            }
            MinimaxBase::Gda | MinimaxBase::InexactGdaScsc => {
                drive("gda", &mut ProjectedGradient::new(z0, stepsize, false), oracle, iters, schedule, stopping)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegMinimaxParams {
    pub r: f64,
    pub eps_r: f64,
    pub base: MinimaxBase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_stepsize: Option<f64>,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub schedule: Schedule,
}

impl RegMinimaxParams {
    pub fn new(r: f64, eps_r: f64, base: MinimaxBase) -> Self {
        Self { r, eps_r, base, base_stepsize: None, stop: StopRule::Auto, max_iters: None, schedule: Schedule::default() }
    }
}

/// Iteration cap for a base method on an `r`-strongly monotone,
/// `(l + r)`-smooth subproblem: the rate factor times a log term in
/// `r D / delta` plus one in the accuracy target.
pub fn reg_minimax_iteration_cap(base: MinimaxBase, ell: f64, r: f64, eps_r: f64, delta: f64, diameter: f64) -> usize {
    let delta_eff = delta.max(1e-12);
    let noise_log = (r * diameter / delta_eff).max(1.0).ln().ceil();
    let accuracy_log = ((ell + r) * diameter * diameter / eps_r).max(1.0).ln().ceil();
    (base.rate_factor(ell + r, r) * (1.0 + noise_log + accuracy_log)).ceil() as usize
}

fn max_diameter(domain: &Domain) -> Option<f64> {
    match domain {
        Domain::Product(parts) => parts.iter().try_fold(0.0f64, |m, p| max_diameter(p).map(|d| m.max(d))),
        d => d.diameter(),
    }
}

/// Linear-gap certificate of the oracle's deterministic response at `z`.
pub fn oracle_certificate<O: FirstOrderOracle>(oracle: &O, z: &[f64]) -> Result<f64> {
    let mut g = vec![0.0; z.len()];
    oracle.certificate_grad(z, &mut g);
    to_operator(oracle.min_dim(), &mut g);
    linear_gap(&g, z, oracle.domain())
}

fn certificate_stopping<'a, O: FirstOrderOracle>(target: f64) -> Stopping<'a, O> {
    Stopping {
        target,
        certificate: Box::new(|z: &[f64], o: &O| oracle_certificate(o, z).unwrap_or(f64::INFINITY)),
    }
}

fn wants_certificate(stop: StopRule, domain: &Domain) -> Result<bool> {
    match stop {
        StopRule::Budget => Ok(false),
        StopRule::Auto => Ok(domain.is_bounded()),
        StopRule::Certificate if domain.is_bounded() => Ok(true),
        StopRule::Certificate => config_err("the linear-gap certificate needs bounded domains"),
    }
}

/// Solves `F_r = F + (r/2)||x - x0||^2 - (r/2)||y - y0||^2` with the base
/// method and returns its last iterate.
pub fn reg_minimax(problem: &MinimaxProblem, oracle: &OracleSpec, z0: &JointPoint, params: &RegMinimaxParams) -> Result<SolverRun> {
    let r = params.r;
    let ell = problem.ell();
    if !(r > 1e-14 * ell.max(f64::MIN_POSITIVE) && r.is_finite()) {
        return config_err(format!("regularization r = {r} is degenerate for l = {ell}"));
    }
    if !(params.eps_r > 0.0) {
        return config_err(format!("target accuracy eps_r must be positive, got {}", params.eps_r));
    }
    params.schedule.validate()?;
    let domain = problem.joint();
    let z0 = z0.flatten().as_slice().to_vec();
    check_start(domain, &z0)?;
    let certify = wants_certificate(params.stop, domain)?;
    let iters = params.max_iters.unwrap_or_else(|| {
        let diameter = max_diameter(domain).unwrap_or(1.0);
        reg_minimax_iteration_cap(params.base, ell, r, params.eps_r, oracle.grad_delta().max(oracle.init_delta()), diameter)
    });
    let alpha = check_stepsize(params.base_stepsize.unwrap_or_else(|| params.base.stepsize(ell + r, problem.mu() + r)))?;
    let mut o = Anchored::new(Simulated::new(problem, oracle)?, r, &z0);
    let stopping = certify.then(|| certificate_stopping(params.eps_r));
    let mut run = params.base.run(&mut o, &z0, alpha, iters, &params.schedule, stopping);
    run.algo = format!("reg_{}", serde_json::to_value(params.base).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default());
    Ok(run)
}

/// How the proximal point method certifies each subproblem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerStop {
    /// Certificate on bounded domains, the iteration cap otherwise.
    #[default]
    Auto,
    /// Linear-gap certificate at the inner iterate.
    Certificate,
    /// Linear-gap certificate at the one-step GDA map of the inner iterate,
    /// which then becomes the subproblem solution.
    Surrogate,
    /// Fixed inner iteration count.
    Budget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpmParams {
    pub alpha: f64,
    pub eps_hat: f64,
    pub outer_iters: usize,
    pub inner: MinimaxBase,
    #[serde(default)]
    pub inner_stop: InnerStop,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_stepsize: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_max_iters: Option<usize>,
    /// Surrogate map stepsize parameter; defaults to twice the subproblem
    /// smoothness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub schedule: Schedule,
}

impl PpmParams {
    pub fn new(alpha: f64, eps_hat: f64, outer_iters: usize, inner: MinimaxBase) -> Self {
        Self {
            alpha,
            eps_hat,
            outer_iters,
            inner,
            inner_stop: InnerStop::Auto,
            inner_stepsize: None,
            inner_max_iters: None,
            beta: None,
            schedule: Schedule::default(),
        }
    }
}

/// Inexact proximal point method: each round solves
/// `F + (1/(2a))||x - x_t||^2 - (1/(2a))||y - y_t||^2` from a warm start at
/// `z_t`; the output averages `z_1..z_T`.
pub fn inexact_ppm(problem: &MinimaxProblem, oracle: &OracleSpec, z0: &JointPoint, params: &PpmParams) -> Result<SolverRun> {
    if !(params.alpha > 0.0 && params.alpha.is_finite()) {
        return config_err(format!("proximal stepsize must be positive, got {}", params.alpha));
    }
    if !(params.eps_hat > 0.0) {
        return config_err(format!("inner accuracy must be positive, got {}", params.eps_hat));
    }
    params.schedule.validate()?;
    let domain = problem.joint();
    let z0 = z0.flatten().as_slice().to_vec();
    check_start(domain, &z0)?;
    let r = 1.0 / params.alpha;
    let ell_sub = problem.ell() + r;
    let mu_sub = problem.mu() + r;
    let (certify, surrogate) = match params.inner_stop {
        InnerStop::Surrogate => (wants_certificate(StopRule::Certificate, domain)?, true),
        InnerStop::Certificate => (wants_certificate(StopRule::Certificate, domain)?, false),
        InnerStop::Auto => (domain.is_bounded(), false),
        InnerStop::Budget => (false, false),
    };
    let beta = params.beta.unwrap_or(2.0 * ell_sub);
    if surrogate && beta < 2.0 * ell_sub {
        return config_err(format!("surrogate parameter beta = {beta} is below 2 l = {}", 2.0 * ell_sub));
    }
    let inner_iters = params.inner_max_iters.unwrap_or_else(|| {
        let diameter = max_diameter(domain).unwrap_or(1.0);
        reg_minimax_iteration_cap(params.inner, problem.ell(), r, params.eps_hat, oracle.grad_delta().max(oracle.init_delta()), diameter)
    });
    let inner_alpha = check_stepsize(params.inner_stepsize.unwrap_or_else(|| params.inner.stepsize(ell_sub, mu_sub)))?;

    let mut o = Anchored::new(Simulated::new(problem, oracle)?, r, &z0);
    let points = params.schedule.points(params.outer_iters);
    let mut checkpoints = vec![Checkpoint { t: 0, output: z0.clone(), iterate: z0.clone(), oracle_calls: 0, certificate: None }];
    let mut next = 1;
    let mut avg = Averager::new(&z0);
    let mut z = z0.clone();
    let mut status = RunStatus::Completed;
    let mut certificate = None;
    let inner_schedule = Schedule::default();
    for t in 0..params.outer_iters {
        o.set_anchor(&z);
        let stopping = (certify && !surrogate).then(|| certificate_stopping(params.eps_hat));
        let inner = if surrogate {
            let stop = Stopping {
                target: params.eps_hat,
                certificate: Box::new(move |w: &[f64], o: &Anchored<Simulated<MinimaxProblem>>| {
                    let mapped = surrogate_point(o, w, beta);
                    oracle_certificate(o, &mapped).unwrap_or(f64::INFINITY)
                }),
            };
            let mut run = params.inner.run(&mut o, &z, inner_alpha, inner_iters, &inner_schedule, Some(stop));
            run.output = surrogate_point(&o, &run.output, beta);
            run
        } else {
            params.inner.run(&mut o, &z, inner_alpha, inner_iters, &inner_schedule, stopping)
        };
        if inner.status == RunStatus::BudgetExceeded {
            status = RunStatus::BudgetExceeded;
        }
        certificate = inner.certificate;
        z = inner.output;
        avg.add(&z);
        if next < points.len() && points[next] == t + 1 {
            next += 1;
            checkpoints.push(Checkpoint { t: t + 1, output: avg.mean(), iterate: z.clone(), oracle_calls: o.calls(), certificate });
        }
    }
    let last = checkpoints.last().expect("t = 0 is always recorded");
    Ok(SolverRun {
        algo: "inexact_ppm".into(),
        min_dim: problem.dims().0,
        output: last.output.clone(),
        last_iterate: last.iterate.clone(),
        iterations: params.outer_iters,
        oracle_calls: o.calls(),
        checkpoints,
        certificate,
        status,
    })
}

/// `project(z - G(z)/beta)` with the oracle's deterministic response.
pub fn surrogate_point<O: FirstOrderOracle>(oracle: &O, z: &[f64], beta: f64) -> Vec<f64> {
    let mut g = vec![0.0; z.len()];
    oracle.certificate_grad(z, &mut g);
    to_operator(oracle.min_dim(), &mut g);
    let mut out: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a - b / beta).collect();
    oracle.domain().project_in_place(&mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateMap {
    pub point: JointPoint,
    /// `2 sqrt(2) beta D`, multiplying `||z_hat - z*||` in the gap bound.
    pub lead_coefficient: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_to_saddle: Option<f64>,
    /// Full bound on the linear gap at the mapped point, when the saddle and
    /// a positive modulus are known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<f64>,
}

/// One projected GDA step of length `1/beta` from `z_hat`, with the
/// ingredients of the resulting linear-gap bound.
pub fn surrogate_map(problem: &MinimaxProblem, oracle: &OracleSpec, z_hat: &JointPoint, beta: f64) -> Result<SurrogateMap> {
    if !(beta >= 2.0 * problem.ell()) {
        return config_err(format!("beta = {beta} must be at least 2 l = {}", 2.0 * problem.ell()));
    }
    let z = z_hat.flatten();
    problem.joint().check_dim(z.len())?;
    let o = Simulated::new(problem, oracle)?;
    let mapped = surrogate_point(&o, z.as_slice(), beta);
    let diameter = max_diameter(problem.joint()).unwrap_or(f64::INFINITY);
    let distance_to_saddle = problem.saddle().map(|s| (s.flatten() - &z).norm());
    let delta = oracle.grad_delta();
    let gap_bound = distance_to_saddle.filter(|_| problem.mu() > 0.0 && diameter.is_finite()).map(|dist| {
        let s2 = std::f64::consts::SQRT_2;
        2.0 * s2 * beta * diameter * dist + s2 * delta * diameter * ((2.0 + s2) * (beta / problem.mu()).sqrt() + 3.0)
    });
    Ok(SurrogateMap {
        point: JointPoint::split(&mapped.into(), problem.dims().0),
        lead_coefficient: 2.0 * std::f64::consts::SQRT_2 * beta * diameter,
        distance_to_saddle,
        gap_bound,
    })
}

/// Parameter presets from the convergence theory.
pub mod presets {
    /// Initialization-oracle setting for the regularized framework:
    /// `r = eps/D^2`, `eps_r = eps min{1, delta^2 / (8 D^2)}`.
    pub fn reg_minimax_init(eps: f64, delta: f64, diameter: f64) -> (f64, f64) {
        let d2 = diameter * diameter;
        (eps / d2, eps * (delta * delta / (8.0 * d2)).min(1.0))
    }

    /// Initialization-oracle setting for the proximal point method:
    /// `alpha = 1/l`, `eps_hat = delta^2 / (2 alpha T^2)`.
    pub fn ppm_init(ell: f64, delta: f64, outer_iters: usize) -> (f64, f64) {
        let alpha = 1.0 / ell;
        let t = outer_iters.max(1) as f64;
        (alpha, delta * delta / (2.0 * alpha * t * t))
    }

    /// `1 / (l eps T)`.
    pub fn sgda_stepsize(ell: f64, eps: f64, iters: usize) -> f64 {
        1.0 / (ell * eps * iters.max(1) as f64)
    }
}

#[cfg(test)]
mod tests;
