//! Simulated inexact oracles: perturbed initializations, deterministically
//! biased gradients and stochastic gradients around a problem's true
//! first-order information.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, input_err, Result};
use crate::point::JointPoint;
use crate::problems::{Domain, MinProblem, MinimaxProblem};
use crate::rng::{self, role, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Exact,
    InexactInit,
    InexactGrad,
    StochasticGrad,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradMode {
    /// `g + delta u` for one seeded unit vector `u`.
    #[default]
    FixedDirection,
    /// `g + delta e` with `e` all ones; the perturbation norm is `delta sqrt(dim)`.
    PaperLiteralOnes,
    /// Unit direction hashed from the query point's bits and the seed.
    PointHash,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub kind: OracleKind,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub grad_mode: GradMode,
    #[serde(default)]
    pub seed: u64,
}

impl OracleSpec {
    pub fn exact() -> Self {
        Self { kind: OracleKind::Exact, delta: 0.0, grad_mode: GradMode::default(), seed: 0 }
    }

    pub fn new(kind: OracleKind, delta: f64, grad_mode: GradMode, seed: u64) -> Self {
        Self { kind, delta, grad_mode, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return config_err(format!("oracle delta must be finite and nonnegative, got {}", self.delta));
        }
        Ok(())
    }

    /// Radius budget of the initialization oracle.
    pub fn init_delta(&self) -> f64 {
        if self.kind == OracleKind::InexactInit {
            self.delta
        } else {
            0.0
        }
    }

    /// Bound on the gradient perturbation (standard deviation for stochastic).
    pub fn grad_delta(&self) -> f64 {
        match self.kind {
            OracleKind::InexactGrad | OracleKind::StochasticGrad => self.delta,
            _ => 0.0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }
}

/// A start point drawn by the initialization oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitDraw {
    pub u0: Vec<f64>,
    pub x0: Vec<f64>,
    pub offset_norm: f64,
}

/// `x0 = project(u0 + v)` with `v` uniform in the ball of radius `delta/2`.
pub fn draw_init(spec: &OracleSpec, domain: &Domain, u0: &[f64]) -> Result<InitDraw> {
    spec.validate()?;
    domain.check_dim(u0.len())?;
    if !domain.contains(u0, 1e-9) {
        return input_err("reference point u0 lies outside the domain");
    }
    let delta = spec.init_delta();
    if delta == 0.0 {
        return Ok(InitDraw { u0: u0.to_vec(), x0: u0.to_vec(), offset_norm: 0.0 });
    }
    let mut s = rng::stream(spec.seed, 0, role::INIT_OFFSET);
    let n = u0.len();
    let dir = unit_gaussian(&mut s, n);
    let u: f64 = s.random();
    let radius = 0.5 * delta * u.powf(1.0 / n as f64);
    let mut x0: Vec<f64> = u0.iter().zip(&dir).map(|(a, d)| a + radius * d).collect();
    domain.project_in_place(&mut x0);
    let offset_norm = dist(&x0, u0);
    Ok(InitDraw { u0: u0.to_vec(), x0, offset_norm })
}

/// Joint initialization over `X x Y`; the offset is drawn in the joint space.
pub fn draw_init_joint(spec: &OracleSpec, problem: &MinimaxProblem, u0: &JointPoint) -> Result<(JointPoint, f64)> {
    let draw = draw_init(spec, problem.joint(), u0.flatten().as_slice())?;
    Ok((JointPoint::split(&draw.x0.into(), u0.x.len()), draw.offset_norm))
}

fn unit_gaussian(s: &mut Stream, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| s.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// White-box objective: the true (partial) gradient on the flattened space.
///
/// Coordinates `0..min_dim()` are minimized and the remainder maximized; the
/// gradient is `(grad_x F, grad_y F)`, not the monotone operator.
pub trait Objective: Sync {
    fn domain(&self) -> &Domain;
    fn min_dim(&self) -> usize;
    fn true_grad(&self, z: &[f64], out: &mut [f64]);
    /// Lipschitz constant of the gradient.
    fn smoothness(&self) -> f64;
    /// Strong convexity (-concavity) modulus.
    fn modulus(&self) -> f64;

    fn dim(&self) -> usize {
        self.domain().dim()
    }
}

impl Objective for MinProblem {
    fn domain(&self) -> &Domain {
        MinProblem::domain(self)
    }
    fn min_dim(&self) -> usize {
        self.dim()
    }
    fn true_grad(&self, z: &[f64], out: &mut [f64]) {
        let x = nalgebra::DVectorView::from_slice(z, z.len());
        let resid = self.a() * x - self.b();
        out.copy_from_slice(self.a().tr_mul(&resid).as_slice());
    }
    fn smoothness(&self) -> f64 {
        self.ell()
    }
    fn modulus(&self) -> f64 {
        self.mu()
    }
}

impl Objective for MinimaxProblem {
    fn domain(&self) -> &Domain {
        self.joint()
    }
    fn min_dim(&self) -> usize {
        self.dims().0
    }
    fn true_grad(&self, z: &[f64], out: &mut [f64]) {
        let dx = self.dims().0;
        let (gx, gy) = self.partial_grads(&z[..dx], &z[dx..]);
        out[..dx].copy_from_slice(&gx);
        out[dx..].copy_from_slice(&gy);
    }
    fn smoothness(&self) -> f64 {
        self.ell()
    }
    fn modulus(&self) -> f64 {
        self.mu()
    }
}

/// Gradient source seen by the solvers.
pub trait FirstOrderOracle {
    fn domain(&self) -> &Domain;
    fn min_dim(&self) -> usize;
    /// Answers one counted query at `z`.
    fn grad(&mut self, z: &[f64], out: &mut [f64]);
    /// The deterministic part of the response (no stochastic noise), used for
    /// stopping certificates; not counted as a query.
    fn certificate_grad(&self, z: &[f64], out: &mut [f64]);
    fn calls(&self) -> u64;

    fn dim(&self) -> usize {
        self.domain().dim()
    }
}

/// Flips the maximized block so that `out` holds the monotone operator
/// `(G_x, -G_y)` given the partial gradients.
pub fn to_operator(min_dim: usize, g: &mut [f64]) {
    for v in &mut g[min_dim..] {
        *v = -*v;
    }
}

/// Perturbation state of one oracle instance.
#[derive(Clone, Debug)]
pub struct Perturbation {
    spec: OracleSpec,
    direction: Option<Vec<f64>>,
    noise: Option<Stream>,
}

impl Perturbation {
    pub fn new(spec: &OracleSpec, dim: usize) -> Result<Self> {
        spec.validate()?;
        let delta = spec.grad_delta();
        let direction = (spec.kind == OracleKind::InexactGrad && spec.grad_mode == GradMode::FixedDirection)
            .then(|| unit_gaussian(&mut rng::stream(spec.seed, 0, role::DIRECTION), dim).into_iter().map(|u| delta * u).collect());
        let noise = (spec.kind == OracleKind::StochasticGrad).then(|| rng::stream(spec.seed, 0, role::NOISE));
        Ok(Self { spec: *spec, direction, noise })
    }

    pub fn spec(&self) -> &OracleSpec {
        &self.spec
    }

    /// Adds the deterministic perturbation at `z` to `g`.
    pub fn add_deterministic(&self, z: &[f64], g: &mut [f64]) {
        if self.spec.kind != OracleKind::InexactGrad || self.spec.delta == 0.0 {
            return;
        }
        let delta = self.spec.delta;
        match self.spec.grad_mode {
            GradMode::FixedDirection => {
                for (gi, ui) in g.iter_mut().zip(self.direction.as_deref().unwrap_or(&[])) {
                    *gi += ui;
                }
            }
            GradMode::PaperLiteralOnes => g.iter_mut().for_each(|gi| *gi += delta),
            GradMode::PointHash => {
                let mut h = rng::mix64(self.spec.seed ^ role::POINT_HASH);
                for v in z {
                    h = rng::mix64(h ^ v.to_bits());
                }
                let u = unit_gaussian(&mut rng::stream(h, 0, role::POINT_HASH), g.len());
                for (gi, ui) in g.iter_mut().zip(u) {
                    *gi += delta * ui;
                }
            }
        }
    }

    /// Adds the full perturbation, advancing the noise stream when stochastic.
    pub fn add(&mut self, z: &[f64], g: &mut [f64]) {
        self.add_deterministic(z, g);
        if let Some(s) = self.noise.as_mut() {
            if self.spec.delta > 0.0 {
                let scale = self.spec.delta / (g.len() as f64).sqrt();
                for gi in g.iter_mut() {
                    *gi += scale * s.sample::<f64, _>(StandardNormal);
                }
            }
        }
    }
}

/// A problem queried through a simulated oracle.
#[derive(Clone, Debug)]
pub struct Simulated<'a, P: Objective> {
    problem: &'a P,
    perturbation: Perturbation,
    calls: u64,
}

impl<'a, P: Objective> Simulated<'a, P> {
    pub fn new(problem: &'a P, spec: &OracleSpec) -> Result<Self> {
        Ok(Self { problem, perturbation: Perturbation::new(spec, problem.dim())?, calls: 0 })
    }

    pub fn problem(&self) -> &'a P {
        self.problem
    }

    pub fn spec(&self) -> &OracleSpec {
        self.perturbation.spec()
    }
}

impl<P: Objective> FirstOrderOracle for Simulated<'_, P> {
    fn domain(&self) -> &Domain {
        self.problem.domain()
    }
    fn min_dim(&self) -> usize {
        self.problem.min_dim()
    }
    fn grad(&mut self, z: &[f64], out: &mut [f64]) {
        self.calls += 1;
        self.problem.true_grad(z, out);
        self.perturbation.add(z, out);
    }
    fn certificate_grad(&self, z: &[f64], out: &mut [f64]) {
        self.problem.true_grad(z, out);
        self.perturbation.add_deterministic(z, out);
    }
    fn calls(&self) -> u64 {
        self.calls
    }
}

/// Adds `(r/2)||x - x0||^2 - (r/2)||y - y0||^2` to the wrapped oracle's
/// objective: `G_r = (G_x + r(x - x0), G_y - r(y - y0))`.
#[derive(Clone, Debug)]
pub struct Anchored<O> {
    inner: O,
    r: f64,
    anchor: Vec<f64>,
}

impl<O: FirstOrderOracle> Anchored<O> {
    pub fn new(inner: O, r: f64, anchor: &[f64]) -> Self {
        Self { inner, r, anchor: anchor.to_vec() }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn into_inner(self) -> O {
        self.inner
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn set_anchor(&mut self, anchor: &[f64]) {
        self.anchor.copy_from_slice(anchor);
    }

    fn add_regularizer(&self, z: &[f64], out: &mut [f64]) {
        let m = self.inner.min_dim();
        for (i, ((o, zi), ai)) in out.iter_mut().zip(z).zip(&self.anchor).enumerate() {
            let term = self.r * (zi - ai);
            if i < m {
                *o += term;
            } else {
                *o -= term;
            }
        }
    }
}

impl<O: FirstOrderOracle> FirstOrderOracle for Anchored<O> {
    fn domain(&self) -> &Domain {
        self.inner.domain()
    }
    fn min_dim(&self) -> usize {
        self.inner.min_dim()
    }
    fn grad(&mut self, z: &[f64], out: &mut [f64]) {
        self.inner.grad(z, out);
        self.add_regularizer(z, out);
    }
    fn certificate_grad(&self, z: &[f64], out: &mut [f64]) {
        self.inner.certificate_grad(z, out);
        self.add_regularizer(z, out);
    }
    fn calls(&self) -> u64 {
        self.inner.calls()
    }
}

impl<O: FirstOrderOracle + ?Sized> FirstOrderOracle for &mut O {
    fn domain(&self) -> &Domain {
        (**self).domain()
    }
    fn min_dim(&self) -> usize {
        (**self).min_dim()
    }
    fn grad(&mut self, z: &[f64], out: &mut [f64]) {
        (**self).grad(z, out)
    }
    fn certificate_grad(&self, z: &[f64], out: &mut [f64]) {
        (**self).certificate_grad(z, out)
    }
    fn calls(&self) -> u64 {
        (**self).calls()
    }
}

/// Largest observed `||G - grad F||` over the sample for deterministic kinds,
/// mean of `||noise||^2` for the stochastic kind.
pub fn audit_inexactness<P: Objective>(spec: &OracleSpec, problem: &P, points: &[Vec<f64>]) -> Result<f64> {
    if points.is_empty() {
        return input_err("audit needs at least one sample point");
    }
    let mut oracle = Simulated::new(problem, spec)?;
    let n = problem.dim();
    let (mut g, mut truth) = (vec![0.0; n], vec![0.0; n]);
    let mut max_err = 0.0f64;
    let mut sum_sq = 0.0;
    for p in points {
        problem.domain().check_dim(p.len())?;
        oracle.grad(p, &mut g);
        problem.true_grad(p, &mut truth);
        let err_sq: f64 = g.iter().zip(&truth).map(|(a, b)| (a - b) * (a - b)).sum();
        max_err = max_err.max(err_sq.sqrt());
        sum_sq += err_sq;
    }
    Ok(if spec.kind == OracleKind::StochasticGrad { sum_sq / points.len() as f64 } else { max_err })
}
