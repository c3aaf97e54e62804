//! Iteration kernels shared by the minimization and minimax solvers. All work
//! on flattened coordinates and step along the monotone operator, which for
//! minimization is the gradient itself.

use crate::oracles::{to_operator, FirstOrderOracle};
use crate::run::{Averager, Method};

fn operator<O: FirstOrderOracle>(oracle: &mut O, z: &[f64], out: &mut [f64]) {
    oracle.grad(z, out);
    to_operator(oracle.min_dim(), out);
}

/// `z <- project(z - a g(z))`, optionally averaging `z_0..z_{T-1}`.
pub(crate) struct ProjectedGradient {
    z: Vec<f64>,
    g: Vec<f64>,
    stepsize: f64,
    avg: Option<Averager>,
}

impl ProjectedGradient {
    pub fn new(z0: &[f64], stepsize: f64, average: bool) -> Self {
        Self { z: z0.to_vec(), g: vec![0.0; z0.len()], stepsize, avg: average.then(|| Averager::new(z0)) }
    }
}

impl<O: FirstOrderOracle> Method<O> for ProjectedGradient {
    fn step(&mut self, oracle: &mut O) {
        if let Some(avg) = self.avg.as_mut() {
            avg.add(&self.z);
        }
        operator(oracle, &self.z, &mut self.g);
        for (z, g) in self.z.iter_mut().zip(&self.g) {
            *z -= self.stepsize * g;
        }
        oracle.domain().project_in_place(&mut self.z);
    }
    fn iterate(&self) -> &[f64] {
        &self.z
    }
    fn output(&self) -> Vec<f64> {
        self.avg.as_ref().map_or_else(|| self.z.clone(), Averager::mean)
    }
}

/// Extragradient; the average runs over the half iterates.
pub(crate) struct Extragradient {
    z: Vec<f64>,
    half: Vec<f64>,
    g: Vec<f64>,
    stepsize: f64,
    avg: Option<Averager>,
}

impl Extragradient {
    pub fn new(z0: &[f64], stepsize: f64, average: bool) -> Self {
        Self {
            z: z0.to_vec(),
            half: z0.to_vec(),
            g: vec![0.0; z0.len()],
            stepsize,
            avg: average.then(|| Averager::new(z0)),
        }
    }
}

impl<O: FirstOrderOracle> Method<O> for Extragradient {
    fn step(&mut self, oracle: &mut O) {
        operator(oracle, &self.z, &mut self.g);
        for ((h, z), g) in self.half.iter_mut().zip(&self.z).zip(&self.g) {
            *h = z - self.stepsize * g;
        }
        oracle.domain().project_in_place(&mut self.half);
        operator(oracle, &self.half, &mut self.g);
        for (z, g) in self.z.iter_mut().zip(&self.g) {
            *z -= self.stepsize * g;
        }
        oracle.domain().project_in_place(&mut self.z);
        if let Some(avg) = self.avg.as_mut() {
            avg.add(&self.half);
        }
    }
    fn iterate(&self) -> &[f64] {
        &self.z
    }
    fn output(&self) -> Vec<f64> {
        self.avg.as_ref().map_or_else(|| self.z.clone(), Averager::mean)
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum MomentumRule {
    Constant(f64),
    /// `t / (t + 3)`, the convex-case schedule.
    Nesterov,
}

/// `x+ = project(y - a g(y))`, `y+ = x+ + b_t (x+ - x)`; the output is `x`.
pub(crate) struct Accelerated {
    x: Vec<f64>,
    y: Vec<f64>,
    g: Vec<f64>,
    stepsize: f64,
    rule: MomentumRule,
    t: usize,
}

impl Accelerated {
    pub fn new(x0: &[f64], stepsize: f64, rule: MomentumRule) -> Self {
        Self { x: x0.to_vec(), y: x0.to_vec(), g: vec![0.0; x0.len()], stepsize, rule, t: 0 }
    }
}

impl<O: FirstOrderOracle> Method<O> for Accelerated {
    fn step(&mut self, oracle: &mut O) {
        operator(oracle, &self.y, &mut self.g);
        let beta = match self.rule {
            MomentumRule::Constant(b) => b,
            MomentumRule::Nesterov => self.t as f64 / (self.t as f64 + 3.0),
        };
        let mut next: Vec<f64> = self.y.iter().zip(&self.g).map(|(y, g)| y - self.stepsize * g).collect();
        oracle.domain().project_in_place(&mut next);
        for ((y, x), n) in self.y.iter_mut().zip(&self.x).zip(&next) {
            *y = n + beta * (n - x);
        }
        self.x = next;
        self.t += 1;
    }
    fn iterate(&self) -> &[f64] {
        &self.x
    }
    fn output(&self) -> Vec<f64> {
        self.x.clone()
    }
}
