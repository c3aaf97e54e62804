use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

pub type Vector = DVector<f64>;

/// A point `z = (x, y)` of a minimax problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl JointPoint {
    pub fn new(x: Vector, y: Vector) -> Self {
        Self { x: x.as_slice().to_vec(), y: y.as_slice().to_vec() }
    }

    pub fn zeros(dx: usize, dy: usize) -> Self {
        Self { x: vec![0.0; dx], y: vec![0.0; dy] }
    }

    pub fn from_slices(x: &[f64], y: &[f64]) -> Self {
        Self { x: x.to_vec(), y: y.to_vec() }
    }

    pub fn x_vec(&self) -> Vector {
        Vector::from_column_slice(&self.x)
    }

    pub fn y_vec(&self) -> Vector {
        Vector::from_column_slice(&self.y)
    }

    /// Concatenation `[x; y]`.
    pub fn flatten(&self) -> Vector {
        let mut v = Vector::zeros(self.x.len() + self.y.len());
        v.as_mut_slice()[..self.x.len()].copy_from_slice(&self.x);
        v.as_mut_slice()[self.x.len()..].copy_from_slice(&self.y);
        v
    }

    pub fn split(v: &Vector, dx: usize) -> Self {
        let s = v.as_slice();
        Self { x: s[..dx].to_vec(), y: s[dx..].to_vec() }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x.len(), self.y.len())
    }

    pub fn norm_sq(&self) -> f64 {
        self.x.iter().chain(&self.y).map(|v| v * v).sum()
    }
}

/// Outputs a solver can produce: plain vectors or joint points.
pub trait SolverPoint: Clone + std::fmt::Debug + PartialEq + Send + Sync {
    fn coords(&self) -> Vec<&[f64]>;
    fn zeros_like(&self) -> Self;
    fn from_blocks(template: &Self, flat: &[f64]) -> Self;

    fn flat_len(&self) -> usize {
        self.coords().iter().map(|c| c.len()).sum()
    }
}

impl SolverPoint for Vector {
    fn coords(&self) -> Vec<&[f64]> {
        vec![self.as_slice()]
    }
    fn zeros_like(&self) -> Self {
        Vector::zeros(self.len())
    }
    fn from_blocks(_template: &Self, flat: &[f64]) -> Self {
        Vector::from_column_slice(flat)
    }
}

impl SolverPoint for JointPoint {
    fn coords(&self) -> Vec<&[f64]> {
        vec![&self.x, &self.y]
    }
    fn zeros_like(&self) -> Self {
        JointPoint::zeros(self.x.len(), self.y.len())
    }
    fn from_blocks(template: &Self, flat: &[f64]) -> Self {
        let dx = template.x.len();
        Self { x: flat[..dx].to_vec(), y: flat[dx..].to_vec() }
    }
}

pub(crate) fn check_same_len(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return input_err(format!("{what}: dimension mismatch ({a} vs {b})"));
    }
    Ok(())
}

/// Running mean of a sequence of equally shaped vectors, accumulated with
/// Kahan-Babuska compensation.
#[derive(Clone, Debug)]
pub struct CompensatedMean {
    sum: Vec<f64>,
    comp: Vec<f64>,
    count: u64,
}

impl CompensatedMean {
    pub fn new(len: usize) -> Self {
        Self { sum: vec![0.0; len], comp: vec![0.0; len], count: 0 }
    }

    pub fn add(&mut self, blocks: &[&[f64]]) {
        let mut i = 0;
        for block in blocks {
            for &v in *block {
                let s = self.sum[i];
                let t = s + v;
                if s.abs() >= v.abs() {
                    self.comp[i] += (s - t) + v;
                } else {
                    self.comp[i] += (v - t) + s;
                }
                self.sum[i] = t;
                i += 1;
            }
        }
        debug_assert_eq!(i, self.sum.len());
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// The mean so far; `None` before the first sample.
    pub fn mean(&self) -> Option<Vec<f64>> {
        if self.count == 0 {
            return None;
        }
        let n = self.count as f64;
        Some(self.sum.iter().zip(&self.comp).map(|(s, c)| (s + c) / n).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_mean_of_constant_is_constant() {
        let mut m = CompensatedMean::new(2);
        for _ in 0..100_000 {
            m.add(&[&[0.1, -3.7]]);
        }
        let mean = m.mean().unwrap();
        assert_eq!(mean, vec![0.1, -3.7]);
    }

    #[test]
    fn flatten_split_roundtrip() {
        let z = JointPoint::from_slices(&[1.0, 2.0], &[3.0]);
        assert_eq!(JointPoint::split(&z.flatten(), 2), z);
    }
}
