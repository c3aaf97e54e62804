//! Optimality and duality gaps, linear-gap certificates, deviation and
//! rate-exponent fitting. Everything here uses true gradients.

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::oracles::Objective;
use crate::point::{check_same_len, SolverPoint};
use crate::problems::{Domain, MinProblem, MinimaxKind, MinimaxProblem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMethod {
    ClosedForm,
    InnerSolver,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub metric: String,
    pub value: f64,
    pub method: GapMethod,
    /// Upper bound on `true - value` for inner-solver estimates, when the
    /// domain is bounded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
}

/// `F(x) - F(x*)`.
pub fn optimality_gap(problem: &MinProblem, x: &[f64]) -> Result<f64> {
    problem.domain().check_dim(x.len())?;
    let Some(f_star) = problem.min_value() else {
        return Err(Error::UnsupportedMetric("problem has no reference optimum".into()));
    };
    Ok(problem.value(&nalgebra::DVector::from_column_slice(x)) - f_star)
}

/// `D ||A^T x|| + D ||A y||` on centered balls of radius `D`.
pub fn duality_gap_bilinear(problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Result<f64> {
    if problem.kind() != MinimaxKind::Bilinear {
        return Err(Error::UnsupportedMetric("closed-form bilinear gap needs a bilinear game".into()));
    }
    duality_gap_closed_form(problem, x, y)
}

/// Exact duality gap on centered ball domains for both instance kinds.
pub fn duality_gap_closed_form(problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Result<f64> {
    let (dx, dy) = problem.dims();
    check_same_len(x.len(), dx, "duality gap x")?;
    check_same_len(y.len(), dy, "duality gap y")?;
    let Some(radius) = problem.centered_radius() else {
        return Err(Error::UnsupportedMetric(
            "closed-form duality gap needs centered balls of equal radius; use duality_gap_estimate".into(),
        ));
    };
    let xv = nalgebra::DVectorView::from_slice(x, dx);
    let yv = nalgebra::DVectorView::from_slice(y, dy);
    let a = problem.a();
    let gy = a.tr_mul(&xv).norm();
    let gx = (a * yv).norm();
    let mu = problem.mu();
    // sup over the ball of g^T v - (mu/2)||v||^2.
    let conj = |g: f64| {
        if mu == 0.0 {
            radius * g
        } else if g / mu <= radius {
            g * g / (2.0 * mu)
        } else {
            radius * g - 0.5 * mu * radius * radius
        }
    };
    Ok(0.5 * mu * (xv.norm_squared() + yv.norm_squared()) + conj(gy) + conj(gx))
}

/// Closed form when available, otherwise an inner-solver estimate.
pub fn duality_gap(problem: &MinimaxProblem, x: &[f64], y: &[f64]) -> Result<GapReport> {
    match duality_gap_closed_form(problem, x, y) {
        Ok(value) => Ok(GapReport {
            metric: "duality_gap".into(),
            value,
            method: GapMethod::ClosedForm,
            residual: None,
            t: None,
        }),
        Err(Error::UnsupportedMetric(_)) => duality_gap_estimate(problem, x, y, 10_000),
        Err(e) => Err(e),
    }
}

/// `max_y F(x, y) - min_x F(x, y_hat)` estimated by projected ascent and
/// descent from the given point, `budget` steps each.
pub fn duality_gap_estimate(problem: &MinimaxProblem, x: &[f64], y: &[f64], budget: usize) -> Result<GapReport> {
    if budget == 0 {
        return input_err("duality gap estimate needs a positive inner budget");
    }
    let (dx, dy) = problem.dims();
    check_same_len(x.len(), dx, "duality gap x")?;
    check_same_len(y.len(), dy, "duality gap y")?;
    let ell = problem.ell();
    let step = if ell > 0.0 { 1.0 / ell } else { 1.0 };
    let value = |u: &[f64], v: &[f64]| problem.value(&crate::JointPoint::from_slices(u, v));

    let mut yk = y.to_vec();
    let mut best_max = (value(x, &yk), yk.clone());
    for _ in 0..budget {
        let (_, gy) = problem.partial_grads(x, &yk);
        for (v, g) in yk.iter_mut().zip(&gy) {
            *v += step * g;
        }
        problem.dom_y().project_in_place(&mut yk);
        let f = value(x, &yk);
        if f > best_max.0 {
            best_max = (f, yk.clone());
        }
    }
    let mut xk = x.to_vec();
    let mut best_min = (value(&xk, y), xk.clone());
    for _ in 0..budget {
        let (gx, _) = problem.partial_grads(&xk, y);
        for (v, g) in xk.iter_mut().zip(&gx) {
            *v -= step * g;
        }
        problem.dom_x().project_in_place(&mut xk);
        let f = value(&xk, y);
        if f < best_min.0 {
            best_min = (f, xk.clone());
        }
    }
    // Concavity in y (convexity in x) turns the linearization gap at the best
    // points into an upper bound on the remaining error.
    let (_, gy) = problem.partial_grads(x, &best_max.1);
    let (gx, _) = problem.partial_grads(&best_min.1, y);
    let neg_gx: Vec<f64> = gx.iter().map(|v| -v).collect();
    let residual = problem
        .dom_y()
        .support(&gy)
        .and_then(|sy| Ok(sy - dot(&gy, &best_max.1) + problem.dom_x().support(&neg_gx)? + dot(&gx, &best_min.1)))
        .ok();
    Ok(GapReport {
        metric: "duality_gap".into(),
        value: best_max.0 - best_min.0,
        method: GapMethod::InnerSolver,
        residual,
        t: None,
    })
}

/// `sup_{z' in domain} g^T (z - z')` for the operator value `g` at `z`.
pub fn linear_gap(g: &[f64], z: &[f64], domain: &Domain) -> Result<f64> {
    check_same_len(g.len(), z.len(), "linear gap")?;
    domain.check_dim(z.len())?;
    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
    Ok(dot(g, z) + domain.support(&neg)?)
}

/// Squared Euclidean deviation, summed over blocks.
pub fn deviation_sq<P: SolverPoint>(a: &P, b: &P) -> Result<f64> {
    let (ca, cb) = (a.coords(), b.coords());
    check_same_len(ca.len(), cb.len(), "deviation blocks")?;
    let mut total = 0.0;
    for (u, v) in ca.iter().zip(&cb) {
        total += deviation_sq_flat(u, v)?;
    }
    Ok(total)
}

pub fn deviation_sq_flat(a: &[f64], b: &[f64]) -> Result<f64> {
    check_same_len(a.len(), b.len(), "deviation")?;
    Ok(a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum())
}

/// OLS slope of `log(value)` against `log(T)` over points with `T` in the
/// inclusive window.
pub fn rate_slope(series: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<f64> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| window.is_none_or(|(lo, hi)| *t >= lo && *t <= hi))
        .collect();
    if pts.len() < 3 {
        return input_err(format!("rate fit needs at least 3 points, got {}", pts.len()));
    }
    if let Some((t, v)) = pts.iter().find(|(t, v)| !(*t > 0.0 && *v > 0.0)) {
        return input_err(format!("rate fit needs positive values, got ({t}, {v})"));
    }
    let n = pts.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().map(|(t, v)| (t.ln(), v.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return input_err("rate fit needs at least two distinct T values");
    }
    Ok(sxy / sxx)
}

/// `||grad F(z*)|| + sqrt(2) l D`, the operator bound used in the averaged
/// EG and GDA analyses.
pub fn operator_bound(problem: &MinimaxProblem) -> Option<f64> {
    let saddle = problem.saddle()?.flatten();
    let mut g = vec![0.0; saddle.len()];
    problem.true_grad(saddle.as_slice(), &mut g);
    let diameter = [problem.dom_x(), problem.dom_y()].iter().map(|d| d.diameter()).try_fold(0.0f64, |m, d| d.map(|d| m.max(d)))?;
    Some(dot(&g, &g).sqrt() + std::f64::consts::SQRT_2 * problem.ell() * diameter)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}
