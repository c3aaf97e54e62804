//! Problem instances, feasible domains and seeded instance generation.

mod domain;

pub use domain::Domain;

use nalgebra::{DMatrix, DVector, DVectorView};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::linalg::{haar_orthogonal, sigma_max, SymEigen};
use crate::point::JointPoint;
use crate::rng::{self, role};

/// Seeded description of a structured positive semidefinite matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSeedSpec {
    pub seed: u64,
    pub d: usize,
    pub eig_lo: f64,
    pub eig_hi: f64,
    #[serde(default)]
    pub zeros: usize,
}

impl InstanceSeedSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return input_err("instance dimension must be positive");
        }
        if !(self.eig_lo >= 0.0 && self.eig_lo <= self.eig_hi && self.eig_hi.is_finite()) {
            return input_err(format!(
                "eigenvalue range must satisfy 0 <= lo <= hi, got [{}, {}]",
                self.eig_lo, self.eig_hi
            ));
        }
        if self.zeros >= self.d {
            return input_err(format!(
                "zero-eigenvalue count {} must be below the dimension {}",
                self.zeros, self.d
            ));
        }
        Ok(())
    }
}

/// `U diag(s) U^T` with `U` Haar-orthogonal, `spec.zeros` entries of `s` set to
/// zero and the rest uniform in `[eig_lo, eig_hi]`.
pub fn gen_structured_psd(spec: &InstanceSeedSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let d = spec.d;
    let u = haar_orthogonal(d, &mut rng::stream(spec.seed, 0, role::MATRIX));
    let mut spectrum = rng::stream(spec.seed, 0, role::SPECTRUM);
    let s: Vec<f64> = (0..d)
        .map(|i| {
            if i < spec.zeros {
                0.0
            } else if spec.eig_lo == spec.eig_hi {
                spec.eig_lo
            } else {
                spectrum.random_range(spec.eig_lo..=spec.eig_hi)
            }
        })
        .collect();
    let mut scaled = u.clone();
    for (j, sj) in s.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*sj);
    }
    let m = scaled * u.transpose();
    Ok((&m + m.transpose()) * 0.5)
}

/// Serializable recipe that regenerates an instance bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceDoc {
    QuadraticMin {
        #[serde(flatten)]
        spec: InstanceSeedSpec,
        b_scale: f64,
        /// Radius of a centered ball constraint; free space when absent.
        #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    Bilinear {
        #[serde(flatten)]
        spec: InstanceSeedSpec,
        #[serde(rename = "D")]
        radius: f64,
    },
    ScscQuadratic {
        #[serde(flatten)]
        spec: InstanceSeedSpec,
        mu: f64,
        #[serde(rename = "D")]
        radius: f64,
    },
}

#[derive(Clone, Debug)]
pub enum Instance {
    Min(MinProblem),
    Minimax(MinimaxProblem),
}

impl InstanceDoc {
    pub fn spec(&self) -> &InstanceSeedSpec {
        match self {
            InstanceDoc::QuadraticMin { spec, .. }
            | InstanceDoc::Bilinear { spec, .. }
            | InstanceDoc::ScscQuadratic { spec, .. } => spec,
        }
    }

    pub fn spec_mut(&mut self) -> &mut InstanceSeedSpec {
        match self {
            InstanceDoc::QuadraticMin { spec, .. }
            | InstanceDoc::Bilinear { spec, .. }
            | InstanceDoc::ScscQuadratic { spec, .. } => spec,
        }
    }

    pub fn build(&self) -> Result<Instance> {
        match self {
            InstanceDoc::QuadraticMin { spec, b_scale, radius } => {
                let mut p = make_quadratic_min(spec, *b_scale)?;
                if let Some(r) = radius {
                    p = p.with_domain(Domain::centered_ball(spec.d, *r)?)?;
                    p.doc = Some(self.clone());
                }
                Ok(Instance::Min(p))
            }
            InstanceDoc::Bilinear { spec, radius } => {
                Ok(Instance::Minimax(make_bilinear_game(spec, *radius)?))
            }
            InstanceDoc::ScscQuadratic { spec, mu, radius } => {
                Ok(Instance::Minimax(make_scsc_quadratic(spec, *mu, *radius)?))
            }
        }
    }
}

/// `min_x 1/2 ||Ax - b||^2` over a domain.
#[derive(Clone, Debug)]
pub struct MinProblem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    atb: DVector<f64>,
    gram: SymEigen,
    domain: Domain,
    ell: f64,
    mu: f64,
    minimizer: Option<DVector<f64>>,
    min_value: Option<f64>,
    doc: Option<InstanceDoc>,
}

impl MinProblem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, domain: Domain) -> Result<Self> {
        if !a.is_square() || a.nrows() != b.len() || domain.dim() != a.ncols() {
            return input_err(format!(
                "quadratic problem shapes disagree: A {}x{}, b {}, domain {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                domain.dim()
            ));
        }
        let gram = SymEigen::new(&a.tr_mul(&a));
        let ell = gram.max().max(0.0);
        let mut mu = gram.min().max(0.0);
        if mu <= 1e-12 * ell {
            mu = 0.0;
        }
        let atb = a.tr_mul(&b);
        let mut problem = Self {
            a,
            b,
            atb,
            gram,
            domain,
            ell,
            mu,
            minimizer: None,
            min_value: None,
            doc: None,
        };
        let zero = DVector::zeros(problem.dim());
        if let Some(x) = problem.regularized_minimizer(0.0, &zero) {
            problem.min_value = Some(problem.value(&x));
            problem.minimizer = Some(x);
        }
        Ok(problem)
    }

    fn with_domain(self, domain: Domain) -> Result<Self> {
        Self::new(self.a, self.b, domain)
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Largest eigenvalue of `A^T A`.
    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Smallest eigenvalue of `A^T A`; zero when `A` is singular.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn minimizer(&self) -> Option<&DVector<f64>> {
        self.minimizer.as_ref()
    }

    pub fn min_value(&self) -> Option<f64> {
        self.min_value
    }

    pub fn doc(&self) -> Option<&InstanceDoc> {
        self.doc.as_ref()
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * (&self.a * x - &self.b).norm_squared()
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a.tr_mul(&(&self.a * x - &self.b))
    }

    /// Minimizer of `F(x) + (r/2)||x - anchor||^2` over the domain, computed in
    /// the eigenbasis of `A^T A` (with a radial search for ball domains). With
    /// `r = 0` and singular `A` this is the feasible minimizer closest to the
    /// ball center, i.e. the minimum-norm solution on free space. `None` for
    /// product domains.
    pub fn regularized_minimizer(&self, r: f64, anchor: &DVector<f64>) -> Option<DVector<f64>> {
        let v = &self.gram.vectors;
        let m: Vec<f64> = self.gram.values.iter().map(|h| h.max(0.0) + r).collect();
        let m_max = m.iter().copied().fold(0.0, f64::max);
        let tol = 1e-12 * m_max.max(f64::MIN_POSITIVE);
        let q = &self.atb + anchor * r;
        let qt = v.tr_mul(&q);
        match &self.domain {
            Domain::Free { .. } => {
                let coords = DVector::from_fn(m.len(), |i, _| if m[i] > tol { qt[i] / m[i] } else { 0.0 });
                Some(v * coords)
            }
            Domain::Ball { center, radius } => {
                let c = DVector::from_column_slice(center);
                let ct = v.tr_mul(&c);
                let inside: Vec<f64> = (0..m.len())
                    .map(|i| if m[i] > tol { qt[i] / m[i] - ct[i] } else { 0.0 })
                    .collect();
                let dist_sq: f64 = inside.iter().map(|t| t * t).sum();
                let offset = if dist_sq <= radius * radius {
                    DVector::from_vec(inside)
                } else {
                    let w: Vec<f64> = (0..m.len()).map(|i| qt[i] - m[i] * ct[i]).collect();
                    let norm_at = |lambda: f64| -> f64 {
                        w.iter().zip(&m).map(|(wi, mi)| (wi / (mi + lambda)).powi(2)).sum()
                    };
                    let w_norm = w.iter().map(|t| t * t).sum::<f64>().sqrt();
                    let (mut lo, mut hi) = (0.0f64, w_norm / radius);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        if norm_at(mid) > radius * radius {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    DVector::from_fn(m.len(), |i, _| w[i] / (m[i] + hi))
                };
                let mut x = (v * offset + c).as_slice().to_vec();
                self.domain.project_in_place(&mut x);
                Some(DVector::from_vec(x))
            }
            Domain::Product(_) => None,
        }
    }
}

/// Seeded quadratic `1/2 ||Ax - b||^2` on free space with `A` from
/// [`gen_structured_psd`] and `b ~ N(0, b_scale^2 I)`.
pub fn make_quadratic_min(spec: &InstanceSeedSpec, b_scale: f64) -> Result<MinProblem> {
    if !(b_scale >= 0.0 && b_scale.is_finite()) {
        return input_err(format!("b_scale must be nonnegative, got {b_scale}"));
    }
    let a = gen_structured_psd(spec)?;
    let mut rhs = rng::stream(spec.seed, 0, role::RHS);
    let b = DVector::from_fn(spec.d, |_, _| b_scale * rhs.sample::<f64, _>(StandardNormal));
    let mut p = MinProblem::new(a, b, Domain::free(spec.d))?;
    p.doc = Some(InstanceDoc::QuadraticMin { spec: *spec, b_scale, radius: None });
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimaxKind {
    Bilinear,
    ScscQuadratic,
}

/// `F(x, y) = (mu/2)||x||^2 + x^T A y - (mu/2)||y||^2` on `X x Y`; `mu = 0` is the
/// bilinear game.
#[derive(Clone, Debug)]
pub struct MinimaxProblem {
    kind: MinimaxKind,
    a: DMatrix<f64>,
    mu: f64,
    dom_x: Domain,
    dom_y: Domain,
    joint: Domain,
    sigma_max: f64,
    saddle: Option<JointPoint>,
    doc: Option<InstanceDoc>,
}

impl MinimaxProblem {
    pub fn new(kind: MinimaxKind, a: DMatrix<f64>, mu: f64, dom_x: Domain, dom_y: Domain) -> Result<Self> {
        if dom_x.dim() != a.nrows() || dom_y.dim() != a.ncols() {
            return input_err(format!(
                "coupling matrix {}x{} does not match domains {} and {}",
                a.nrows(),
                a.ncols(),
                dom_x.dim(),
                dom_y.dim()
            ));
        }
        match kind {
            MinimaxKind::Bilinear if mu != 0.0 => {
                return input_err("bilinear games have no quadratic terms");
            }
            MinimaxKind::ScscQuadratic if !(mu > 0.0 && mu.is_finite()) => {
                return input_err(format!("strong convexity modulus must be positive, got {mu}"));
            }
            _ => {}
        }
        let centered = |d: &Domain| match d {
            Domain::Free { .. } => true,
            Domain::Ball { center, .. } => center.iter().all(|&c| c == 0.0),
            Domain::Product(_) => false,
        };
        let saddle = (centered(&dom_x) && centered(&dom_y))
            .then(|| JointPoint::zeros(dom_x.dim(), dom_y.dim()));
        let joint = Domain::Product(vec![dom_x.clone(), dom_y.clone()]);
        Ok(Self { kind, sigma_max: sigma_max(&a), a, mu, dom_x, dom_y, joint, saddle, doc: None })
    }

    /// `x^T A y` on centered balls of radius `radius`.
    pub fn bilinear(a: DMatrix<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return input_err(format!("ball radius must be positive, got {radius}"));
        }
        let (m, n) = a.shape();
        Self::new(
            MinimaxKind::Bilinear,
            a,
            0.0,
            Domain::centered_ball(m, radius)?,
            Domain::centered_ball(n, radius)?,
        )
    }

    pub fn scsc(a: DMatrix<f64>, mu: f64, radius: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return input_err(format!("strong convexity modulus must be positive, got {mu}"));
        }
        if !(radius > 0.0) {
            return input_err(format!("ball radius must be positive, got {radius}"));
        }
        let (m, n) = a.shape();
        Self::new(
            MinimaxKind::ScscQuadratic,
            a,
            mu,
            Domain::centered_ball(m, radius)?,
            Domain::centered_ball(n, radius)?,
        )
    }

    pub fn kind(&self) -> MinimaxKind {
        self.kind
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn dom_x(&self) -> &Domain {
        &self.dom_x
    }

    pub fn dom_y(&self) -> &Domain {
        &self.dom_y
    }

    /// `X x Y` as a two-block product.
    pub fn joint(&self) -> &Domain {
        &self.joint
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dom_x.dim(), self.dom_y.dim())
    }

    /// Strong convexity-concavity modulus.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Lipschitz constant of the joint gradient: `mu + sigma_max(A)`.
    pub fn ell(&self) -> f64 {
        self.mu + self.sigma_max
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    /// Condition number `ell / mu`; infinite for bilinear games.
    pub fn kappa(&self) -> f64 {
        if self.mu > 0.0 {
            self.ell() / self.mu
        } else {
            f64::INFINITY
        }
    }

    pub fn saddle(&self) -> Option<&JointPoint> {
        self.saddle.as_ref()
    }

    pub fn doc(&self) -> Option<&InstanceDoc> {
        self.doc.as_ref()
    }

    /// Common radius when both domains are balls centered at the origin.
    pub fn centered_radius(&self) -> Option<f64> {
        match (&self.dom_x, &self.dom_y) {
            (Domain::Ball { center: cx, radius: rx }, Domain::Ball { center: cy, radius: ry })
                if rx == ry && cx.iter().chain(cy).all(|&c| c == 0.0) =>
            {
                Some(*rx)
            }
            _ => None,
        }
    }

    pub fn value(&self, z: &JointPoint) -> f64 {
        let x = DVectorView::from_slice(&z.x, z.x.len());
        let y = DVectorView::from_slice(&z.y, z.y.len());
        let coupling = x.dot(&(&self.a * y));
        0.5 * self.mu * (x.norm_squared() - y.norm_squared()) + coupling
    }

    /// Partial gradients `(grad_x F, grad_y F)`.
    pub fn partial_grads(&self, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let xv = DVectorView::from_slice(x, x.len());
        let yv = DVectorView::from_slice(y, y.len());
        let mut gx = &self.a * yv;
        let mut gy = self.a.tr_mul(&xv);
        if self.mu != 0.0 {
            gx.axpy(self.mu, &xv, 1.0);
            gy.axpy(-self.mu, &yv, 1.0);
        }
        (gx.as_slice().to_vec(), gy.as_slice().to_vec())
    }

    /// Monotone operator `(grad_x F, -grad_y F)` at `z`.
    pub fn operator(&self, z: &JointPoint) -> JointPoint {
        let (gx, gy) = self.partial_grads(&z.x, &z.y);
        JointPoint { x: gx, y: gy.into_iter().map(|v| -v).collect() }
    }
}

/// Bilinear game `x^T A y` on `ball(0, D) x ball(0, D)`.
pub fn make_bilinear_game(spec: &InstanceSeedSpec, radius: f64) -> Result<MinimaxProblem> {
    if !(radius > 0.0 && radius.is_finite()) {
        return input_err(format!("ball radius D must be positive, got {radius}"));
    }
    let mut p = MinimaxProblem::bilinear(gen_structured_psd(spec)?, radius)?;
    p.doc = Some(InstanceDoc::Bilinear { spec: *spec, radius });
    Ok(p)
}

/// Strongly-convex-strongly-concave quadratic on balls of radius `D`.
pub fn make_scsc_quadratic(spec: &InstanceSeedSpec, mu: f64, radius: f64) -> Result<MinimaxProblem> {
    if !(mu > 0.0 && mu.is_finite()) {
        return input_err(format!("mu must be positive, got {mu}"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return input_err(format!("ball radius D must be positive, got {radius}"));
    }
    let mut p = MinimaxProblem::scsc(gen_structured_psd(spec)?, mu, radius)?;
    p.doc = Some(InstanceDoc::ScscQuadratic { spec: *spec, mu, radius });
    Ok(p)
}

#[cfg(test)]
mod tests;
