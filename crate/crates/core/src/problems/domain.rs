use crate::error::{input_err, Error, Result};

const BOUNDARY_SLACK: f64 = 8.0 * f64::EPSILON;

/// A closed convex feasible set with an exact Euclidean projection.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Free { dim: usize },
    Ball { center: Vec<f64>, radius: f64 },
    Product(Vec<Domain>),
}

impl Domain {
    pub fn free(dim: usize) -> Self {
        Domain::Free { dim }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return input_err(format!("ball radius must be positive, got {radius}"));
        }
        if center.is_empty() {
            return input_err("ball center must have positive dimension");
        }
        Ok(Domain::Ball { center, radius })
    }

    /// Ball of the given radius centered at the origin.
    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(vec![0.0; dim], radius)
    }

    pub fn product(parts: Vec<Domain>) -> Result<Self> {
        if parts.is_empty() {
            return input_err("product domain needs at least one component");
        }
        Ok(Domain::Product(parts))
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Free { dim } => *dim,
            Domain::Ball { center, .. } => center.len(),
            Domain::Product(parts) => parts.iter().map(Domain::dim).sum(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            Domain::Free { .. } => false,
            Domain::Ball { .. } => true,
            Domain::Product(parts) => parts.iter().all(Domain::is_bounded),
        }
    }

    /// Ball radius; `None` for other domain kinds.
    pub fn radius(&self) -> Option<f64> {
        match self {
            Domain::Ball { radius, .. } => Some(*radius),
            _ => None,
        }
    }

    /// Largest distance between two feasible points.
    pub fn diameter(&self) -> Option<f64> {
        match self {
            Domain::Free { .. } => None,
            Domain::Ball { radius, .. } => Some(2.0 * radius),
            Domain::Product(parts) => parts
                .iter()
                .map(|p| p.diameter().map(|d| d * d))
                .sum::<Option<f64>>()
                .map(f64::sqrt),
        }
    }

    /// Euclidean projection of `p` onto the domain.
    pub fn project(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(p.len())?;
        let mut out = p.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    /// Projects in place. The caller guarantees `p.len() == self.dim()`.
    pub fn project_in_place(&self, p: &mut [f64]) {
        debug_assert_eq!(p.len(), self.dim());
        match self {
            Domain::Free { .. } => {}
            Domain::Ball { center, radius } => {
                let dist_sq: f64 = p.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                // Points within a few ulps of the sphere are treated as feasible, so
                // projecting an already projected point returns it bit for bit.
                if dist_sq > radius * radius * (1.0 + BOUNDARY_SLACK) {
                    let scale = radius / dist_sq.sqrt();
                    for (a, c) in p.iter_mut().zip(center) {
                        *a = c + (*a - c) * scale;
                    }
                }
            }
            Domain::Product(parts) => {
                let mut offset = 0;
                for part in parts {
                    let n = part.dim();
                    part.project_in_place(&mut p[offset..offset + n]);
                    offset += n;
                }
            }
        }
    }

    /// Membership test with absolute slack `tol` on the ball constraint.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        if p.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Free { .. } => true,
            Domain::Ball { center, radius } => {
                let dist: f64 =
                    p.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                dist <= radius + tol
            }
            Domain::Product(parts) => {
                let mut offset = 0;
                parts.iter().all(|part| {
                    let n = part.dim();
                    let ok = part.contains(&p[offset..offset + n], tol);
                    offset += n;
                    ok
                })
            }
        }
    }

    /// Support function `sup { g^T z : z in domain }`.
    pub fn support(&self, g: &[f64]) -> Result<f64> {
        self.check_dim(g.len())?;
        match self {
            Domain::Free { .. } => {
                if g.iter().all(|&v| v == 0.0) {
                    Ok(0.0)
                } else {
                    Err(Error::UnsupportedMetric(
                        "support of a nonzero linear functional over free space is unbounded".into(),
                    ))
                }
            }
            Domain::Ball { center, radius } => {
                let dot: f64 = g.iter().zip(center).map(|(a, c)| a * c).sum();
                let norm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                Ok(dot + radius * norm)
            }
            Domain::Product(parts) => {
                let mut offset = 0;
                let mut total = 0.0;
                for part in parts {
                    let n = part.dim();
                    total += part.support(&g[offset..offset + n])?;
                    offset += n;
                }
                Ok(total)
            }
        }
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return input_err(format!(
                "point dimension {n} does not match domain dimension {}",
                self.dim()
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exterior_point_scales_radially() {
        let d = Domain::centered_ball(2, 1.0).unwrap();
        let p = d.project(&[3.0, 4.0]).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn interior_point_unchanged() {
        let d = Domain::centered_ball(2, 1.0).unwrap();
        assert_eq!(d.project(&[0.1, 0.2]).unwrap(), vec![0.1, 0.2]);
    }

    #[test]
    fn product_projects_componentwise() {
        let d = Domain::product(vec![
            Domain::centered_ball(2, 2.0).unwrap(),
            Domain::centered_ball(2, 1.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(d.project(&[0.0, 5.0, 0.0, 0.0]).unwrap(), vec![0.0, 2.0, 0.0, 0.0]);
        assert_eq!(d.diameter(), Some((16.0f64 + 4.0).sqrt()));
    }

    #[test]
    fn free_is_identity_and_mismatch_errors() {
        let d = Domain::free(3);
        assert_eq!(d.project(&[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
        assert!(matches!(d.project(&[1.0]), Err(Error::Input(_))));
        assert!(Domain::ball(vec![0.0], 0.0).is_err());
    }

    #[test]
    fn support_of_ball() {
        let d = Domain::ball(vec![1.0, 0.0], 2.0).unwrap();
        assert!((d.support(&[0.0, 3.0]).unwrap() - 6.0).abs() < 1e-15);
        assert!((d.support(&[1.0, 0.0]).unwrap() - 3.0).abs() < 1e-15);
        assert!(Domain::free(1).support(&[1.0]).is_err());
    }

    fn domain_and_points() -> impl Strategy<Value = (Domain, Vec<f64>, Vec<f64>)> {
        (1usize..5, 0.1f64..5.0, -3.0f64..3.0).prop_flat_map(|(n, r, c)| {
            let dom = Domain::product(vec![
                Domain::ball(vec![c; n], r).unwrap(),
                Domain::free(1),
                Domain::centered_ball(n, r * 0.5).unwrap(),
            ])
            .unwrap();
            let dim = dom.dim();
            (
                Just(dom),
                proptest::collection::vec(-20.0f64..20.0, dim),
                proptest::collection::vec(-20.0f64..20.0, dim),
            )
        })
    }

    proptest! {
        #[test]
        fn projection_idempotent((dom, p, _q) in domain_and_points()) {
            let once = dom.project(&p).unwrap();
            let twice = dom.project(&once).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn projection_is_nearest((dom, p, q) in domain_and_points()) {
            let q = dom.project(&q).unwrap();
            let pp = dom.project(&p).unwrap();
            let dist = |a: &[f64], b: &[f64]| {
                a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
            };
            prop_assert!(dom.contains(&pp, 1e-12));
            prop_assert!(dist(&pp, &p) <= dist(&q, &p) + 1e-12);
        }
    }
}
