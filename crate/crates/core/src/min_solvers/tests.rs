use super::*;
use crate::oracles::{GradMode, OracleKind};
use crate::problems::{make_quadratic_min, InstanceSeedSpec};
use crate::rng;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

fn half_square() -> MinProblem {
    // F(x) = x^2 / 2 as 1/2 ||1 x - 0||^2.
    MinProblem::new(DMatrix::identity(1, 1), DVector::zeros(1), Domain::free(1)).unwrap()
}

fn exact() -> OracleSpec {
    OracleSpec::exact()
}

#[test]
fn gd_contracts_geometrically() {
    let p = half_square();
    let one = gd(&p, &exact(), &[1.0], &MinSolverParams::new(1).with_stepsize(0.5)).unwrap();
    assert_eq!(one.output, vec![0.5]);
    let ten = gd(&p, &exact(), &[1.0], &MinSolverParams::new(10).with_stepsize(0.5)).unwrap();
    assert!((ten.output[0] - 0.5f64.powi(10)).abs() < 1e-15);
    assert_eq!(ten.oracle_calls, 10);
    assert_eq!(ten.iterations, 10);
    assert!(gd(&p, &exact(), &[1.0], &MinSolverParams::new(1).with_stepsize(0.0)).is_err());
    assert!(gd(&p, &exact(), &[1.0], &MinSolverParams::new(1).with_stepsize(-1.0)).is_err());
}

#[test]
fn minimizer_is_a_fixed_point() {
    let p = make_quadratic_min(&InstanceSeedSpec { seed: 1, d: 5, eig_lo: 0.5, eig_hi: 2.0, zeros: 0 }, 1.0).unwrap();
    let x = p.minimizer().unwrap().as_slice().to_vec();
    for run in [
        gd(&p, &exact(), &x, &MinSolverParams::new(50)).unwrap(),
        inexact_agd(&p, &exact(), &x, None, &MinSolverParams::new(50)).unwrap(),
    ] {
        for c in &run.checkpoints {
            for (a, b) in c.iterate.iter().zip(&x) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
    let q = half_square();
    let run = gd(&q, &exact(), &[0.0], &MinSolverParams::new(20)).unwrap();
    assert!(run.checkpoints.iter().all(|c| c.iterate == vec![0.0]));
}

#[test]
fn momentum_coefficient_value() {
    assert!((momentum_coefficient(1.0, 1.0) - 0.477592).abs() < 1e-6);
    for (ell, r) in [(100.0, 0.05), (1.0, 1e-6), (3.0, 2.0)] {
        let b = momentum_coefficient(ell, r);
        assert!(b > 0.0 && b < 1.0);
    }
}

#[test]
fn inexact_agd_first_step() {
    let p = half_square();
    let run = inexact_agd(&p, &exact(), &[1.0], Some(1.0), &MinSolverParams::new(1)).unwrap();
    assert_eq!(run.output, vec![0.75]);
    assert!(inexact_agd(&p, &exact(), &[1.0], Some(0.0), &MinSolverParams::new(1)).is_err());
}

#[test]
fn inexact_agd_converges_linearly() {
    let p = make_quadratic_min(&InstanceSeedSpec { seed: 2, d: 10, eig_lo: 1.0, eig_hi: 3.0, zeros: 0 }, 1.0).unwrap();
    let x0 = vec![0.0; 10];
    let run = inexact_agd(&p, &exact(), &x0, None, &MinSolverParams::new(300)).unwrap();
    let gap = crate::metrics::optimality_gap(&p, &run.output).unwrap();
    let ell = p.ell();
    let r = p.mu();
    let f0 = crate::metrics::optimality_gap(&p, &x0).unwrap();
    let d0 = p.minimizer().unwrap().norm_squared();
    let envelope = (-150.0 * (r / (2.0 * ell)).sqrt()).exp() * (f0 + 0.25 * r * d0);
    assert!(gap <= envelope + 1e-12, "{gap} vs {envelope}");
}

#[test]
fn gd_descends_monotonically() {
    for seed in 0..5 {
        let p = make_quadratic_min(&InstanceSeedSpec { seed, d: 20, eig_lo: 0.1, eig_hi: 10.0, zeros: 1 }, 10.0).unwrap();
        let run = gd(&p, &exact(), &[0.0; 20], &MinSolverParams::new(200)).unwrap();
        let f: Vec<f64> = run.checkpoints.iter().map(|c| p.value(&DVector::from_column_slice(&c.iterate))).collect();
        assert!(f.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}

#[test]
fn ball_iterates_stay_feasible() {
    let doc = crate::problems::InstanceDoc::QuadraticMin {
        spec: InstanceSeedSpec { seed: 4, d: 8, eig_lo: 0.1, eig_hi: 5.0, zeros: 1 },
        b_scale: 10.0,
        radius: Some(1.0),
    };
    let crate::problems::Instance::Min(p) = doc.build().unwrap() else { unreachable!() };
    let spec = OracleSpec::new(OracleKind::InexactGrad, 0.5, GradMode::PointHash, 3);
    let x0 = vec![0.0; 8];
    for run in [
        gd(&p, &spec, &x0, &MinSolverParams::new(300)).unwrap(),
        agd(&p, &spec, &x0, &MinSolverParams::new(300)).unwrap(),
        reg_min(&p, &spec, &x0, &RegMinParams { max_iters: Some(300), stop: StopRule::Budget, ..RegMinParams::new(0.1, 1e-6, MinBase::InexactAgd) }).unwrap(),
    ] {
        assert!(run.checkpoints.iter().all(|c| p.domain().contains(&c.iterate, 1e-12)));
    }
}

#[test]
fn reg_min_on_constant_objective_returns_anchor() {
    let p = MinProblem::new(DMatrix::zeros(3, 3), DVector::zeros(3), Domain::free(3)).unwrap();
    let x0 = [0.3, -1.0, 2.0];
    for base in [MinBase::Gd, MinBase::InexactAgd] {
        let run = reg_min(&p, &exact(), &x0, &RegMinParams::new(1.0, 1e-12, base)).unwrap();
        assert!(crate::metrics::deviation_sq_flat(&run.output, &x0).unwrap() < 1e-20);
    }
}

#[test]
fn reg_min_meets_its_certificate() {
    let p = half_square();
    let x0 = [4.0];
    let eps_r = 1e-8;
    for base in [MinBase::Gd, MinBase::InexactAgd] {
        let run = reg_min(&p, &exact(), &x0, &RegMinParams::new(1.0, eps_r, base)).unwrap();
        assert_eq!(run.status, crate::run::RunStatus::Certified);
        assert!((run.output[0] - 2.0).abs() <= (2.0 * eps_r / 1.0).sqrt());
        assert!(run.certificate.unwrap() <= eps_r);
    }
    assert!(reg_min(&p, &exact(), &x0, &RegMinParams::new(0.0, 1e-3, MinBase::Gd)).is_err());
    assert!(reg_min(&p, &exact(), &x0, &RegMinParams::new(1e-20, 1e-3, MinBase::Gd)).is_err());
    assert!(reg_min(&p, &exact(), &x0, &RegMinParams::new(1.0, 0.0, MinBase::Gd)).is_err());
}

#[test]
fn theory_presets() {
    let (r, eps_r) = presets::reg_min_init(0.1, 0.2, 2.0);
    assert!((r - 0.025).abs() < 1e-15);
    assert!((eps_r - 0.05 * 0.04 / 16.0).abs() < 1e-15);
    let (_, big) = presets::reg_min_init(0.1, 100.0, 2.0);
    assert_eq!(big, 0.05);
}

#[test]
fn regularized_map_contracts() {
    let mut s = rng::stream(77, 0, 0);
    for seed in 0..100 {
        let d = 6;
        let p = make_quadratic_min(&InstanceSeedSpec { seed, d, eig_lo: 0.0, eig_hi: 4.0, zeros: (seed % 3) as usize }, 3.0).unwrap();
        let x0: Vec<f64> = (0..d).map(|_| s.sample::<f64, _>(StandardNormal)).collect();
        let x1: Vec<f64> = x0.iter().map(|v| v + 0.1 * s.sample::<f64, _>(StandardNormal)).collect();
        let params = RegMinParams { max_iters: Some(200_000), ..RegMinParams::new(0.3, 1e-12, MinBase::InexactAgd) };
        let a = reg_min(&p, &exact(), &x0, &params).unwrap();
        let b = reg_min(&p, &exact(), &x1, &params).unwrap();
        let lhs = crate::metrics::deviation_sq_flat(&a.output, &b.output).unwrap().sqrt();
        let rhs = crate::metrics::deviation_sq_flat(&x0, &x1).unwrap().sqrt();
        assert!(lhs <= rhs + 1e-5, "seed {seed}: {lhs} > {rhs}");
    }
}

#[test]
fn inexact_agd_plateau_scales_with_delta_squared() {
    let p = make_quadratic_min(&InstanceSeedSpec { seed: 8, d: 10, eig_lo: 1.0, eig_hi: 3.0, zeros: 0 }, 1.0).unwrap();
    let (ell, r) = (p.ell(), p.mu());
    let plateau = |delta: f64| {
        let spec = OracleSpec::new(OracleKind::InexactGrad, delta, GradMode::FixedDirection, 5);
        let run = inexact_agd(&p, &spec, &[0.0; 10], None, &MinSolverParams::new(3000)).unwrap();
        crate::metrics::optimality_gap(&p, &run.output).unwrap()
    };
    let (a, b) = (plateau(0.05), plateau(0.1));
    let bound = (2.0 * ell / r).sqrt() * (1.0 / (ell + r) + 2.0 / r) * 0.05 * 0.05;
    assert!(a <= bound, "{a} > {bound}");
    assert!((2.0..=8.0).contains(&(b / a)), "ratio {}", b / a);
}

#[test]
fn runs_are_bit_identical() {
    let p = make_quadratic_min(&InstanceSeedSpec { seed: 6, d: 12, eig_lo: 0.1, eig_hi: 10.0, zeros: 1 }, 10.0).unwrap();
    let spec = OracleSpec::new(OracleKind::StochasticGrad, 0.3, GradMode::default(), 11);
    let params = MinSolverParams::new(500).with_stepsize(0.005);
    assert_eq!(gd(&p, &spec, &[0.0; 12], &params).unwrap(), gd(&p, &spec, &[0.0; 12], &params).unwrap());
    assert_eq!(agd(&p, &spec, &[0.0; 12], &params).unwrap(), agd(&p, &spec, &[0.0; 12], &params).unwrap());
}
