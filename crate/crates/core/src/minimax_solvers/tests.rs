use super::*;
use crate::metrics::{duality_gap_bilinear, linear_gap};
use crate::oracles::GradMode;
use crate::problems::{make_bilinear_game, make_scsc_quadratic, InstanceSeedSpec, MinimaxKind};
use crate::rng;
use nalgebra::DMatrix;
use rand::Rng;

fn exact() -> OracleSpec {
    OracleSpec::exact()
}

fn unit_free_game() -> MinimaxProblem {
    MinimaxProblem::new(MinimaxKind::Bilinear, DMatrix::identity(1, 1), 0.0, Domain::free(1), Domain::free(1)).unwrap()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
}

fn inexact(delta: f64, seed: u64) -> OracleSpec {
    OracleSpec::new(OracleKind::InexactGrad, delta, GradMode::FixedDirection, seed)
}

fn sphere_point(p: &MinimaxProblem, radius: f64, seed: u64) -> JointPoint {
    let (dx, dy) = p.dims();
    let mut s = rng::stream(seed, 0, 0);
    let mut block = |n: usize| {
        let v: Vec<f64> = (0..n).map(|_| s.random::<f64>() - 0.5).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.into_iter().map(|a| a * radius / norm).collect::<Vec<_>>()
    };
    let x = block(dx);
    JointPoint { x, y: block(dy) }
}

fn one_step(iters: usize, alpha: f64) -> MinimaxSolverParams {
    MinimaxSolverParams::new(iters).with_stepsize(Stepsize::Value(alpha)).with_output(OutputMode::Last)
}

#[test]
fn gda_single_step() {
    let p = unit_free_game();
    let z0 = JointPoint::from_slices(&[1.0], &[1.0]);
    let run = gda(&p, &exact(), &z0, &one_step(1, 1.0)).unwrap();
    assert_eq!(run.output, vec![0.0, 2.0]);
    assert_eq!(run.oracle_calls, 1);
}

#[test]
fn eg_single_step() {
    let p = unit_free_game();
    let z0 = JointPoint::from_slices(&[1.0], &[1.0]);
    let run = eg(&p, &exact(), &z0, &one_step(1, 1.0)).unwrap();
    assert_eq!(run.output, vec![-1.0, 1.0]);
    assert_eq!(run.oracle_calls, 2);
    let avg = eg(&p, &exact(), &z0, &one_step(1, 1.0).with_output(OutputMode::Average)).unwrap();
    assert_eq!(avg.output, vec![0.0, 2.0]);
}

#[test]
fn saddle_is_stationary() {
    let p = unit_free_game();
    let z0 = JointPoint::zeros(1, 1);
    for run in [
        gda(&p, &exact(), &z0, &MinimaxSolverParams::new(20)).unwrap(),
        eg(&p, &exact(), &z0, &MinimaxSolverParams::new(20)).unwrap(),
    ] {
        assert_eq!(run.output, vec![0.0, 0.0]);
        assert!(run.checkpoints.iter().all(|c| c.iterate == vec![0.0, 0.0]));
    }
    let q = make_scsc_quadratic(&InstanceSeedSpec { seed: 3, d: 4, eig_lo: 0.5, eig_hi: 2.0, zeros: 0 }, 1.0, 5.0).unwrap();
    let s = q.saddle().unwrap().clone();
    for run in [
        inexact_gda_scsc(&q, &exact(), &s, 50, &Schedule::default()).unwrap(),
        inexact_eg_scsc(&q, &exact(), &s, 50, &Schedule::default()).unwrap(),
    ] {
        assert!(dist(&run.output, s.flatten().as_slice()) < 1e-12);
    }
}

#[test]
fn stepsize_policies() {
    let ctx = |delta| StepContext { ell: 4.0, iters: 100, delta, eps: None };
    let cube = Stepsize::Policy(StepPolicy::CubeRoot);
    assert_eq!(resolve(cube, StepPolicy::Lipschitz, &ctx(0.0)).unwrap(), 0.25);
    let a = resolve(cube, StepPolicy::Lipschitz, &ctx(0.32)).unwrap();
    assert!((a - (0.32f64 / (2.0 * 16.0 * 100.0)).cbrt()).abs() < 1e-15);
    assert_eq!(resolve(cube, StepPolicy::Lipschitz, &ctx(1e6)).unwrap(), 0.25);
    let sqrt = resolve(Stepsize::Policy(StepPolicy::SqrtDelta), StepPolicy::Lipschitz, &ctx(0.32)).unwrap();
    assert!((sqrt - 0.1).abs() < 1e-15);
    assert_eq!(resolve(Stepsize::default(), StepPolicy::InvSqrtT, &ctx(0.0)).unwrap(), 0.025);
    assert!(resolve(Stepsize::Policy(StepPolicy::Sgda), StepPolicy::Lipschitz, &ctx(0.0)).is_err());
    assert!(resolve(Stepsize::Value(-1.0), StepPolicy::Lipschitz, &ctx(0.0)).is_err());
    let parsed: Stepsize = serde_json::from_str("\"cube_root\"").unwrap();
    assert_eq!(parsed, cube);
    let parsed: Stepsize = serde_json::from_str("0.5").unwrap();
    assert_eq!(parsed, Stepsize::Value(0.5));
}

#[test]
fn decoupled_scsc_contracts_by_three_quarters() {
    let p = MinimaxProblem::scsc(DMatrix::zeros(1, 1), 1.0, 10.0).unwrap();
    assert_eq!(p.ell(), 1.0);
    let z0 = JointPoint::from_slices(&[2.0], &[-4.0]);
    let run = inexact_gda_scsc(&p, &exact(), &z0, 3, &Schedule::Every { step: 1 }).unwrap();
    for c in &run.checkpoints {
        let f = 0.75f64.powi(c.t as i32);
        assert!((c.iterate[0] - 2.0 * f).abs() < 1e-15);
        assert!((c.iterate[1] + 4.0 * f).abs() < 1e-15);
    }
    let flat = MinimaxProblem::bilinear(DMatrix::identity(1, 1), 1.0).unwrap();
    assert!(inexact_gda_scsc(&flat, &exact(), &JointPoint::zeros(1, 1), 3, &Schedule::default()).is_err());
    assert!(inexact_eg_scsc(&flat, &exact(), &JointPoint::zeros(1, 1), 3, &Schedule::default()).is_err());
}

fn scsc_instance() -> MinimaxProblem {
    make_scsc_quadratic(&InstanceSeedSpec { seed: 7, d: 6, eig_lo: 0.5, eig_hi: 2.0, zeros: 0 }, 1.0, 10.0).unwrap()
}

#[test]
fn inexact_eg_converges_linearly() {
    let p = scsc_instance();
    let s = p.saddle().unwrap().flatten();
    let z0 = sphere_point(&p, 5.0, 1);
    let t = 16 * (8.0 * p.ell() / p.mu()).ceil() as usize;
    let run = inexact_eg_scsc(&p, &exact(), &z0, t, &Schedule::FinalOnly).unwrap();
    let init = dist(z0.flatten().as_slice(), s.as_slice()).powi(2);
    let last = dist(&run.output, s.as_slice()).powi(2);
    assert!(last <= (-16f64).exp() * init + 1e-12, "{last} vs {init}");
}

fn plateau(p: &MinimaxProblem, delta: f64, eg: bool) -> f64 {
    let s = p.saddle().unwrap().flatten();
    let z0 = JointPoint::zeros(p.dims().0, p.dims().1);
    let run = if eg {
        inexact_eg_scsc(p, &inexact(delta, 2), &z0, 4000, &Schedule::FinalOnly)
    } else {
        inexact_gda_scsc(p, &inexact(delta, 2), &z0, 20000, &Schedule::FinalOnly)
    };
    dist(&run.unwrap().output, s.as_slice()).powi(2)
}

#[test]
fn plateaus_scale_with_delta_squared() {
    let p = scsc_instance();
    let ell = p.ell();
    let mu = p.mu();
    for eg in [false, true] {
        let (a, b) = (plateau(&p, 0.05, eg), plateau(&p, 0.1, eg));
        let ratio = b / a;
        assert!((2.0..=8.0).contains(&ratio), "eg={eg}: ratio {ratio}");
        if eg {
            assert!(a <= 8.0 * 0.05f64.powi(2) / mu * (2.0 / ell + 1.0 / mu));
        } else {
            assert!(a <= (1.0 / (ell * ell) + 2.0 / (mu * mu)) * 0.05f64.powi(2));
        }
    }
}

#[test]
fn sgda_requires_stochastic_oracle() {
    let p = make_bilinear_game(&InstanceSeedSpec { seed: 1, d: 3, eig_lo: 0.5, eig_hi: 1.0, zeros: 0 }, 1.0).unwrap();
    let z0 = sphere_point(&p, 0.5, 2);
    let mut params = MinimaxSolverParams::new(200);
    params.eps = Some(0.1);
    assert!(sgda(&p, &exact(), &z0, &params).is_err());
    let quiet = OracleSpec::new(OracleKind::StochasticGrad, 0.0, GradMode::default(), 4);
    let a = sgda(&p, &quiet, &z0, &params).unwrap();
    let b = gda(&p, &exact(), &z0, &params.clone().with_stepsize(Stepsize::Policy(StepPolicy::Sgda))).unwrap();
    assert_eq!(a.output, b.output);
    assert_eq!(a.algo, "sgda");

    let noisy = OracleSpec::new(OracleKind::StochasticGrad, 0.1, GradMode::default(), 4);
    assert_eq!(sgda(&p, &noisy, &z0, &params).unwrap().output, sgda(&p, &noisy, &z0, &params).unwrap().output);
}

#[test]
fn sgda_deviation_shrinks_with_budget() {
    let p = make_bilinear_game(&InstanceSeedSpec { seed: 5, d: 3, eig_lo: 0.5, eig_hi: 1.0, zeros: 0 }, 1.0).unwrap();
    let z0 = sphere_point(&p, 0.5, 3);
    let mean_dev = |t: usize| {
        let mut params = MinimaxSolverParams::new(t);
        params.eps = Some(0.1);
        params.schedule = Schedule::FinalOnly;
        let pairs = 50;
        (0..pairs)
            .map(|k| {
                let spec = |s| OracleSpec::new(OracleKind::StochasticGrad, 0.1, GradMode::default(), s);
                let a = sgda(&p, &spec(2 * k), &z0, &params).unwrap();
                let b = sgda(&p, &spec(2 * k + 1), &z0, &params).unwrap();
                dist(&a.output, &b.output).powi(2)
            })
            .sum::<f64>()
            / pairs as f64
    };
    let ratio = mean_dev(16384) / mean_dev(4096);
    assert!((0.15..=0.45).contains(&ratio), "ratio {ratio}");
}

#[test]
fn gda_step_expansiveness() {
    let p = make_bilinear_game(&InstanceSeedSpec { seed: 2, d: 4, eig_lo: 0.1, eig_hi: 3.0, zeros: 1 }, 10.0).unwrap();
    let alpha = 0.3;
    let bound = 1.0 + alpha * alpha * p.ell() * p.ell() + 1e-9;
    for k in 0..1000 {
        let a = sphere_point(&p, 4.0, 2 * k);
        let b = sphere_point(&p, 2.0, 2 * k + 1);
        let ra = gda(&p, &exact(), &a, &one_step(1, alpha)).unwrap();
        let rb = gda(&p, &exact(), &b, &one_step(1, alpha)).unwrap();
        let before = dist(a.flatten().as_slice(), b.flatten().as_slice()).powi(2);
        assert!(dist(&ra.output, &rb.output).powi(2) <= bound * before);
    }
}

fn rate_game() -> MinimaxProblem {
    make_bilinear_game(&InstanceSeedSpec { seed: 11, d: 10, eig_lo: 1.0, eig_hi: 2.0, zeros: 0 }, 10.0).unwrap()
}

fn averaged_gap(p: &MinimaxProblem, run: &SolverRun) -> f64 {
    let dx = p.dims().0;
    duality_gap_bilinear(p, &run.output[..dx], &run.output[dx..]).unwrap()
}

#[test]
fn eg_averaged_gap_halves() {
    let p = rate_game();
    let z0 = sphere_point(&p, 5.0, 4);
    let gap = |t| averaged_gap(&p, &eg(&p, &exact(), &z0, &MinimaxSolverParams::new(t)).unwrap());
    for t in [256, 512, 1024] {
        let ratio = gap(2 * t) / gap(t);
        assert!((0.35..=0.65).contains(&ratio), "T={t}: ratio {ratio}");
    }
}

#[test]
fn gda_averaged_gap_rate() {
    let p = rate_game();
    let z0 = sphere_point(&p, 5.0, 4);
    let gap = |t| averaged_gap(&p, &gda(&p, &exact(), &z0, &MinimaxSolverParams::new(t)).unwrap());
    for t in [256, 1024] {
        let ratio = gap(4 * t) / gap(t);
        assert!((0.35..=0.7).contains(&ratio), "T={t}: ratio {ratio}");
    }
}

#[test]
fn reg_minimax_of_pure_regularizer_returns_start() {
    let p = MinimaxProblem::bilinear(DMatrix::zeros(2, 2), 5.0).unwrap();
    let z0 = JointPoint::from_slices(&[1.0, -2.0], &[0.5, 3.0]);
    for base in [MinimaxBase::Eg, MinimaxBase::InexactEgScsc, MinimaxBase::Gda] {
        let run = reg_minimax(&p, &exact(), &z0, &RegMinimaxParams::new(0.5, 1e-8, base)).unwrap();
        assert!(dist(&run.output, z0.flatten().as_slice()) < 1e-12);
        assert_eq!(run.status, RunStatus::Certified);
    }
}

#[test]
fn reg_minimax_validates() {
    let p = unit_free_game();
    let z0 = JointPoint::zeros(1, 1);
    let mut params = RegMinimaxParams::new(0.5, 1e-6, MinimaxBase::Eg);
    params.stop = StopRule::Certificate;
    assert!(matches!(reg_minimax(&p, &exact(), &z0, &params), Err(crate::Error::Config(_))));
    params.stop = StopRule::Auto;
    let run = reg_minimax(&p, &exact(), &z0, &params).unwrap();
    assert_eq!(run.status, RunStatus::Completed);
    assert!(reg_minimax(&p, &exact(), &z0, &RegMinimaxParams::new(0.0, 1e-6, MinimaxBase::Eg)).is_err());
    assert!(reg_minimax(&p, &exact(), &z0, &RegMinimaxParams::new(0.5, 0.0, MinimaxBase::Eg)).is_err());
}

#[test]
fn reg_minimax_paired_initializations() {
    let p = make_bilinear_game(&InstanceSeedSpec { seed: 4, d: 3, eig_lo: 0.5, eig_hi: 2.0, zeros: 1 }, 2.0).unwrap();
    let (r, eps_r, delta) = (0.5, 1e-11, 0.05);
    let a = sphere_point(&p, 1.0, 6);
    let mut b = a.clone();
    b.x[0] += delta;
    assert!((dist(a.flatten().as_slice(), b.flatten().as_slice()) - delta).abs() < 1e-15);
    let mut params = RegMinimaxParams::new(r, eps_r, MinimaxBase::InexactEgScsc);
    params.stop = StopRule::Certificate;
    let ra = reg_minimax(&p, &exact(), &a, &params).unwrap();
    let rb = reg_minimax(&p, &exact(), &b, &params).unwrap();
    assert_eq!(ra.status, RunStatus::Certified);
    assert_eq!(rb.status, RunStatus::Certified);
    assert!(dist(&ra.output, &rb.output) <= delta + 2.0 * (2.0 * eps_r / r).sqrt());
}

fn regularized_gap(p: &MinimaxProblem, z: &[f64], anchor: &[f64], r: f64) -> f64 {
    let dx = p.dims().0;
    let op = p.operator(&JointPoint::from_slices(&z[..dx], &z[dx..])).flatten();
    let g: Vec<f64> = op.iter().zip(z.iter().zip(anchor)).map(|(o, (a, c))| o + r * (a - c)).collect();
    linear_gap(&g, z, p.joint()).unwrap()
}

#[test]
fn certificates_are_sound() {
    let p = make_bilinear_game(&InstanceSeedSpec { seed: 8, d: 4, eig_lo: 0.2, eig_hi: 2.0, zeros: 1 }, 3.0).unwrap();
    let z0 = sphere_point(&p, 2.0, 9);
    let flat0 = z0.flatten().as_slice().to_vec();
    let run = reg_minimax(&p, &exact(), &z0, &RegMinimaxParams::new(0.3, 1e-6, MinimaxBase::Eg)).unwrap();
    assert_eq!(run.status, RunStatus::Certified);
    let c = run.certificate.unwrap();
    assert!(c <= 1e-6);
    assert!((c - regularized_gap(&p, &run.output, &flat0, 0.3)).abs() < 1e-10);

    let mut params = PpmParams::new(1.0 / p.ell(), 1e-7, 5, MinimaxBase::InexactEgScsc);
    params.schedule = Schedule::Every { step: 1 };
    let run = inexact_ppm(&p, &exact(), &z0, &params).unwrap();
    assert_eq!(run.status, RunStatus::Completed);
    let n = run.checkpoints.len();
    let (prev, last) = (&run.checkpoints[n - 2], &run.checkpoints[n - 1]);
    let c = last.certificate.unwrap();
    assert!(c <= 1e-7);
    assert!((c - regularized_gap(&p, &last.iterate, &prev.iterate, p.ell())).abs() < 1e-10);
}

#[test]
fn ppm_subproblem_by_hand() {
    let p = unit_free_game();
    let z0 = JointPoint::from_slices(&[1.0], &[1.0]);
    let run = inexact_ppm(&p, &exact(), &z0, &PpmParams::new(1.0, 1e-12, 1, MinimaxBase::Eg)).unwrap();
    assert!(dist(&run.output, &[0.0, 1.0]) < 1e-9, "{:?}", run.output);
    assert!(run.oracle_calls > 0);
}

#[test]
fn ppm_from_saddle_is_stationary() {
    let p = scsc_instance();
    let s = p.saddle().unwrap().clone();
    let run = inexact_ppm(&p, &exact(), &s, &PpmParams::new(1.0 / p.ell(), 1e-9, 4, MinimaxBase::Eg)).unwrap();
    assert!(dist(&run.output, s.flatten().as_slice()) < 1e-9);
}

#[test]
fn ppm_paired_rounds_are_nonexpansive() {
    let p = make_bilinear_game(&InstanceSeedSpec { seed: 12, d: 3, eig_lo: 0.3, eig_hi: 1.5, zeros: 1 }, 2.0).unwrap();
    let alpha = 1.0 / p.ell();
    let eps_hat = 1e-6;
    let mut params = PpmParams::new(alpha, eps_hat, 8, MinimaxBase::InexactEgScsc);
    params.inner_stop = InnerStop::Certificate;
    params.schedule = Schedule::Every { step: 1 };
    let a = inexact_ppm(&p, &exact(), &sphere_point(&p, 1.0, 1), &params).unwrap();
    let b = inexact_ppm(&p, &exact(), &sphere_point(&p, 1.0, 2), &params).unwrap();
    let slack = 2.0 * (2.0 * eps_hat * alpha).sqrt();
    for w in a.checkpoints.windows(2).zip(b.checkpoints.windows(2)) {
        let before = dist(&w.0[0].iterate, &w.1[0].iterate);
        let after = dist(&w.0[1].iterate, &w.1[1].iterate);
        assert!(after <= before + slack, "{after} > {before} + {slack}");
    }
}

#[test]
fn ppm_surrogate_stop() {
    let p = make_bilinear_game(&InstanceSeedSpec { seed: 12, d: 3, eig_lo: 0.3, eig_hi: 1.5, zeros: 1 }, 2.0).unwrap();
    let z0 = sphere_point(&p, 1.0, 1);
    let mut params = PpmParams::new(1.0 / p.ell(), 1e-6, 3, MinimaxBase::InexactEgScsc);
    params.inner_stop = InnerStop::Surrogate;
    let run = inexact_ppm(&p, &exact(), &z0, &params).unwrap();
    assert_eq!(run.status, RunStatus::Completed);
    assert!(run.certificate.unwrap() <= 1e-6);
    params.beta = Some(p.ell());
    assert!(inexact_ppm(&p, &exact(), &z0, &params).is_err());
    assert!(inexact_ppm(&unit_free_game(), &exact(), &JointPoint::zeros(1, 1), &params).is_err());
}

#[test]
fn surrogate_map_by_hand() {
    let p = unit_free_game();
    let m = surrogate_map(&p, &exact(), &JointPoint::from_slices(&[1.0], &[1.0]), 2.0).unwrap();
    assert_eq!(m.point, JointPoint::from_slices(&[0.5], &[1.5]));
    assert!(surrogate_map(&p, &exact(), &JointPoint::zeros(1, 1), 1.5).is_err());
    let still = surrogate_map(&p, &exact(), &JointPoint::zeros(1, 1), 2.0).unwrap();
    assert_eq!(still.point, JointPoint::zeros(1, 1));

    let q = scsc_instance();
    let s = q.saddle().unwrap().clone();
    let m = surrogate_map(&q, &exact(), &s, 2.0 * q.ell()).unwrap();
    assert!(dist(m.point.flatten().as_slice(), s.flatten().as_slice()) < 1e-12);
    assert!(m.distance_to_saddle.unwrap() == 0.0);
    assert!(m.gap_bound.unwrap() == 0.0);
}

#[test]
fn presets() {
    let (r, eps_r) = presets::reg_minimax_init(0.1, 0.2, 2.0);
    assert!((r - 0.025).abs() < 1e-15);
    assert!((eps_r - 0.1 * 0.04 / 32.0).abs() < 1e-18);
    assert_eq!(presets::reg_minimax_init(0.1, 100.0, 1.0).1, 0.1);
    let (alpha, eps_hat) = presets::ppm_init(4.0, 0.1, 10);
    assert_eq!(alpha, 0.25);
    assert!((eps_hat - 0.01 / (2.0 * 0.25 * 100.0)).abs() < 1e-18);
    assert_eq!(presets::sgda_stepsize(2.0, 0.1, 100), 1.0 / 20.0);
}

#[test]
fn determinism() {
    let p = rate_game();
    let z0 = sphere_point(&p, 5.0, 4);
    let spec = inexact(0.1, 3);
    let params = MinimaxSolverParams::new(300);
    assert_eq!(eg(&p, &spec, &z0, &params).unwrap(), eg(&p, &spec, &z0, &params).unwrap());
    let ppm = PpmParams::new(1.0 / p.ell(), 1e-6, 3, MinimaxBase::Eg);
    assert_eq!(inexact_ppm(&p, &spec, &z0, &ppm).unwrap(), inexact_ppm(&p, &spec, &z0, &ppm).unwrap());
}
