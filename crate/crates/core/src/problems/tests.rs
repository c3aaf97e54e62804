use super::*;
use nalgebra::{dmatrix, dvector};

fn spec(seed: u64, d: usize, lo: f64, hi: f64, zeros: usize) -> InstanceSeedSpec {
    InstanceSeedSpec { seed, d, eig_lo: lo, eig_hi: hi, zeros }
}

#[test]
fn unit_spectrum_gives_identity() {
    let a = gen_structured_psd(&spec(7, 3, 1.0, 1.0, 0)).unwrap();
    assert!((a - DMatrix::identity(3, 3)).abs().max() < 1e-10);
}

#[test]
fn rank_deficient_spectrum() {
    let a = gen_structured_psd(&spec(3, 100, 0.1, 10.0, 1)).unwrap();
    assert!((&a - a.transpose()).abs().max() <= 1e-12);
    let eig = SymEigen::new(&a);
    assert!(eig.min().abs() < 1e-10);
    assert!(eig.max() <= 10.0 + 1e-8);
}

#[test]
fn generation_is_bit_exact() {
    let s = spec(11, 20, 0.1, 10.0, 1);
    assert_eq!(gen_structured_psd(&s).unwrap(), gen_structured_psd(&s).unwrap());
    let p = make_quadratic_min(&s, 10.0).unwrap();
    let q = make_quadratic_min(&s, 10.0).unwrap();
    assert_eq!(p.b(), q.b());
    assert_ne!(gen_structured_psd(&spec(12, 20, 0.1, 10.0, 1)).unwrap(), gen_structured_psd(&s).unwrap());
}

#[test]
fn spec_validation() {
    assert!(gen_structured_psd(&spec(0, 3, 2.0, 1.0, 0)).is_err());
    assert!(gen_structured_psd(&spec(0, 3, -1.0, 1.0, 0)).is_err());
    assert!(gen_structured_psd(&spec(0, 3, 1.0, 2.0, 3)).is_err());
    assert!(make_quadratic_min(&spec(0, 3, 1.0, 2.0, 0), -1.0).is_err());
}

#[test]
fn identity_quadratic() {
    let p = make_quadratic_min(&spec(0, 2, 1.0, 1.0, 0), 0.0).unwrap();
    assert!(p.minimizer().unwrap().norm() < 1e-12);
    assert!((p.ell() - 1.0).abs() < 1e-10 && (p.mu() - 1.0).abs() < 1e-10);

    let p = MinProblem::new(DMatrix::identity(2, 2), dvector![2.0, 0.0], Domain::free(2)).unwrap();
    assert!((p.minimizer().unwrap() - dvector![2.0, 0.0]).norm() < 1e-12);
    assert!(p.min_value().unwrap().abs() < 1e-20);
}

#[test]
fn min_norm_minimizer_of_singular_problem() {
    let p = MinProblem::new(dmatrix![2.0, 0.0; 0.0, 0.0], dvector![2.0, 0.0], Domain::free(2)).unwrap();
    let x = p.minimizer().unwrap();
    assert!((x - dvector![1.0, 0.0]).norm() < 1e-12);
    assert!(p.gradient(x).norm() < 1e-12);
    assert_eq!(p.mu(), 0.0);
}

#[test]
fn seeded_rank_deficient_minimizer_is_stationary() {
    let p = make_quadratic_min(&spec(5, 50, 0.1, 10.0, 1), 10.0).unwrap();
    let x = p.minimizer().unwrap();
    assert!(p.gradient(x).norm() <= 1e-8 * p.b().norm());
}

#[test]
fn regularized_minimizer_free_and_ball() {
    let p = MinProblem::new(DMatrix::identity(2, 2), DVector::zeros(2), Domain::free(2)).unwrap();
    let x0 = dvector![2.0, -4.0];
    let x = p.regularized_minimizer(1.0, &x0).unwrap();
    assert!((x - &x0 * 0.5).norm() < 1e-12);

    // Unconstrained minimizer [3, 0] lies outside the unit ball.
    let p = MinProblem::new(DMatrix::identity(2, 2), dvector![3.0, 0.0], Domain::centered_ball(2, 1.0).unwrap())
        .unwrap();
    assert!((p.minimizer().unwrap() - dvector![1.0, 0.0]).norm() < 1e-12);
}

#[test]
fn ball_constrained_minimizer_is_optimal() {
    let s = spec(9, 10, 0.1, 10.0, 2);
    let doc = InstanceDoc::QuadraticMin { spec: s, b_scale: 10.0, radius: Some(1.0) };
    let Instance::Min(p) = doc.build().unwrap() else { panic!() };
    let x = p.minimizer().unwrap().clone();
    assert!((x.norm() - 1.0).abs() < 1e-12);
    // KKT: the negative gradient points outward along x.
    let g = p.gradient(&x);
    let lambda = -g.dot(&x);
    assert!(lambda > 0.0);
    assert!((g + &x * lambda).norm() < 1e-8 * lambda.max(1.0));
}

#[test]
fn bilinear_gradients() {
    let p = MinimaxProblem::bilinear(DMatrix::identity(2, 2), 1.0).unwrap();
    let z = JointPoint::from_slices(&[1.0, 0.0], &[0.0, 1.0]);
    assert_eq!(p.value(&z), 0.0);
    assert_eq!(p.partial_grads(&z.x, &z.y), (vec![0.0, 1.0], vec![1.0, 0.0]));
    assert_eq!(p.saddle(), Some(&JointPoint::zeros(2, 2)));
    assert_eq!(p.partial_grads(&[0.0, 0.0], &[0.0, 0.0]), (vec![0.0; 2], vec![0.0; 2]));

    let p = MinimaxProblem::bilinear(DMatrix::identity(1, 1), 1.0).unwrap();
    let z = JointPoint::from_slices(&[1.0], &[1.0]);
    assert_eq!(p.value(&z), 1.0);
    assert_eq!(p.partial_grads(&z.x, &z.y), (vec![1.0], vec![1.0]));
    assert_eq!(p.ell(), 1.0);
}

#[test]
fn scsc_constants_and_gradients() {
    let p = MinimaxProblem::scsc(DMatrix::zeros(2, 2), 1.0, 1.0).unwrap();
    assert_eq!(p.kappa(), 1.0);
    let z = JointPoint::from_slices(&[1.0, 1.0], &[2.0, 0.0]);
    assert_eq!(p.value(&z), 0.5 * (2.0 - 4.0));

    let p = MinimaxProblem::scsc(DMatrix::identity(1, 1), 1.0, 1.0).unwrap();
    assert!((p.ell() - 2.0).abs() < 1e-12 && (p.kappa() - 2.0).abs() < 1e-12);
    assert_eq!(p.partial_grads(&[1.0], &[1.0]), (vec![2.0], vec![0.0]));
}

#[test]
fn minimax_constructor_errors() {
    let s = spec(0, 3, 1.0, 2.0, 0);
    assert!(make_bilinear_game(&s, 0.0).is_err());
    assert!(make_bilinear_game(&s, -1.0).is_err());
    assert!(make_scsc_quadratic(&s, 0.0, 1.0).is_err());
    assert!(make_scsc_quadratic(&s, -1.0, 1.0).is_err());
}

#[test]
fn instance_doc_round_trip() {
    let docs = [
        InstanceDoc::QuadraticMin { spec: spec(1, 6, 0.1, 10.0, 1), b_scale: 10.0, radius: None },
        InstanceDoc::Bilinear { spec: spec(2, 5, 0.1, 10.0, 1), radius: 10.0 },
        InstanceDoc::ScscQuadratic { spec: spec(3, 4, 0.5, 5.0, 0), mu: 1.0, radius: 2.0 },
    ];
    for doc in docs {
        let text = serde_json::to_string(&doc).unwrap();
        let back: InstanceDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        match (doc.build().unwrap(), back.build().unwrap()) {
            (Instance::Min(a), Instance::Min(b)) => {
                assert_eq!(a.a(), b.a());
                assert_eq!(a.b(), b.b());
                assert_eq!(a.doc(), Some(&doc));
            }
            (Instance::Minimax(a), Instance::Minimax(b)) => {
                assert_eq!(a.a(), b.a());
                assert_eq!(a.doc(), Some(&doc));
            }
            _ => panic!("kind changed"),
        }
    }
    let v: serde_json::Value = serde_json::from_str(
        r#"{"kind":"bilinear","d":3,"seed":4,"eig_lo":0.1,"eig_hi":1.0,"zeros":1,"D":2.0}"#,
    )
    .unwrap();
    let doc: InstanceDoc = serde_json::from_value(v).unwrap();
    assert_eq!(doc.spec().d, 3);
}

#[test]
fn finite_difference_gradients() {
    let p = make_quadratic_min(&spec(21, 8, 0.1, 10.0, 1), 10.0).unwrap();
    let mut rng = rng::stream(99, 0, 0);
    for _ in 0..100 {
        let x = DVector::from_fn(8, |_, _| rng.sample::<f64, _>(StandardNormal));
        let h = 1e-5 * (1.0 + x.norm());
        let g = p.gradient(&x);
        let fd = DVector::from_fn(8, |i, _| {
            let mut e = DVector::zeros(8);
            e[i] = h;
            (p.value(&(&x + &e)) - p.value(&(&x - &e))) / (2.0 * h)
        });
        assert!((&fd - &g).norm() <= 1e-6 * g.norm().max(1.0));
    }

    let m = make_scsc_quadratic(&spec(22, 6, 0.5, 5.0, 0), 0.7, 3.0).unwrap();
    for _ in 0..100 {
        let z: Vec<f64> = (0..12).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let h = 1e-5 * (1.0 + z.iter().map(|v| v * v).sum::<f64>().sqrt());
        let (gx, gy) = m.partial_grads(&z[..6], &z[6..]);
        let g: Vec<f64> = gx.into_iter().chain(gy).collect();
        let mut err = 0.0;
        for i in 0..12 {
            let (mut zp, mut zm) = (z.clone(), z.clone());
            zp[i] += h;
            zm[i] -= h;
            let f = |w: &[f64]| m.value(&JointPoint::from_slices(&w[..6], &w[6..]));
            err += ((f(&zp) - f(&zm)) / (2.0 * h) - g[i]).powi(2);
        }
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err.sqrt() <= 1e-6 * gn.max(1.0));
    }
}

#[test]
fn operator_is_lipschitz_and_monotone() {
    for (seed, mu) in [(31u64, 0.0), (32, 0.8)] {
        let s = spec(seed, 6, 0.1, 10.0, if mu == 0.0 { 1 } else { 0 });
        let p = if mu == 0.0 { make_bilinear_game(&s, 1.0) } else { make_scsc_quadratic(&s, mu, 1.0) }.unwrap();
        let mut rng = rng::stream(seed, 1, 0);
        let mut draw = || {
            let v: Vec<f64> = (0..12).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            JointPoint::from_slices(&v[..6], &v[6..])
        };
        for _ in 0..1000 {
            let (z1, z2) = (draw(), draw());
            let (o1, o2) = (p.operator(&z1).flatten(), p.operator(&z2).flatten());
            let dz = z1.flatten() - z2.flatten();
            let dg = o1 - o2;
            assert!(dg.norm() <= (p.ell() + 1e-8) * dz.norm());
            assert!(dg.dot(&dz) >= -1e-10);
        }
    }
}
