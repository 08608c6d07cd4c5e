mod common;

use common::{foldy_amplitudes, medium};
use elastoscatter::foldy::*;
use elastoscatter::greens::{dynamic_kernel, CVector, PlaneWave, Point, VectorField};
use elastoscatter::{Complex64, Error};
use proptest::prelude::*;

fn scene() -> impl Strategy<Value = (Vec<[f64; 2]>, Vec<(f64, f64)>, f64)> {
    (1usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::array::uniform2(-2.0f64..2.0), n),
            prop::collection::vec((0.05f64..2.0, 0.0f64..0.5), n),
            0.0..std::f64::consts::TAU,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matches_independent_foldy_solve((pts, alphas, t) in scene()) {
        let m = medium();
        let pts: Vec<Point<2>> = pts.into_iter().map(Point::<2>::from).collect();
        let alphas: Vec<Complex64> = alphas.into_iter().map(|(r, i)| Complex64::new(r, -i)).collect();
        let Ok(cloud) = PointCloud::new(pts.clone(), alphas.clone()) else { return Ok(()) };
        let sys = match build_interaction(&m, &cloud) {
            Ok(s) => s,
            Err(Error::Resonance { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let wave = PlaneWave::shear(&m, Point::<2>::new(t.cos(), t.sin()));
        let lib = scatter_points(&sys, &wave).unwrap();
        let inc: Vec<_> = pts.iter().map(|y| wave.eval(y)).collect();
        let amps = foldy_amplitudes(&m, sys.chi(), &pts, &alphas, &inc);
        for (a, b) in lib.amplitudes().iter().zip(&amps) {
            prop_assert!((a - b).norm() <= 1e-10 * b.norm().max(1e-12));
        }
    }

    #[test]
    fn labels_do_not_matter((pts, alphas, t) in scene()) {
        let m = medium();
        let pts: Vec<Point<2>> = pts.into_iter().map(Point::<2>::from).collect();
        let alphas: Vec<Complex64> = alphas.into_iter().map(|(r, i)| Complex64::new(r, -i)).collect();
        let Ok(cloud) = PointCloud::new(pts.clone(), alphas.clone()) else { return Ok(()) };
        let rev = PointCloud::new(pts.iter().rev().copied().collect(), alphas.iter().rev().copied().collect()).unwrap();
        let (Ok(a), Ok(b)) = (build_interaction(&m, &cloud), build_interaction(&m, &rev)) else { return Ok(()) };
        let wave = PlaneWave::compressional(&m, Point::<2>::new(t.cos(), t.sin()));
        let x = Point::<2>::new(3.1, -2.7);
        let ua = scatter_points(&a, &wave).unwrap().scattered(&x).unwrap();
        let ub = scatter_points(&b, &wave).unwrap().scattered(&x).unwrap();
        prop_assert!((ua - ub).norm() <= 1e-10 * ua.norm().max(1e-12));
    }
}

#[test]
fn solution_satisfies_impedance_condition() {
    let m = medium();
    let cloud = PointCloud::new(
        vec![
            Point::<2>::new(0.0, 0.0),
            Point::<2>::new(0.9, 0.2),
            Point::<2>::new(-0.4, 1.0),
        ],
        vec![
            Complex64::new(0.1, 0.0),
            Complex64::new(0.5, -0.2),
            Complex64::new(1.5, 0.0),
        ],
    )
    .unwrap();
    let sys = build_interaction(&m, &cloud).unwrap();
    let wave = PlaneWave::shear(&m, Point::<2>::new(0.6, 0.8));
    let field = scatter_points(&sys, &wave).unwrap();
    let total = |x: &Point<2>| field.total(&wave, x);
    for r in tau_residual(&m, &cloud, &total, &TauOptions::default()).unwrap() {
        assert!(r.relative() < 1e-4, "{:?}: {}", r.point, r.relative());
    }
}

#[test]
fn three_dimensional_impedance_condition() {
    let m = medium();
    let cloud = PointCloud::uniform(
        vec![Point::<3>::new(0.0, 0.0, 0.0), Point::<3>::new(0.5, 0.3, -0.2)],
        Complex64::new(0.3, 0.0),
    )
    .unwrap();
    let sys = build_interaction(&m, &cloud).unwrap();
    let wave = PlaneWave::compressional(&m, Point::<3>::new(0.0, 0.6, 0.8));
    let field = scatter_points(&sys, &wave).unwrap();
    let total = |x: &Point<3>| field.total(&wave, x);
    for r in tau_residual(&m, &cloud, &total, &TauOptions::default()).unwrap() {
        assert!(r.relative() < 1e-3, "{}", r.relative());
    }
}

#[test]
fn scattered_field_is_a_sum_of_green_columns() {
    let m = medium();
    let cloud = PointCloud::uniform(
        vec![Point::<2>::new(0.3, 0.0), Point::<2>::new(-0.3, 0.0)],
        Complex64::new(0.2, 0.0),
    )
    .unwrap();
    let sys = build_interaction(&m, &cloud).unwrap();
    let wave = PlaneWave::compressional(&m, Point::<2>::new(1.0, 0.0));
    let f = scatter_points(&sys, &wave).unwrap();
    let x = Point::<2>::new(0.0, 2.0);
    let sum = cloud
        .points()
        .iter()
        .zip(f.amplitudes())
        .fold(CVector::<2>::zeros(), |acc, (y, a)| {
            acc + dynamic_kernel(&m, &(x - y)) * a
        });
    assert_eq!(f.scattered(&x).unwrap(), sum);
}

#[test]
fn rejects_gain_and_duplicates() {
    let p = vec![Point::<2>::new(0.0, 0.0)];
    assert!(matches!(
        PointCloud::new(p.clone(), vec![Complex64::new(0.1, 0.2)]),
        Err(Error::Config(_))
    ));
    assert!(PointCloud::new(vec![p[0], p[0]], vec![Complex64::new(0.1, 0.0); 2]).is_err());
}
