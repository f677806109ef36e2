use num_complex::Complex64;
use schottky_core::dimension::*;
use schottky_core::error::Error;
use schottky_core::hyperbolic::{hyp_dist, BoundaryPoint, HPoint};
use schottky_core::schottky::*;

const BUDGET: usize = 10_000_000;

fn test_group() -> SchottkyGroup {
    SchottkyGroup::symmetric(2.0, 1.0, 6.0, 1.0).unwrap()
}

fn pt(y: f64, h: f64) -> HPoint {
    HPoint::new(y, h).unwrap()
}

/// Points of the fundamental domain away from the disks.
fn interior_points() -> Vec<HPoint> {
    vec![
        pt(0.0, 0.5),
        pt(0.0, 1.0),
        pt(0.3, 1.7),
        pt(-0.6, 2.5),
        pt(0.0, 4.0),
        pt(3.9, 0.6),
        pt(-4.0, 1.2),
        pt(1.5, 3.0),
        pt(-2.2, 2.6),
        pt(7.5, 0.8),
    ]
}

#[test]
fn poincare_partial_examples() {
    let g = test_group();
    let lam = Complex64::new(0.7, 2.0);
    let m = pt(0.1, 0.9);
    let m2 = pt(-0.4, 1.6);
    let v0 = poincare_partial(&g, lam, &m, &m2, 0, BUDGET).unwrap();
    assert!((v0 - (-lam * hyp_dist(&m, &m2)).exp()).norm() < 1e-15);
    let s = Complex64::new(0.4, 0.0);
    let p5 = poincare_partial(&g, s, &m, &m2, 5, BUDGET).unwrap();
    let p6 = poincare_partial(&g, s, &m, &m2, 6, BUDGET).unwrap();
    assert!(p6.re >= p5.re);
    let brute: Complex64 = enumerate_words(&g, 5, BUDGET)
        .unwrap()
        .map(|(_, map)| (-lam * hyp_dist(&m, &map.apply(&m2))).exp())
        .sum();
    let fast = poincare_partial(&g, lam, &m, &m2, 5, BUDGET).unwrap();
    assert!((brute - fast).norm() < 1e-12);
}

#[test]
fn delta_in_range_and_monotone_in_radii() {
    let big = estimate_delta(&test_group(), 12, BUDGET).unwrap();
    let small = estimate_delta(&SchottkyGroup::symmetric(2.0, 0.5, 6.0, 0.5).unwrap(), 12, BUDGET).unwrap();
    assert!(big.value > 0.0 && big.value < 0.5);
    assert!(small.value < big.value);
    assert!(big.bracket.0 <= big.value && big.value <= big.bracket.1);
    assert_eq!(big.method, DeltaMethod::Pressure);
    assert!(estimate_delta(&test_group(), 3, BUDGET).is_err());
}

#[test]
fn cyclic_group_delta_vanishes() {
    let g = SchottkyGroup::cylinder(2.0).unwrap();
    let d = estimate_delta(&g, 12, BUDGET).unwrap();
    assert!(d.value < 1e-9);
}

#[test]
fn measure_examples() {
    let g = test_group();
    let delta = estimate_delta(&g, 12, BUDGET).unwrap().value;
    let mu8 = ps_measure(&g, delta, 8, BUDGET).unwrap();
    let mu9 = ps_measure(&g, delta, 9, BUDGET).unwrap();
    assert!((mu8.total_mass() - 1.0).abs() < 1e-12);
    for (y, _) in &mu8.atoms {
        let y = y.coord().unwrap();
        assert!(g.disks().iter().any(|d| d.contains(y)), "{y}");
    }
    assert!((mu8.mean() - mu9.mean()).abs() <= 1e-2);
}

#[test]
fn u_delta_single_atom() {
    let mu = AtomicMeasure::new(vec![(BoundaryPoint::at(0.0), 1.0)], 0.3);
    assert!((u_delta_eval(&pt(0.0, 1.0), &mu) - 1.0).abs() < 1e-15);
}

fn invariance_defect(g: &SchottkyGroup, mu: &AtomicMeasure) -> f64 {
    let mut worst: f64 = 0.0;
    for m in interior_points() {
        let u = u_delta_eval(&m, mu);
        for gen in g.generators() {
            for map in [*gen, gen.inverse()] {
                let v = u_delta_eval(&map.apply(&m), mu);
                worst = worst.max((v - u).abs() / u);
            }
        }
    }
    worst
}

#[test]
fn u_delta_is_nearly_invariant() {
    let g = test_group();
    let delta = estimate_delta(&g, 12, BUDGET).unwrap().value;
    let defects: Vec<f64> = [6, 8, 10]
        .iter()
        .map(|&l| invariance_defect(&g, &ps_measure(&g, delta, l, BUDGET).unwrap()))
        .collect();
    assert!(defects[2] <= 5e-2, "{defects:?}");
    assert!(defects[0] > defects[1] && defects[1] > defects[2], "{defects:?}");
}

#[test]
fn u_delta_eigen_residual() {
    let g = test_group();
    let delta = estimate_delta(&g, 12, BUDGET).unwrap().value;
    let mu = ps_measure(&g, delta, 10, BUDGET).unwrap();
    let h = 1e-3;
    for m in interior_points() {
        let u = |dy: f64, dh: f64| u_delta_eval(&pt(m.y() + dy, m.height() + dh), &mu);
        let c = u(0.0, 0.0);
        let lap = -(m.height() * m.height()) * (u(h, 0.0) + u(-h, 0.0) + u(0.0, h) + u(0.0, -h) - 4.0 * c) / (h * h);
        let res = (lap - delta * (1.0 - delta) * c).abs() / c;
        assert!(res <= 1e-3, "{m:?}: {res}");
    }
}

#[test]
fn profile_examples() {
    let mu = AtomicMeasure::new(vec![(BoundaryPoint::at(0.0), 1.0)], 0.5);
    assert!((f_delta_profile(&BoundaryPoint::at(1.0), &mu).unwrap() - 1.0).abs() < 1e-15);
    assert!(matches!(f_delta_profile(&BoundaryPoint::at(1e-8), &mu), Err(Error::Proximity { .. })));

    let g = test_group();
    let delta = estimate_delta(&g, 12, BUDGET).unwrap().value;
    let mu = ps_measure(&g, delta, 8, BUDGET).unwrap();
    let hi = mu.atoms.last().unwrap().0.coord().unwrap();
    let mut prev = 0.0;
    for k in 0..8 {
        let y = hi + 0.5f64.powi(k);
        let v = f_delta_profile(&BoundaryPoint::at(y), &mu).unwrap();
        assert!(v > prev);
        prev = v;
    }
    // homogeneity of |y − y'|^{−2δ}
    let scaled = AtomicMeasure::new(
        mu.atoms.iter().map(|(y, w)| (BoundaryPoint::at(2.0 * y.coord().unwrap()), *w)).collect(),
        mu.exponent,
    );
    let a = f_delta_profile(&BoundaryPoint::at(12.0), &mu).unwrap();
    let b = f_delta_profile(&BoundaryPoint::at(24.0), &scaled).unwrap();
    assert!((b / a - 2f64.powf(-2.0 * delta)).abs() < 1e-12);
}
