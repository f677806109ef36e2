use std::f64::consts::PI;

use num_complex::Complex64;
use schottky_core::dimension::estimate_delta;
use schottky_core::schottky::*;
use schottky_core::zeta::*;

const BUDGET: usize = 10_000_000;

fn test_group() -> SchottkyGroup {
    SchottkyGroup::symmetric(2.0, 1.0, 6.0, 1.0).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cylinder_product(lambda: Complex64, ell: f64, k_max: usize) -> Complex64 {
    (0..=k_max).map(|k| 1.0 - (-(lambda + k as f64) * ell).exp()).product()
}

#[test]
fn dirichlet_examples() {
    let cyl = SchottkyGroup::cylinder(2.0).unwrap();
    let sp = primitive_geodesics(&cyl, 3.9, 1000).unwrap();
    let z = zeta_dirichlet(c(1.0, 0.0), &sp, 40, 0.0, Orientation::Unoriented).unwrap();
    assert!((z.value - cylinder_product(c(1.0, 0.0), 2.0, 40)).norm() < 1e-12);
    assert_eq!(z.method, ZetaMethod::Dirichlet);

    let g = test_group();
    let delta = estimate_delta(&g, 12, BUDGET).unwrap().value;
    let sp = primitive_geodesics(&g, 30.0, 50_000_000).unwrap();
    let far = zeta_dirichlet(c(10.0, 0.0), &sp, 40, delta, Orientation::Oriented).unwrap();
    // Z(10) − 1 is dominated by the shortest geodesics, e^{−10·2.63}
    assert!((far.value - 1.0).norm() < 1e-10);
    assert!(far.truncation_bound < 1e-12);
    assert!(zeta_dirichlet(c(delta + 0.01, 0.0), &sp, 40, delta, Orientation::Oriented).is_err());

    let lam = c(0.9, 0.0);
    let d = zeta_dirichlet(lam, &sp, 40, delta, Orientation::Oriented).unwrap();
    let ce = zeta_cycle(lam, &g, 12, Orientation::Oriented, BUDGET).unwrap();
    assert!((d.value - ce.value).norm() < 1e-8, "{} {}", d.value, ce.value);
    assert!(d.truncation_bound < 1e-8);
}

#[test]
fn cylinder_zeros_form_the_lattice() {
    let g = SchottkyGroup::cylinder(2.0).unwrap();
    let ce = CycleExpansion::new(&g, 24, Orientation::Unoriented, BUDGET).unwrap();
    let rect = Rect::new(-2.5, 0.5, -10.0, 10.0).unwrap();
    let hits = find_resonances(&ce, rect, SearchOptions::new(0.05)).unwrap();
    let mut expected = 0;
    for k in 0..=2 {
        for j in -3i32..=3 {
            if (PI * j as f64).abs() <= 10.0 {
                expected += 1;
                let target = c(-(k as f64), PI * j as f64);
                assert!(hits.iter().any(|h| (h.lambda - target).norm() < 1e-6), "missing {target}");
            }
        }
    }
    assert_eq!(hits.len(), expected);
    for h in &hits {
        assert_eq!(h.multiplicity, 1);
        let k = (-h.lambda.re).round();
        let j = (h.lambda.im / PI).round();
        assert!((h.lambda - c(-k, PI * j)).norm() < 1e-6);
        assert_eq!(h.excluded, j == 0.0);
    }
}

#[test]
fn cycle_coefficients_decay_superexponentially() {
    let ce = CycleExpansion::new(&test_group(), 12, Orientation::Oriented, BUDGET).unwrap();
    let logs: Vec<f64> = ce.coefficients(c(0.4, 2.0)).iter().skip(1).map(|d| d.0.norm().ln()).collect();
    for w in logs.windows(2) {
        assert!(w[1] < w[0]);
    }
    // concave: the decrements grow
    let steps: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    let late = &steps[steps.len() - 6..];
    for w in late.windows(2) {
        assert!(w[1] < w[0], "{steps:?}");
    }
}

#[test]
fn reality_and_relabelling_symmetry() {
    let g = test_group();
    let ce = CycleExpansion::new(&g, 10, Orientation::Oriented, BUDGET).unwrap();
    let swapped = SchottkyGroup::symmetric(6.0, 1.0, 2.0, 1.0).unwrap();
    let cs = CycleExpansion::new(&swapped, 10, Orientation::Oriented, BUDGET).unwrap();
    for lam in [c(0.3, 4.0), c(-0.5, 1.2), c(1.1, -7.0)] {
        assert!((ce.eval(lam.conj()) - ce.eval(lam).conj()).norm() < 1e-12 * ce.eval(lam).norm().max(1.0));
        assert!((ce.eval(lam) - cs.eval(lam)).norm() < 1e-10 * ce.eval(lam).norm().max(1.0));
    }
}

#[test]
fn right_of_delta_is_zero_free_and_delta_is_simple() {
    let g = test_group();
    let to = TransferOperator::new(&g, 24, Orientation::Oriented).unwrap();
    let delta = delta_from_zeta(&to, 0.25, 0.4).unwrap();
    let pressure = estimate_delta(&g, 12, BUDGET).unwrap();
    assert!((delta.value - pressure.value).abs() <= 1e-3);
    let hits = find_resonances(&to, Rect::new(delta.value + 0.01, 1.5, -20.0, 20.0).unwrap(), SearchOptions::new(0.05)).unwrap();
    assert!(hits.is_empty(), "{hits:?}");
    let w = winding_number_circle(&to, c(delta.value, 0.0), 0.02, 0.05).unwrap();
    assert_eq!(w, 1);
}

#[test]
fn winding_matches_returned_multiplicities() {
    let g = test_group();
    let to = TransferOperator::new(&g, 24, Orientation::Oriented).unwrap();
    let rect = Rect::new(-0.45, 0.31, 0.3, 6.0).unwrap();
    let hits = find_resonances(&to, rect, SearchOptions::new(0.05)).unwrap();
    let w = winding_number(&to, &rect, 0.05).unwrap();
    assert!(w > 0);
    assert_eq!(hits.iter().map(|h| h.multiplicity as i64).sum::<i64>(), w);
    for h in &hits {
        assert!(h.converged);
        assert!(h.newton_residual < 1e-10);
        assert!(to.eval(h.lambda).norm() < 1e-8 * to.eval(h.lambda + 0.01).norm());
        // the mirror image is a zero as well
        assert!(to.eval(h.lambda.conj()).norm() < 1e-8 * to.eval(h.lambda.conj() + 0.01).norm());
    }
}

#[test]
fn transfer_operator_agrees_with_cycle_expansion() {
    let g = test_group();
    let to = TransferOperator::new(&g, 24, Orientation::Oriented).unwrap();
    let ce = CycleExpansion::new(&g, 12, Orientation::Oriented, BUDGET).unwrap();
    for lam in [c(0.5, 1.0), c(0.0, 3.0), c(-0.3, 0.5)] {
        let a = to.eval(lam);
        let b = ce.eval(lam);
        assert!((a - b).norm() < 1e-6 * b.norm().max(1.0), "{lam}: {a} {b}");
    }
}

#[test]
fn cylinder_census() {
    let hits = {
        let g = SchottkyGroup::cylinder(2.0).unwrap();
        let ce = CycleExpansion::new(&g, 24, Orientation::Unoriented, BUDGET).unwrap();
        find_resonances(&ce, Rect::new(-1.5, 0.4, -10.0, 10.0).unwrap(), SearchOptions::new(0.05)).unwrap()
    };
    let radii = [4.0, 5.5, 7.0, 8.5, 10.0];
    let rep = counting_census(&hits, 0.0, 0.1, &radii, 0);
    for w in rep.counts.windows(2) {
        assert!(w[0] <= w[1]);
    }
    assert!((rep.fitted_exponents.1 - 1.0).abs() <= 0.3, "{rep:?}");
}
