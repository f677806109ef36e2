use num_complex::Complex64;
use schottky_core::hyperbolic::*;

fn pt(y: f64, h: f64) -> HPoint {
    HPoint::new(y, h).unwrap()
}

#[test]
fn distance_examples() {
    let m = pt(0.3, 0.7);
    assert_eq!(hyp_dist(&m, &m), 0.0);
    assert!((hyp_dist(&pt(0.0, 1.0), &pt(0.0, std::f64::consts::E)) - 1.0).abs() < 1e-14);
    assert!(HPoint::new(0.0, 0.0).is_err());
    assert!(HPoint::new(f64::NAN, 1.0).is_err());
}

#[test]
fn poisson_kernel_decays_beyond_the_point() {
    let m = pt(0.5, 1.3);
    assert!((poisson_kernel(&pt(0.0, 1.0), &BoundaryPoint::at(0.0)) - 1.0).abs() < 1e-15);
    assert!((poisson_kernel(&pt(0.0, 2.0), &BoundaryPoint::at(0.0)) - 0.5).abs() < 1e-15);
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        let y = 0.6 + 0.25 * k as f64;
        let v = poisson_kernel(&m, &BoundaryPoint::at(y));
        assert!(v > 0.0 && v < prev);
        prev = v;
    }
    assert!(prev < 1e-3);
}

#[test]
fn green_self_convergence() {
    for (lam, d) in [(Complex64::new(1.0, 0.0), 1.0), (Complex64::new(0.4, 3.0), 0.2), (Complex64::new(0.35, -7.0), 2.5)] {
        let a = green_kernel(lam, d, 128).unwrap();
        let b = green_kernel(lam, d, 256).unwrap();
        assert!(a.norm() > 0.0);
        assert!((a - b).norm() / a.norm() < 1e-10, "{lam} {d}: {a} {b}");
    }
}

#[test]
fn green_domain_errors() {
    assert!(green_kernel(Complex64::new(0.0, 1.0), 1.0, 128).is_err());
    assert!(green_kernel(Complex64::new(1.0, 0.0), 0.0, 128).is_err());
    assert!(green_kernel(Complex64::new(1.0, 0.0), -1.0, 128).is_err());
}

#[test]
fn green_decay_rate() {
    let k = GreenKernel::surface();
    for lam in [Complex64::new(0.7, 0.0), Complex64::new(1.3, 2.0)] {
        let a = k.eval(lam, 10.0).unwrap().norm().ln();
        let b = k.eval(lam, 20.0).unwrap().norm().ln();
        let slope = (b - a) / 10.0;
        assert!((slope + lam.re).abs() < 0.05 * lam.re, "{slope}");
    }
}

#[test]
fn green_series_matches_quadrature() {
    let k = GreenKernel::surface();
    for d in [0.5, 1.5, 3.0, 6.0] {
        let lam = Complex64::new(0.6, 4.0);
        let a = k.eval(lam, d).unwrap();
        let b = k.quadrature(lam, d).unwrap();
        assert!((a - b).norm() < 1e-10 * b.norm(), "{d}");
    }
}

/// Δ = −h²(∂_y² + ∂_h²) by a 5-point stencil.
fn laplacian<F: Fn(f64, f64) -> Complex64>(f: F, y: f64, h: f64, step: f64) -> Complex64 {
    let c = f(y, h);
    let lap = (f(y + step, h) + f(y - step, h) + f(y, h + step) + f(y, h - step) - c * 4.0) / (step * step);
    -lap * h * h
}

#[test]
fn green_solves_the_eigen_equation() {
    let k = GreenKernel::surface();
    let m0 = pt(0.0, 1.0);
    for lam in [Complex64::new(1.0, 0.0), Complex64::new(0.8, 1.5)] {
        let g = |y: f64, h: f64| k.eval(lam, hyp_dist(&pt(y, h), &m0)).unwrap();
        for (y, h) in [(0.9, 1.4), (-0.4, 2.1), (0.2, 0.45)] {
            let d = hyp_dist(&pt(y, h), &m0);
            assert!(d > 0.5 && d < 1.6);
            let res = laplacian(g, y, h, 1e-3) - g(y, h) * lam * (1.0 - lam);
            assert!(res.norm() < 1e-4 * g(y, h).norm(), "{lam} ({y},{h}): {res}");
        }
    }
}

#[test]
fn green_is_analytic_in_lambda() {
    let k = GreenKernel::surface();
    let e = 1e-5;
    for lam in [Complex64::new(0.9, 0.3), Complex64::new(0.3, -2.0), Complex64::new(1.7, 5.0)] {
        let d = 1.3;
        let fx = (k.eval(lam + e, d).unwrap() - k.eval(lam - e, d).unwrap()) / (2.0 * e);
        let fy = (k.eval(lam + Complex64::new(0.0, e), d).unwrap() - k.eval(lam - Complex64::new(0.0, e), d).unwrap()) / (2.0 * e);
        // f analytic ⇔ ∂_y f = i ∂_x f
        let cr = fy - Complex64::new(0.0, 1.0) * fx;
        assert!(cr.norm() < 1e-6 * fx.norm().max(1e-3), "{lam}: {cr}");
    }
}
